"""Dev verification for estimation.py — not a deliverable."""

import math
import time

import numpy as np

import covertsense.estimation as est
from covertsense.covertness import covert_budget, equal_bath_c2
from covertsense.gaussian import CovarianceMatrix, thermal_cm, tensor, vacuum_cm
from covertsense.scenario import ProbeSettings, SensingScenario, alice_cm

rng = np.random.default_rng(1234)


def random_physical_cm2():
    """Random physical 2-mode CM: S D S^T with random symplectic-ish recipe."""
    # build from random Gaussian unitary action on a thermal: use random
    # orthogonal-symplectic + squeezing products acting on diag thermal
    from covertsense.gaussian import (
        apply_beam_splitter,
        apply_phase,
        apply_symplectic,
    )

    n1, n2 = rng.uniform(0.0, 2.0, size=2)
    cm = thermal_cm([n1, n2])
    # random squeezers: S = diag(e^r, e^-r) per mode in qqpp ordering
    r1, r2 = rng.uniform(-0.6, 0.6, size=2)
    s = np.diag([math.exp(r1), math.exp(r2), math.exp(-r1), math.exp(-r2)])
    cm = apply_symplectic(cm, s)
    cm = apply_phase(cm, 0, rng.uniform(-math.pi, math.pi))
    cm = apply_phase(cm, 1, rng.uniform(-math.pi, math.pi))
    cm = apply_beam_splitter(cm, 0, 1, rng.uniform(0.05, 0.95))
    cm = apply_phase(cm, 0, rng.uniform(-math.pi, math.pi))
    return cm


print("== fidelity basics ==")
worst_self = 0.0
worst_swap = 0.0
for _ in range(300):
    a = random_physical_cm2()
    b = random_physical_cm2()
    worst_self = max(worst_self, abs(est.gaussian_fidelity(a, a) - 1.0))
    worst_swap = max(
        worst_swap,
        abs(est.gaussian_fidelity(a, b) - est.gaussian_fidelity(b, a)),
    )
print("worst |F(V,V)-1|:", worst_self)
print("worst swap asym:", worst_swap)

vac2 = vacuum_cm(2)
th1_vac = thermal_cm([1.0, 0.0])
f = est.gaussian_fidelity(vac2, th1_vac)
print("F(vac2, th1xvac) =", f, "expected", math.sqrt(0.5), "diff", abs(f - math.sqrt(0.5)))

print()
print("== qfi closed examples ==")
sc = SensingScenario(0.5, 0.5, 1.0, 1.0)
fp, fa = est.qfi_closed(sc, 0.1, 1.0)
print("F_A =", fa, "expected 0.04, diff", abs(fa - 0.04))
print("F_A' =", fp, "expected", 0.1 / 3.275, "diff", abs(fp - 0.1 / 3.275))
fp0, fa0 = est.qfi_closed(sc, 0.0, 1.0)
print("nbar_s=0 ->", fp0, fa0)

print()
print("== fidelity curvature example: F ~ 1 - F_A' w^2/8 ==")
probe = ProbeSettings(0.1, 1.0, 0.3)
w = 1e-3
f_w = est.gaussian_fidelity(alice_cm(sc, probe), alice_cm(sc, ProbeSettings(0.1, 1.0, 0.3 + w)))
pred = 1.0 - fp * w * w / 8.0
print("F(w):", f_w, "pred:", pred, "diff:", abs(f_w - pred))

print()
print("== qfi numeric vs closed, 100 draws in acceptance ranges ==")
worst_rel = 0.0
worst_case = None
t0 = time.time()
for _ in range(100):
    eta1, eta2 = rng.uniform(0.4, 0.95, size=2)
    b1, b2 = rng.uniform(0.01, 3.0, size=2)
    nbs = rng.uniform(0.05, 0.5)
    nlo = rng.uniform(1.0, 100.0)
    th = rng.uniform(-math.pi, math.pi)
    scn = SensingScenario(eta1, eta2, b1, b2)
    pr = ProbeSettings(nbs, nlo, th)
    fnum = est.qfi_numeric(scn, pr)
    fcl, _ = est.qfi_closed(scn, nbs, nlo)
    rel = abs(fnum - fcl) / abs(fcl)
    if rel > worst_rel:
        worst_rel, worst_case = rel, (eta1, eta2, b1, b2, nbs, nlo, th, fcl)
print("elapsed:", time.time() - t0, "s")
print("worst rel:", worst_rel, "(target 1e-4)")
print("worst case:", worst_case)

print()
print("== finite -> limit at nbar_lo = 1e6 ==")
worst = 0.0
for _ in range(50):
    eta1, eta2 = rng.uniform(0.4, 0.95, size=2)
    b1, b2 = rng.uniform(0.01, 3.0, size=2)
    nbs = rng.uniform(0.05, 0.5)
    scn = SensingScenario(eta1, eta2, b1, b2)
    fp6, fa6 = est.qfi_closed(scn, nbs, 1e6)
    worst = max(worst, abs(fp6 - fa6) / fa6)
print("worst rel gap:", worst, "(target 1e-3)")

print()
print("== theta independence of numeric QFI ==")
pr0 = ProbeSettings(0.1, 5.0, 0.0)
pr1 = ProbeSettings(0.1, 5.0, 1.0)
v0 = est.qfi_numeric(sc, pr0)
v1 = est.qfi_numeric(sc, pr1)
print("theta 0 vs 1:", v0, v1, "absdiff", abs(v0 - v1))
przero = ProbeSettings(0.0, 5.0, 0.0)
print("nbar_s=0 numeric:", est.qfi_numeric(sc, przero))

print()
print("== qcrb examples ==")
c_ase, bound = est.qcrb_ase(sc, 1e-3, 3e12)
print("c_ase:", c_ase, "expected 0.8385254915624212 diff", abs(c_ase - 2.5 * math.sqrt(1.8) / 4.0))
print("B:", bound, "expected ~4.8412e-4:", 0.8385254915624212 / (1e-3 * math.sqrt(3e12)))

print()
print("== heterodyne stats ==")
st = est.heterodyne_stats(sc, 0.0, 0.1, 1)
print("theta=0: mu =", st.mu1, st.mu2, "s1sq-s2sq-1 =", st.sigma1_sq - st.sigma2_sq - 1.0)
st = est.heterodyne_stats(sc, 0.7, 0.1, 1)
print("sigma_sq =", st.sigma_sq, "expected 35, diff", abs(st.sigma_sq - 35.0))
print("invariant s1+s2-2s-1:", st.sigma1_sq + st.sigma2_sq - 2.0 * st.sigma_sq - 1.0)
print("mu norm - 1:", st.mu1**2 + st.mu2**2 - 1.0)

# budget identity: sigma_het_sq == c_het_tilde/(eps sqrt n)
eps, n = 0.01, 10**8
bud = covert_budget(sc, eps, n)
st = est.heterodyne_stats(sc, 0.5, bud.nbar_s, n)
cht = est.ase_heterodyne_coefficient(sc)
print("sigma_het_sq:", st.sigma_het_sq, "c_het_tilde/(eps sqrt n):", cht / (eps * math.sqrt(n)),
      "rel diff:", abs(st.sigma_het_sq - cht / (eps * math.sqrt(n))) / st.sigma_het_sq)

print()
print("== coefficient hierarchy over acceptance grid ==")
viol = []
worst_ratio_gap = 0.0
for eta in [0.1, 0.3, 0.5, 0.7, 0.9]:
    for nb in [0.01, 0.1, 1.0, 10.0]:
        e1 = e2 = math.sqrt(eta)
        scn = SensingScenario(e1, e2, nb, nb)
        c_ase, _ = est.qcrb_ase(scn, 1e-3, 10**6)
        cht = est.ase_heterodyne_coefficient(scn)
        ns_c, c_het, c_coh = est.coherent_baseline(eta, nb, 1e-3, 10**6)
        mu, mu_c, mu_w = est.source_comparison(scn, 3e12, 3e9, 1e-3, 1e-3)
        ok1 = cht <= 2.0 * c_ase + 1e-12
        ok2 = c_coh <= c_het <= 2.0 * c_coh + 1e-12
        ok3 = abs(mu_c - 1.0) <= 1e-9
        if not (ok1 and ok2 and ok3):
            viol.append((eta, nb, ok1, ok2, ok3, mu_c))
        worst_ratio_gap = max(worst_ratio_gap, abs(mu_c - 1.0))
print("violations:", viol)
print("worst |mu_c - 1| on equal baths:", worst_ratio_gap)

# unequal baths: mu_c >= 1 - 1e-9
worst_mu_c = math.inf
for _ in range(200):
    eta1, eta2 = rng.uniform(0.1, 0.95, size=2)
    b1, b2 = rng.uniform(0.01, 5.0, size=2)
    scn = SensingScenario(eta1, eta2, b1, b2)
    mu, mu_c, mu_w = est.source_comparison(scn, 3e12, 3e9, 1e-3, 1e-3)
    worst_mu_c = min(worst_mu_c, mu_c)
print("min mu_c over unequal baths:", worst_mu_c, "(must be >= 1 - 1e-9)")

print()
print("== coherent baseline examples ==")
ns_c, c_het, c_coh = est.coherent_baseline(0.25, 1.0, 1e-3, 10**6)
print("c_het:", c_het, "expected 1.3125/1.118034 =", 1.3125 / math.sqrt(0.3125) / 2.0 / 2.0)
print("    direct:", (1 - 0.25) * (1 + 1 * (1 - 0.25)) / (8 * 0.25 * math.sqrt(0.25 * 1 * 1.25)))
print("c_coh:", c_coh, "expected 0.838525")
print("mu example: mu_c=1, W ratio 1000 -> mu =", est.source_comparison(sc, 3e12, 3e9, 1e-3, 1e-3)[0],
      "expected", math.sqrt(1e-3))

print()
print("== finite-LO heterodyne variances ==")
for nlo in [1e4, 1e5, 1e6]:
    s1, s2 = est.finite_lo_heterodyne_variances(sc, 0.7, 0.1, nlo)
    st = est.heterodyne_stats(sc, 0.7, 0.1, 1)
    rel1 = abs(s1 - st.sigma1_sq) / st.sigma1_sq
    print(f"nbar_lo={nlo:g}: rel gap {rel1:.3e} vs 1/nbar_lo {1/nlo:.1e}")

print()
print("== Philox counter addressing bit-check (corrected stride) ==")
key = 42
full = np.random.Generator(np.random.Philox(key=key)).random(2 * 10000)
g_adv = np.random.Philox(key=key)
g_adv.advance(2 * 4096 // 4)
part = np.random.Generator(g_adv).random(2 * (10000 - 4096))
print("block 1 matches straight stream:", np.array_equal(full[2 * 4096 :], part))
# simulate blocked consumption as the MC does and compare to one stream
blocks = []
for b in range(3):
    start = b * 4096
    count = min(4096, 10000 - start)
    bg = np.random.Philox(key=key)
    bg.advance(start * 2 // 4)
    blocks.append(np.random.Generator(bg).random(count * 2))
blocked = np.concatenate(blocks)
print("3-block concat == straight stream:", np.array_equal(blocked, full))

print()
print("== MC determinism / workers ==")
t0 = time.time()
r1 = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 10**8, 20000, 7)
r2 = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 10**8, 20000, 7)
r4 = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 10**8, 20000, 7, workers=4)
print("same seed identical:", r1 == r2, " workers=4 identical:", r1 == r4)
print("20k trials elapsed:", time.time() - t0)

print()
print("== MC fast vs per-sample (statistical) ==")
rf = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 256, 5000, 11)
rs = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 256, 5000, 11, per_sample=True)
print("fast:", rf)
print("slow:", rs)
print("z between:", (rf[0] - rs[0]) / math.hypot(rf[1], rs[1]))

print()
print("== huge n -> mse ~ 0 ==")
rh = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 10**16, 2000, 3)
print("mse at n=1e16:", rh[0])

print()
print("== CRITERION 9 COMMITTED RUN: seed 42 ==")
t0 = time.time()
mse, se = est.simulate_heterodyne_mse(sc, 0.5, 0.01, 10**8, 200000, 42)
target = est.ase_heterodyne_coefficient(sc) / (0.01 * math.sqrt(10**8))
z = (mse - target) / se
print(f"mse = {mse!r}, stderr = {se!r}")
print(f"target sigma_het_sq = {target!r}")
print(f"z = {z:.4f}  -> within 3 SE: {abs(mse - target) <= 3 * se}")
print("elapsed:", time.time() - t0, "s")

print()
print("== report builder ==")
rep = est.estimation_report(sc, 0.01, 10**8, 10.0)
print(rep)
