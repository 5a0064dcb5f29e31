"""Dev scratch: circuit vs closed forms, effective-channel route."""
import numpy as np
from covertsense import gaussian as g
from covertsense.scenario import (
    SensingScenario, ProbeSettings, build_global_cm, willie_cm, alice_cm,
    effective_channel,
)

rng = np.random.default_rng(3)
worst_w = worst_a = worst_eff = 0.0
for _ in range(500):
    sc = SensingScenario(
        eta_1=rng.uniform(0.02, 0.98),
        eta_2=rng.uniform(0.02, 0.98),
        nbar_b1=rng.uniform(0.0, 5.0),
        nbar_b2=rng.uniform(0.0, 5.0),
    )
    pr = ProbeSettings(
        nbar_s=rng.uniform(0.0, 0.5),
        nbar_lo=rng.uniform(0.0, 100.0),
        theta=rng.uniform(-4, 4),
    )
    cm = build_global_cm(sc, pr)  # raises if blocks mismatch
    assert cm.is_physical()
    # effective-channel route for Alice
    ee, nbe = effective_channel(sc)
    src = g.ase_two_mode_cm(pr.nbar_s, pr.nbar_lo)
    via = g.apply_thermal_channel(src, 0, ee, nbe)
    via = g.apply_phase(via, 0, pr.theta)
    a = alice_cm(sc, pr)
    worst_eff = max(worst_eff, np.abs(via.matrix - a.matrix).max())
print("effective-channel route vs closed form:", worst_eff)

# identity channel
sc = SensingScenario(1.0, 1.0, 3.0, 2.0)
assert sc.is_identity_channel and sc.nbar_b_eff == 0.0 and sc.eta_eff == 1.0
pr = ProbeSettings(0.2, 5.0, 1.1)
w0 = willie_cm(sc, 0.0, pr.theta)
w1 = willie_cm(sc, 0.7, pr.theta)
print("identity-channel: willie state probe-independent:", np.abs(w0.matrix - w1.matrix).max())
cm = build_global_cm(sc, pr)
print("identity circuit ok, physical:", cm.is_physical())

# equal-bath willie QRE invariance across factorizations of the same eta_eff
def willie_qre_num(sc, ns, th):
    V0 = willie_cm(sc, 0.0, th)
    V1 = willie_cm(sc, ns, th)
    sp1 = g.symplectic_spectrum(V1, reference=V0)
    sp0 = g.symplectic_spectrum(V0, reference=V0)
    def sig(u, d):
        t = 0.0
        for uk, dk in zip(u, d):
            if uk > 0.5 + 1e-13:
                t += 0.5 * ((1 + 2*dk)*np.log(uk + 0.5) + (1 - 2*dk)*np.log(uk - 0.5))
        return t
    return -sig(sp0.eigenvalues, sp0.relative_diagonal) + sig(sp1.eigenvalues, sp1.relative_diagonal)

nb, ns = 1.0, 0.01
vals = []
for (e1, e2) in [(0.5, 0.5), (0.25, 1.0), (1.0, 0.25), (0.7, 0.25/0.7)]:
    sc = SensingScenario(e1, e2, nb, nb)
    vals.append(willie_qre_num(sc, ns, 0.3))
print("equal-bath QRE across factorizations of eta_eff=0.25:", vals)
print("max spread:", max(vals) - min(vals))
