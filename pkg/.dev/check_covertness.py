"""Dev scratch: covertness vs closed forms across the acceptance grid."""
import math
import numpy as np
from covertsense.scenario import SensingScenario
from covertsense import covertness as cov
from covertsense.scenario import willie_cm

# 1. equal-bath closed form vs stable path vs direct qre_gaussian
grid_eta = [0.1, 0.25, 0.5, 0.9]
grid_nb = [0.01, 0.1, 1.0, 10.0]
worst_stable = worst_direct = 0.0
for ee in grid_eta:
    for nb in grid_nb:
        sc = SensingScenario(math.sqrt(ee), math.sqrt(ee), nb, nb)
        for ns in (1e-4, 1e-2, 0.1):
            closed = cov.equal_bath_qre(ee, nb, ns)
            stable = cov.willie_qre(sc, ns)
            direct = cov.qre_gaussian(willie_cm(sc, 0.0, 0.4), willie_cm(sc, ns, 0.4)).nats
            worst_stable = max(worst_stable, abs(stable - closed))
            worst_direct = max(worst_direct, abs(direct - closed))
            rel = abs(stable - closed) / closed
            if rel > 1e-9:
                print("REL WARN", ee, nb, ns, rel)
print(f"equal-bath: |stable-closed| {worst_stable:.2e}  |direct-closed| {worst_direct:.2e}")

# known value check
print("D(0.25,1,0.1) =", cov.equal_bath_qre(0.25, 1.0, 0.1), "expect 0.0072451")

# 2. c2/c3 numerical vs closed forms on the full grid
worst_c2 = worst_c3 = 0.0
for ee in grid_eta:
    for nb in grid_nb:
        sc = SensingScenario(math.sqrt(ee), math.sqrt(ee), nb, nb)
        tc = cov.taylor_coefficients(sc)
        c2c = cov.equal_bath_c2(ee, nb)
        c3c = cov.equal_bath_c3(ee, nb)
        r2 = abs(tc.c2 - c2c) / abs(c2c)
        r3 = abs(tc.c3 - c3c) / abs(c3c)
        worst_c2 = max(worst_c2, r2)
        worst_c3 = max(worst_c3, r3)
        if r2 > 1e-7 or r3 > 1e-6:
            print(f"  grid ({ee},{nb}): c2 rel {r2:.2e}, c3 rel {r3:.2e} step {tc.step:.2e}")
print(f"c2 worst rel {worst_c2:.2e} (target 1e-6), c3 worst rel {worst_c3:.2e} (target 1e-5)")
print("c2(0.25,1) =", cov.taylor_c2(SensingScenario(0.5, 0.5, 1, 1)), "expect 1.8")
print("c3(0.25,1) =", cov.taylor_c3(SensingScenario(0.5, 0.5, 1, 1)), "expect -12.96")

# 3. unequal baths: stable vs direct route at moderate ns
rng = np.random.default_rng(11)
worst = 0.0
for _ in range(100):
    sc = SensingScenario(rng.uniform(0.05, 0.95), rng.uniform(0.05, 0.95),
                         rng.uniform(0.05, 3.0), rng.uniform(0.05, 3.0))
    ns = rng.uniform(1e-3, 0.5)
    th = rng.uniform(-np.pi, np.pi)
    a = cov.willie_qre(sc, ns)
    b = cov.qre_gaussian(willie_cm(sc, 0.0, th), willie_cm(sc, ns, th)).nats
    worst = max(worst, abs(a - b) / max(abs(b), 1e-300))
print("unequal baths stable-vs-direct worst rel:", worst)

# 4. budget + bound roundtrip
sc = SensingScenario(0.5, 0.5, 1.0, 1.0)
b = cov.covert_budget(sc, 1e-3, 1e6)
print("budget:", b.nbar_s, "expect 2.98142e-6; in_regime:", b.in_taylor_regime)
pe = cov.willie_error_lower_bound(b.c2, 1e6, b.nbar_s)
print("P_e at budget:", pe, "expect", 0.5 - 1e-3, "diff", abs(pe - (0.5 - 1e-3)))
D = cov.willie_qre(sc, b.nbar_s)
print("D at budget:", D, "ceiling 2eps^2/n =", 2 * 1e-3**2 / 1e6)

# 5. identity channel
try:
    cov.taylor_c2(SensingScenario(1.0, 1.0, 1.0, 1.0))
    print("identity: NO ERROR (bad)")
except cov.DegenerateCovertnessError:
    print("identity channel raises DegenerateCovertness ok")

# 6. vacuum baths -> DomainError
from covertsense.errors import DomainError
try:
    cov.taylor_c2(SensingScenario(0.5, 0.5, 0.0, 0.0))
    print("vacuum: NO ERROR (bad)")
except DomainError:
    print("vacuum baths raise DomainError ok")

# 7. infinite QRE and limits
from covertsense import gaussian as g
V0 = g.thermal_cm([1.0, 1.0])
V1 = g.thermal_cm([1.0, 0.0])
try:
    cov.qre_gaussian(V0, V1)
    print("infinite: NO ERROR (bad)")
except cov.InfiniteQreError:
    print("InfiniteQre raised ok")
print("finite reverse:", cov.qre_gaussian(V1, V0).nats)
V = g.vacuum_cm(2)
print("D(vac||vac):", cov.qre_gaussian(V, V).nats)
print("D(vac2||th1xth1):", cov.qre_gaussian(g.vacuum_cm(2), g.thermal_cm([1.0, 1.0])).nats,
      "expect", 2 * math.log(2))
