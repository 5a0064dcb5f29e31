"""Dev verification for fock.py against the Gaussian route."""

import math
import sys
import time

import numpy as np

sys.path.insert(0, "/root/pkg/src")

from covertsense.covertness import willie_qre
from covertsense.errors import CutoffError, InfiniteQreError
from covertsense.estimation import gaussian_fidelity
from covertsense.fock import (
    FockDensityMatrix,
    fock_moments,
    fock_purity,
    fock_tensor,
    oracle_alice_state,
    oracle_cross_check,
    oracle_fidelity,
    oracle_qre,
    oracle_willie_state,
    thermal_fock,
)
from covertsense.gaussian import (
    CovarianceMatrix,
    apply_beam_splitter,
    ase_two_mode_cm,
    symplectic_spectrum,
    tensor,
    thermal_cm,
    vacuum_cm,
)
from covertsense.scenario import ProbeSettings, SensingScenario, alice_cm, willie_cm

ok = True


def check(name, cond, detail=""):
    global ok
    status = "PASS" if cond else "FAIL"
    if not cond:
        ok = False
    print(f"[{status}] {name} {detail}")


# --- 0. Gaussian-side sanity: source prep BS reproduces the split CM ------
# thermal(N) on mode 0 (signal), vacuum mode 1 (reference)
N = 0.25
t = 0.1 / N  # nbar_s = 0.1, nbar_lo = 0.15
two = tensor(thermal_cm([N]), vacuum_cm(1))
split_cm = apply_beam_splitter(two, 1, 0, t)  # i=reference, j=signal
want = ase_two_mode_cm(0.1, 0.15)
check(
    "split prep matches ase_two_mode_cm",
    float(np.abs(split_cm.matrix - want.matrix).max()) < 1e-14,
    f"max err {float(np.abs(split_cm.matrix - want.matrix).max()):.2e}",
)

# --- 1. thermal_fock -------------------------------------------------------
th = thermal_fock(1.0)
print(f"thermal(1) auto cutoff = {th.cutoff}, trace = {th.trace()!r}, tail = {th.tail_bound:.3e}")
check("thermal(1) p_k = 2^-(k+1)", all(
    abs(th.entries[k, k].real - 2.0 ** (-(k + 1))) < 1e-16 for k in range(th.cutoff + 1)
))
check("thermal(1) trace >= 1-1e-10", th.trace() >= 1 - 1e-10)
vac = thermal_fock(0.0)
check("vacuum cutoff 0, pure projector", vac.cutoff == 0 and vac.entries[0, 0] == 1.0)
try:
    thermal_fock(1.0, 5)
    check("insufficient cutoff raises", False)
except CutoffError as e:
    check("insufficient cutoff raises", "33" in str(e), f"msg: {e}")
try:
    thermal_fock(2.5)
    check("cap exceeded raises", False)
except CutoffError:
    check("cap exceeded raises", True)

# --- 2. oracle_willie_state ------------------------------------------------
sc = SensingScenario(0.5, 0.5, 1.0, 1.0)
t0 = time.time()
w_on = oracle_willie_state(sc, 0.05, 0.3)
t1 = time.time()
print(f"willie oracle (1,1,0.05): cutoff={w_on.cutoff}, {t1-t0:.2f}s, trace={w_on.trace()!r}")
mean, cov = fock_moments(w_on)
w_cm = willie_cm(sc, 0.05, 0.3)
m_err = float(np.abs(mean).max())
c_err = float(np.abs(cov - w_cm.matrix).max())
check("willie first moments ~ 0 (1e-8)", m_err < 1e-8, f"{m_err:.2e}")
check("willie CM match (1e-6)", c_err < 1e-6, f"{c_err:.2e}")

# purity
spec = symplectic_spectrum(w_cm)
g_pur = float(np.prod(1.0 / (2.0 * spec.eigenvalues)))
f_pur = fock_purity(w_on)
check("willie purity match (1e-6)", abs(f_pur - g_pur) < 1e-6, f"fock {f_pur!r} gauss {g_pur!r}")

# trivial: nbar_s=0, eta=1 -> product of bath thermals
sc_id = SensingScenario(1.0, 1.0, 0.8, 0.6)
w_id = oracle_willie_state(sc_id, 0.0, 0.7)
prod = fock_tensor(
    thermal_fock(0.6, w_id.cutoff),
    thermal_fock(0.8, w_id.cutoff),
)
# agreement up to the truncation corner (total > cutoff), which the evolved
# state zeroes but the raw product does not
err_id = float(np.abs(w_id.entries - prod.entries).max())
check("identity channel -> bath product", err_id < 1e-10, f"{err_id:.2e}")

# --- 3. oracle_qre ---------------------------------------------------------
w_off = oracle_willie_state(sc, 0.0, 0.3, w_on.cutoff)
d_self = oracle_qre(w_on, w_on)
check("D(rho,rho) = 0 (1e-10)", abs(d_self) < 1e-10, f"{d_self:.2e}")

vac33 = thermal_fock(0.0, 33)
th1 = thermal_fock(1.0, 33)
d_vt = oracle_qre(vac33, th1)
check("D(vac, th(1)) = ln2", abs(d_vt - math.log(2.0)) < 1e-9, f"{d_vt!r} vs {math.log(2.0)!r}")
# two-mode version: 2 ln 2 (cutoff 34 keeps the combined tail under 1e-10)
vac34, th1b = thermal_fock(0.0, 34), thermal_fock(1.0, 34)
d_vt2 = oracle_qre(fock_tensor(vac34, vac34), fock_tensor(th1b, th1b))
check("D(vac2, th(1)^2) = 2 ln2", abs(d_vt2 - 2 * math.log(2.0)) < 1e-8, f"{d_vt2!r}")

d_fock = oracle_qre(w_off, w_on)
d_gauss = willie_qre(sc, 0.05, 0.3)
check(
    "QRE cross-module (1e-4)",
    abs(d_fock - d_gauss) < 1e-4,
    f"fock {d_fock!r} gauss {d_gauss!r} diff {abs(d_fock-d_gauss):.2e}",
)

# infinite QRE: thermal vs vacuum (support violation)
try:
    oracle_qre(th1, vac33)
    check("InfiniteQre raised", False)
except InfiniteQreError:
    check("InfiniteQre raised", True)

# --- 4. oracle_fidelity ----------------------------------------------------
f_self = oracle_fidelity(w_on, w_on)
check("F(rho,rho) = 1 (1e-10)", abs(f_self - 1.0) < 1e-10, f"{f_self!r}")

f_vt = oracle_fidelity(fock_tensor(vac33, vac33), fock_tensor(th1, vac33))
check("F(vac2, th1(x)vac) = sqrt(1/2)", abs(f_vt - math.sqrt(0.5)) < 1e-9, f"{f_vt!r}")

# symmetry
sc_asym = SensingScenario(0.6, 0.7, 0.3, 0.2)
wa = oracle_willie_state(sc_asym, 0.04, 0.2)
wb = oracle_willie_state(sc_asym, 0.09, -0.5, wa.cutoff)
f_ab = oracle_fidelity(wa, wb)
f_ba = oracle_fidelity(wb, wa)
check("fidelity symmetric (1e-8)", abs(f_ab - f_ba) < 1e-8, f"{abs(f_ab-f_ba):.2e}")

# --- 5. oracle_alice_state -------------------------------------------------
sc_small = SensingScenario(0.7, 0.8, 0.15, 0.25)
probe = ProbeSettings(nbar_s=0.05, nbar_lo=0.2, theta=0.4)
t0 = time.time()
a_state = oracle_alice_state(sc_small, probe)
t1 = time.time()
print(f"alice oracle: cutoff={a_state.cutoff}, {t1-t0:.2f}s, trace={a_state.trace()!r}")
a_mean, a_cov = fock_moments(a_state)
a_cm = alice_cm(sc_small, probe)
am_err = float(np.abs(a_mean).max())
ac_err = float(np.abs(a_cov - a_cm.matrix).max())
check("alice first moments ~ 0 (1e-8)", am_err < 1e-8, f"{am_err:.2e}")
check("alice CM match (1e-6)", ac_err < 1e-6, f"{ac_err:.2e}")

probe_b = ProbeSettings(nbar_s=0.05, nbar_lo=0.2, theta=0.5)
a_state_b = oracle_alice_state(sc_small, probe_b, a_state.cutoff)
f_fock = oracle_fidelity(a_state, a_state_b)
f_gauss = gaussian_fidelity(a_cm, alice_cm(sc_small, probe_b))
check(
    "fidelity cross-module (1e-5)",
    abs(f_fock - f_gauss) < 1e-5,
    f"fock {f_fock!r} gauss {f_gauss!r} diff {abs(f_fock-f_gauss):.2e}",
)

# --- 6. cross-check helper at the acceptance operating point ---------------
t0 = time.time()
report = oracle_cross_check(SensingScenario(0.6, 0.75, 0.2, 0.3), 0.05, 0.25, 0.3)
t1 = time.time()
print(f"cross-check ({t1-t0:.2f}s): " + ", ".join(f"{k}={v:.3e}" for k, v in report.items()))
check("cross-check willie CM", report["willie_cm_max_err"] < 1e-6)
check("cross-check willie QRE", report["willie_qre_err"] < 1e-4)
check("cross-check alice CM", report["alice_cm_max_err"] < 1e-6)
check("cross-check alice fidelity", report["alice_fidelity_err"] < 1e-5)
check("cross-check purity", report["willie_purity_err"] < 1e-6)

print("\nALL OK" if ok else "\nFAILURES PRESENT")
sys.exit(0 if ok else 1)
