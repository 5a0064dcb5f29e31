"""Dev scratch: verify gaussian.py normal forms against brute force."""
import numpy as np
from covertsense import gaussian as g

rng = np.random.default_rng(7)


def structured_cm(v11, v22, v12, th):
    c, s = np.cos(th), np.sin(th)
    return g.CovarianceMatrix.from_array(np.array([
        [v11, -v12 * c, 0, v12 * s],
        [-v12 * c, v22, -v12 * s, 0],
        [0, -v12 * s, v11, -v12 * c],
        [v12 * s, 0, -v12 * c, v22],
    ]))


# 1. structured path: random draws, check M properties + u vs eigvals route
Om = g.symplectic_form(2)
worst_sym = worst_diag = worst_u = 0.0
n_deg = 0
for _ in range(3000):
    v11 = rng.uniform(0.51, 20.0)
    v22 = rng.uniform(0.51, 20.0)
    # physicality: u2 >= 1/2  <=>  (v11-1/2)(v22-1/2) >= v12^2  (check below)
    v12max = np.sqrt((v11 - 0.5) * (v22 - 0.5))
    v12 = rng.uniform(-0.999 * v12max, 0.999 * v12max)
    th = rng.uniform(-np.pi, np.pi)
    cm = structured_cm(v11, v22, v12, th)
    assert cm.is_physical(), (v11, v22, v12)
    sp = g.symplectic_spectrum(cm)
    assert sp.mixing is not None  # structured path taken
    M = sp.eigenvector_matrix
    worst_sym = max(worst_sym, np.abs(M @ Om @ M.T - Om).max())
    D = M @ cm.matrix @ M.T
    tgt = np.diag(np.concatenate([sp.eigenvalues, sp.eigenvalues]))
    worst_diag = max(worst_diag, np.abs(D - tgt).max())
    u_brute = cm.symplectic_eigenvalues()
    worst_u = max(worst_u, np.abs(np.sort(u_brute) - np.sort(sp.eigenvalues)).max())
print(f"structured: sym {worst_sym:.2e} diag {worst_diag:.2e} u-vs-brute {worst_u:.2e}")

# physicality bound check: u2 closed form
# u2 = (v11+v22-rho)/2 >= 1/2  <=> (v11-0.5)(v22-0.5) >= v12^2 -- verify once
for _ in range(200):
    v11, v22 = rng.uniform(0.5, 5, 2)
    v12 = np.sqrt(max((v11 - 0.5) * (v22 - 0.5), 0)) * rng.uniform(-1.2, 1.2)
    rho = np.hypot(2 * v12, v11 - v22)
    u2 = (v11 + v22 - rho) / 2
    lhs = (v11 - 0.5) * (v22 - 0.5) >= v12**2
    assert lhs == (u2 >= 0.5 - 1e-12), (v11, v22, v12, u2)
print("physicality criterion consistent")

# 2. degenerate structured case
cm = structured_cm(3.0, 3.0, 0.0, 0.9)
sp = g.symplectic_spectrum(cm)
assert np.allclose(sp.eigenvalues, [3.0, 3.0])
M = sp.eigenvector_matrix
assert np.abs(M @ Om @ M.T - Om).max() < 1e-12
print("degenerate structured ok, tau =", sp.mixing)

# 3. generic path on random physical CMs built from random symplectics
from scipy.stats import unitary_group, ortho_group

def rand_u(n, rng):
    if n == 1:
        return np.exp(1j * rng.uniform(0, 2 * np.pi)) * np.ones((1, 1))
    return unitary_group.rvs(n, random_state=rng)

def random_symplectic(n, rng):
    u = rand_u(n, rng)
    x, y = u.real, u.imag
    o1 = np.block([[x, -y], [y, x]])
    u = rand_u(n, rng)
    x, y = u.real, u.imag
    o2 = np.block([[x, -y], [y, x]])
    r = rng.uniform(-1.2, 1.2, n)
    sq = np.diag(np.concatenate([np.exp(r), np.exp(-r)]))
    return o1 @ sq @ o2

for n in (1, 2, 3, 4):
    worst_sym = worst_diag = worst_u = 0.0
    for _ in range(300):
        s = random_symplectic(n, rng)
        u_true = np.sort(rng.uniform(0.5, 6.0, n))[::-1]
        d = np.diag(np.concatenate([u_true, u_true]))
        v = g.CovarianceMatrix.from_array(s @ d @ s.T)
        omn = g.symplectic_form(n)
        sp = g.symplectic_spectrum(v)
        M = sp.eigenvector_matrix
        worst_sym = max(worst_sym, np.abs(M @ omn @ M.T - omn).max())
        dd = M @ v.matrix @ M.T
        tgt = np.diag(np.concatenate([sp.eigenvalues, sp.eigenvalues]))
        worst_diag = max(worst_diag, np.abs(dd - tgt).max())
        worst_u = max(worst_u, np.abs(np.sort(sp.eigenvalues) - u_true[::-1][::1].take(np.argsort(np.argsort(np.sort(sp.eigenvalues))))).max() if False else np.abs(np.sort(sp.eigenvalues) - np.sort(u_true)).max())
    print(f"generic n={n}: sym {worst_sym:.2e} diag {worst_diag:.2e} u {worst_u:.2e}")

# 4. relative diagonal sanity: d_k = u_k(V0) when V0 == V1
cm = structured_cm(2.0, 1.3, 0.4, 0.7)
sp = g.symplectic_spectrum(cm, reference=cm)
assert np.allclose(sp.relative_diagonal, sp.eigenvalues, atol=1e-12)
print("relative diagonal at V0=V1 equals eigenvalues:", sp.relative_diagonal)

# 5. known equal-bath example: scenario CM pieces checked later; here check
# the d's reproduce the known thermal-pair reduction.
eta1 = eta2 = 0.5
nb = 1.0; ns = 0.1
w11 = (1-eta2)*eta1*ns + (1-eta1)*(1-eta2)*nb + eta2*nb + 0.5
w22 = eta1*nb + (1-eta1)*ns + 0.5
w12 = np.sqrt((1-eta2)*eta1*(1-eta1))*(nb-ns)
th = 0.3
V1 = structured_cm(w11, w22, w12, th)
w11_0 = (1-eta1)*(1-eta2)*nb + eta2*nb + 0.5
w22_0 = eta1*nb + 0.5
w12_0 = np.sqrt((1-eta2)*eta1*(1-eta1))*nb
V0 = structured_cm(w11_0, w22_0, w12_0, th)
sp = g.symplectic_spectrum(V1, reference=V0)
print("u:", sp.eigenvalues, " d:", sp.relative_diagonal)
# expected from thermal-pair reduction: u = (nb+1/2, etaeff*nb+(1-etaeff)*ns+1/2)
etaeff = eta1 * eta2
print("expected u2:", etaeff*nb + (1-etaeff)*ns + 0.5, " expected u1:", nb + 0.5)

# QRE via the sigma formula
def sigma01(u, d):
    tot = 0.0
    for uk, dk in zip(u, d):
        tot += 0.5 * ((1 + 2*dk) * np.log(uk + 0.5) + (1 - 2*dk) * np.log(uk - 0.5)) if uk > 0.5 + 1e-14 else 0.0
    return tot

s00 = sigma01(g.symplectic_eigenvalues(V0), g.symplectic_eigenvalues(V0))
s01 = sigma01(sp.eigenvalues, sp.relative_diagonal)
D = -s00 + s01
print("QRE via spectra:", D, " (expect 0.0072451)")

# theta-independence
for th2 in (0.0, -1.2, 2.9):
    V1b = structured_cm(w11, w22, w12, th2)
    V0b = structured_cm(w11_0, w22_0, w12_0, th2)
    spb = g.symplectic_spectrum(V1b, reference=V0b)
    s01b = sigma01(spb.eigenvalues, spb.relative_diagonal)
    assert abs((-s00 + s01b) - D) < 1e-12, th2
print("theta-independence ok")
