"""Gaussian-state covariance matrices and symplectic spectra.

Conventions used throughout this package:

* hbar = 1; the vacuum covariance matrix is I/2 (quadrature variance 1/2).
* An N-mode covariance matrix (CM) is a real symmetric 2N x 2N array in
  qqpp ordering: the quadrature vector is (q_1, ..., q_N, p_1, ..., p_N).
* The symplectic form is Omega = [[0, I], [-I, 0]] in that ordering, and a
  matrix S is symplectic when S Omega S^T = Omega.
* All states are zero-mean; first moments are never tracked.

A CM V is physical iff V + i*Omega/2 >= 0, equivalently iff all symplectic
eigenvalues are >= 1/2.  Symplectic eigenvalues u_k are the moduli of the
eigenvalues of i*Omega*V and come in degenerate pairs.

Two-mode CMs produced by a phase-rotated sensing interaction have the form

    [[ v11, -v12*cos(t),  0,          v12*sin(t)],
     [-v12*cos(t),  v22, -v12*sin(t), 0         ],
     [ 0,  -v12*sin(t),  v11,        -v12*cos(t)],
     [ v12*sin(t), 0,   -v12*cos(t),  v22       ]]

for which the normal form is available in closed form; ``symplectic_spectrum``
detects that structure and uses it, falling back to a general Williamson
construction otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import NumericalInstabilityError, PhysicalityError

__all__ = [
    "CovarianceMatrix",
    "SymplecticSpectrum",
    "symplectic_form",
    "vacuum_cm",
    "thermal_cm",
    "ase_two_mode_cm",
    "tensor",
    "reduced",
    "apply_symplectic",
    "apply_beam_splitter",
    "apply_phase",
    "apply_thermal_channel",
    "beam_splitter_symplectic",
    "phase_symplectic",
    "symplectic_eigenvalues",
    "symplectic_spectrum",
]


def symplectic_form(num_modes: int) -> np.ndarray:
    """Return the 2N x 2N symplectic form Omega in qqpp ordering."""
    eye = np.eye(num_modes)
    zero = np.zeros((num_modes, num_modes))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True)
class CovarianceMatrix:
    """A validated, symmetrised N-mode covariance matrix (qqpp, hbar = 1).

    Construction symmetrises the input as (V + V^T)/2 and rejects inputs
    whose asymmetry exceeds ``symmetry_tol`` relative to the largest entry.
    """

    matrix: np.ndarray
    num_modes: int

    @classmethod
    def from_array(
        cls, array: np.ndarray, *, symmetry_tol: float = 1e-12
    ) -> "CovarianceMatrix":
        arr = np.asarray(array, dtype=float)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1] or arr.shape[0] % 2:
            raise ValueError(f"covariance matrix must be 2N x 2N, got {arr.shape}")
        scale = max(1.0, float(np.abs(arr).max()))
        asym = float(np.abs(arr - arr.T).max())
        if asym > 2.0 * symmetry_tol * scale:
            raise ValueError(
                f"matrix asymmetry {asym:.3e} exceeds tolerance "
                f"{symmetry_tol:.1e} (relative to scale {scale:.3e})"
            )
        sym = (arr + arr.T) / 2.0
        sym.flags.writeable = False
        return cls(matrix=sym, num_modes=arr.shape[0] // 2)

    def symplectic_eigenvalues(self) -> np.ndarray:
        """Symplectic eigenvalues, one per mode, descending."""
        return symplectic_eigenvalues(self)

    def is_physical(self, atol: float = 1e-10) -> bool:
        """True when every symplectic eigenvalue is >= 1/2 - atol."""
        try:
            nu = self.symplectic_eigenvalues()
        except NumericalInstabilityError:
            return False
        return bool(nu.min() >= 0.5 - atol)

    def require_physical(self, atol: float = 1e-10) -> "CovarianceMatrix":
        """Return self, raising :class:`PhysicalityError` if unphysical."""
        if not self.is_physical(atol=atol):
            raise PhysicalityError(
                f"covariance matrix is unphysical: min symplectic eigenvalue "
                f"{self.symplectic_eigenvalues().min():.6e} < 1/2 - {atol:g}"
            )
        return self


def vacuum_cm(num_modes: int) -> CovarianceMatrix:
    """Vacuum state of ``num_modes`` modes: V = I/2."""
    if num_modes < 1:
        raise ValueError("need at least one mode")
    return CovarianceMatrix.from_array(np.eye(2 * num_modes) / 2.0)


def thermal_cm(occupancies: Sequence[float]) -> CovarianceMatrix:
    """Product of thermal states with the given mean photon numbers.

    A thermal state with occupancy ``n`` has variance ``n + 1/2`` in both
    quadratures; occupancy 0 is the vacuum.
    """
    occ = np.asarray(list(occupancies), dtype=float)
    if occ.size == 0:
        raise ValueError("need at least one mode")
    if (occ < 0).any():
        raise ValueError("thermal occupancies must be non-negative")
    diag = np.concatenate([occ + 0.5, occ + 0.5])
    return CovarianceMatrix.from_array(np.diag(diag))


def ase_two_mode_cm(nbar_s: float, nbar_lo: float) -> CovarianceMatrix:
    """Two-mode source: a split thermal beam (signal + local oscillator).

    One thermal beam of total occupancy ``nbar_s + nbar_lo`` divided on a
    beam splitter so that the signal mode carries ``nbar_s`` photons and the
    retained reference carries ``nbar_lo``, with positive q-q and p-p
    cross-correlation sqrt(nbar_s * nbar_lo).  Modes are ordered
    (signal, reference).
    """
    if nbar_s < 0 or nbar_lo < 0:
        raise ValueError("occupancies must be non-negative")
    cross = math.sqrt(nbar_s * nbar_lo)
    a = np.array(
        [
            [nbar_s + 0.5, cross],
            [cross, nbar_lo + 0.5],
        ]
    )
    v = np.block([[a, np.zeros((2, 2))], [np.zeros((2, 2)), a]])
    return CovarianceMatrix.from_array(v)


def tensor(cm_a: CovarianceMatrix, cm_b: CovarianceMatrix) -> CovarianceMatrix:
    """Direct sum of two CMs (modes of ``cm_a`` first)."""
    na, nb = cm_a.num_modes, cm_b.num_modes
    n = na + nb
    out = np.zeros((2 * n, 2 * n))
    a, b = cm_a.matrix, cm_b.matrix
    # q block, p block and q-p cross blocks of each input land in the
    # corresponding qqpp slots of the joint matrix.
    sa = np.r_[0:na, n : n + na]
    sb = np.r_[na:n, n + na : 2 * n]
    out[np.ix_(sa, sa)] = a
    out[np.ix_(sb, sb)] = b
    return CovarianceMatrix.from_array(out)


def reduced(cm: CovarianceMatrix, modes: Sequence[int]) -> CovarianceMatrix:
    """Reduced state of the listed modes (in the listed order)."""
    modes = list(modes)
    n = cm.num_modes
    if any(m < 0 or m >= n for m in modes):
        raise ValueError(f"mode index out of range for {n}-mode state")
    idx = np.array(modes + [m + n for m in modes])
    return CovarianceMatrix.from_array(cm.matrix[np.ix_(idx, idx)])


def apply_symplectic(cm: CovarianceMatrix, s: np.ndarray) -> CovarianceMatrix:
    """Return the CM of the state after the symplectic transformation ``s``."""
    return CovarianceMatrix.from_array(s @ cm.matrix @ s.T)


def beam_splitter_symplectic(num_modes: int, i: int, j: int, eta: float) -> np.ndarray:
    """Symplectic matrix of a beam splitter of transmissivity ``eta``.

    Acts on modes (i, j) as  q_i' =  sqrt(eta) q_i + sqrt(1-eta) q_j,
                             q_j' = -sqrt(1-eta) q_i + sqrt(eta) q_j,
    identically on p.  Mode ``j`` is the transmitted-with-eta port.
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("beam-splitter transmissivity must lie in [0, 1]")
    if i == j:
        raise ValueError("beam splitter needs two distinct modes")
    t, r = math.sqrt(eta), math.sqrt(1.0 - eta)
    s = np.eye(2 * num_modes)
    for a, b in ((i, j), (num_modes + i, num_modes + j)):
        s[a, a] = t
        s[a, b] = r
        s[b, a] = -r
        s[b, b] = t
    return s


def phase_symplectic(num_modes: int, i: int, theta: float) -> np.ndarray:
    """Symplectic matrix of a phase rotation by ``theta`` on mode ``i``.

    Convention: q_i' = cos(theta) q_i - sin(theta) p_i,
                p_i' = sin(theta) q_i + cos(theta) p_i
    (i.e. the annihilation operator picks up exp(i*theta)).
    """
    c, s_ = math.cos(theta), math.sin(theta)
    s = np.eye(2 * num_modes)
    s[i, i] = c
    s[i, num_modes + i] = -s_
    s[num_modes + i, i] = s_
    s[num_modes + i, num_modes + i] = c
    return s


def apply_beam_splitter(
    cm: CovarianceMatrix, i: int, j: int, eta: float
) -> CovarianceMatrix:
    """Mix modes (i, j) of ``cm`` on a beam splitter of transmissivity eta."""
    s = beam_splitter_symplectic(cm.num_modes, i, j, eta)
    return apply_symplectic(cm, s)


def apply_phase(cm: CovarianceMatrix, i: int, theta: float) -> CovarianceMatrix:
    """Rotate mode ``i`` of ``cm`` by phase ``theta``."""
    s = phase_symplectic(cm.num_modes, i, theta)
    return apply_symplectic(cm, s)


def apply_thermal_channel(
    cm: CovarianceMatrix, i: int, eta: float, nbar_b: float
) -> CovarianceMatrix:
    """Thermal-loss channel on mode ``i``: transmissivity eta, bath occupancy nbar_b.

    V -> X V X^T + Y with X = sqrt(eta) on mode i (identity elsewhere) and
    Y = (1 - eta)(nbar_b + 1/2) I_2 on mode i.  Cross-correlations between
    mode i and the rest scale by sqrt(eta).
    """
    if not 0.0 <= eta <= 1.0:
        raise ValueError("channel transmissivity must lie in [0, 1]")
    if nbar_b < 0:
        raise ValueError("bath occupancy must be non-negative")
    n = cm.num_modes
    x = np.eye(2 * n)
    x[i, i] = x[n + i, n + i] = math.sqrt(eta)
    v = x @ cm.matrix @ x.T
    add = (1.0 - eta) * (nbar_b + 0.5)
    v[i, i] += add
    v[n + i, n + i] += add
    return CovarianceMatrix.from_array(v)


def symplectic_eigenvalues(
    cm: CovarianceMatrix, *, pair_tol: float = 1e-8
) -> np.ndarray:
    """Symplectic eigenvalues of a CM, descending, one per mode.

    Computed as the moduli of the eigenvalues of i*Omega*V, which come in
    degenerate pairs; a pairing mismatch beyond ``pair_tol`` (relative)
    raises :class:`NumericalInstabilityError`.
    """
    v = cm.matrix
    omega = symplectic_form(cm.num_modes)
    ev = np.linalg.eigvals(1j * omega @ v)
    mods = np.sort(np.abs(ev))[::-1]
    hi, lo = mods[0::2], mods[1::2]
    scale = max(mods[0], 1.0)
    if np.abs(hi - lo).max() > pair_tol * scale:
        raise NumericalInstabilityError(
            "symplectic eigenvalues failed to pair within tolerance: "
            f"{mods!r}"
        )
    return (hi + lo) / 2.0


@dataclass(frozen=True)
class SymplecticSpectrum:
    """Normal-form data of a covariance matrix V1.

    Attributes
    ----------
    eigenvalues:
        Symplectic eigenvalues u_k of V1, descending, one per mode.
    eigenvector_matrix:
        Symplectic M with M Omega M^T = Omega and
        M V1 M^T = diag(u_1..u_N, u_1..u_N).
    mixing:
        For the structured two-mode sensing family, the closed-form mixing
        parameter tau in [0, 1] of the diagonalising rotation; None when the
        general-purpose path was used.
    relative_diagonal:
        When a reference CM V0 was supplied: d_k, the per-mode second moments
        of the reference state expressed in V1's normal modes, i.e. the
        q/p-averaged diagonal of M V0 M^T.  Equals ``eigenvalues`` of V0 when
        V0 = V1.  None when no reference was supplied.
    """

    eigenvalues: np.ndarray
    eigenvector_matrix: np.ndarray
    mixing: float | None
    relative_diagonal: np.ndarray | None


def _rotation_pair(num_modes: int, phis: Sequence[float]) -> np.ndarray:
    """Phase rotation of every mode k by phis[k] (qqpp ordering)."""
    c = np.cos(phis)
    s = np.sin(phis)
    top = np.block([[np.diag(c), -np.diag(s)]])
    bot = np.block([[np.diag(s), np.diag(c)]])
    return np.vstack([top, bot])


def _sensing_pattern_params(
    v: np.ndarray, tol: float
) -> tuple[float, float, float, float] | None:
    """Detect the structured sensing form; return (v11, v22, v12, theta) or None.

    The returned v12 is gauge-normalised to be >= 0 (the (v12, theta) and
    (-v12, theta + pi) parameterisations describe the same matrix).
    """
    if v.shape != (4, 4):
        return None
    scale = max(1.0, float(np.abs(v).max()))
    checks = (
        abs(v[0, 2]),
        abs(v[1, 3]),
        abs(v[0, 0] - v[2, 2]),
        abs(v[1, 1] - v[3, 3]),
        abs(v[0, 1] - v[2, 3]),
        abs(v[0, 3] + v[1, 2]),
    )
    if max(checks) > tol * scale:
        return None
    v11 = (v[0, 0] + v[2, 2]) / 2.0
    v22 = (v[1, 1] + v[3, 3]) / 2.0
    cos_part = -(v[0, 1] + v[2, 3]) / 2.0
    sin_part = (v[0, 3] - v[1, 2]) / 2.0
    v12 = math.hypot(cos_part, sin_part)
    theta = math.atan2(sin_part, cos_part) if v12 > 0.0 else 0.0
    return v11, v22, v12, theta


def _structured_normal_form(
    v11: float, v22: float, v12: float, theta: float, *, deg_tol: float = 1e-12
) -> tuple[np.ndarray, np.ndarray, float]:
    """Closed-form normal form of the structured two-mode family.

    Returns (u, M, tau) with u descending.  For rho = hypot(2*v12, v11-v22):
    u_{1,2} = (v11 + v22 +- rho)/2,   tau = 1/2 + (v11 - v22)/(2 rho),
    and M = diag(g, g) @ R(-theta/2, +theta/2) where the symmetric orthogonal
    g = [[-sqrt(tau), sqrt(1-tau)], [sqrt(1-tau), sqrt(tau)]] diagonalises the
    rotated 2x2 block (valid for the v12 >= 0 gauge).
    """
    dw = v11 - v22
    rho = math.hypot(2.0 * v12, dw)
    scale = max(abs(v11), abs(v22), 1.0)
    if rho <= deg_tol * scale:
        # Fully degenerate: any rotation diagonalises; fix the gauge.
        u = np.array([(v11 + v22) / 2.0] * 2)
        m = _rotation_pair(2, [theta / 2.0 + math.pi, -theta / 2.0])
        return u, m, 0.5
    u1 = (v11 + v22 + rho) / 2.0
    u2 = (v11 + v22 - rho) / 2.0
    tau = 0.5 + dw / (2.0 * rho)
    tau = min(1.0, max(0.0, tau))
    st, ct = math.sqrt(tau), math.sqrt(1.0 - tau)
    g = np.array([[-st, ct], [ct, st]])
    gg = np.zeros((4, 4))
    gg[:2, :2] = g
    gg[2:, 2:] = g
    m = gg @ _rotation_pair(2, [-theta / 2.0, theta / 2.0])
    return np.array([u1, u2]), m, tau


def _generic_normal_form(v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Williamson normal form of an arbitrary physical CM (qqpp).

    Returns (u, M) with u descending and M V M^T = diag(u, u),
    M Omega M^T = Omega.  Uses the real Schur form of V^{-1/2} Omega V^{-1/2}.
    """
    n2 = v.shape[0]
    n = n2 // 2
    w, q = np.linalg.eigh(v)
    if w.min() <= 0.0:
        raise PhysicalityError(
            f"covariance matrix is not positive definite (min eig {w.min():.3e})"
        )
    v_mh = (q * (w**-0.5)) @ q.T
    omega = symplectic_form(n)
    a = v_mh @ omega @ v_mh
    a = (a - a.T) / 2.0  # enforce antisymmetry against roundoff
    t, z = scipy.linalg.schur(a, output="real")

    # Each 2x2 diagonal block of t is [[0, b], [-b, 0]] with |b| = 1/u.
    b_vals = np.array([t[2 * k, 2 * k + 1] for k in range(n)])
    if np.any(b_vals == 0.0):
        raise NumericalInstabilityError("Schur form produced a zero block")
    # Flip blocks with negative b by swapping their two Schur vectors.
    for k in range(n):
        if b_vals[k] < 0.0:
            z[:, [2 * k, 2 * k + 1]] = z[:, [2 * k + 1, 2 * k]]
            b_vals[k] = -b_vals[k]
    u = 1.0 / b_vals
    # Order modes by descending u.
    order = np.argsort(-u)
    u = u[order]
    cols = np.concatenate([[2 * k, 2 * k + 1] for k in order])
    z = z[:, cols]

    d_half = np.repeat(np.sqrt(u), 2)
    m_inter = (d_half[:, None] * z.T) @ v_mh
    # Reorder rows from interleaved (q1, p1, q2, p2, ...) to qqpp.
    perm = np.concatenate([np.arange(0, n2, 2), np.arange(1, n2, 2)])
    m = m_inter[perm, :]
    return u, m


def symplectic_spectrum(
    cm: CovarianceMatrix,
    reference: CovarianceMatrix | None = None,
    *,
    structure_tol: float = 1e-10,
    check_tol: float = 1e-8,
) -> SymplecticSpectrum:
    """Normal form of ``cm``, optionally with a reference state's moments.

    Uses the closed-form construction when ``cm`` is a structured two-mode
    sensing CM (detected at ``structure_tol``), the general Williamson
    construction otherwise.  The result is self-checked: M must be symplectic
    and M V M^T diagonal to ``check_tol`` (relative), else
    :class:`NumericalInstabilityError` is raised.
    """
    v = cm.matrix
    n = cm.num_modes
    params = _sensing_pattern_params(v, structure_tol)
    if params is not None:
        u, m, tau = _structured_normal_form(*params)
        mixing: float | None = tau
    else:
        u, m = _generic_normal_form(v)
        mixing = None

    omega = symplectic_form(n)
    sym_err = float(np.abs(m @ omega @ m.T - omega).max())
    d = m @ v @ m.T
    diag_target = np.concatenate([u, u])
    diag_err = float(np.abs(d - np.diag(diag_target)).max())
    scale = max(1.0, float(np.abs(v).max()))
    if sym_err > check_tol or diag_err > check_tol * scale:
        raise NumericalInstabilityError(
            f"normal form failed self-check: symplecticity residual {sym_err:.3e}, "
            f"diagonalisation residual {diag_err:.3e}"
        )

    rel: np.ndarray | None = None
    if reference is not None:
        if reference.num_modes != n:
            raise ValueError("reference state must have the same number of modes")
        full = np.diag(m @ reference.matrix @ m.T)
        rel = (full[:n] + full[n:]) / 2.0
    return SymplecticSpectrum(
        eigenvalues=u, eigenvector_matrix=m, mixing=mixing, relative_diagonal=rel
    )
