"""Gaussian covariance-matrix formalism.

Serves as an independent check on the Fock simulator for Gaussian inputs.
Conventions are those of :mod:`heraldgen.constants`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .constants import EIGEN_SLACK, SYMPLECTIC_TOL
from .errors import DecompositionError, DimensionError, TruncationError, ValidationError
from .fock import MultiModeState


def symplectic_form(n_modes: int) -> np.ndarray:
    """``Omega_ij = delta_{i,j-1} - delta_{i,j+1}`` in (q1, p1, q2, p2, ...) order."""
    return np.kron(np.eye(n_modes), np.array([[0.0, 1.0], [-1.0, 0.0]]))


@dataclass(frozen=True, eq=False)
class GaussianState:
    xi: np.ndarray
    V: np.ndarray

    def __post_init__(self):
        xi = np.array(self.xi, dtype=np.float64)
        V = np.array(self.V, dtype=np.float64)
        if V.ndim != 2 or V.shape[0] != V.shape[1] or V.shape[0] % 2:
            raise DimensionError(f"covariance must be 2N x 2N, got {V.shape}")
        if xi.shape != (V.shape[0],):
            raise DimensionError("displacement length must match the covariance")
        if np.max(np.abs(V - V.T)) > 1e-12:
            raise ValidationError("covariance matrix is not symmetric")
        n = V.shape[0] // 2
        # vacuum variance 1/2 puts the bound at V + (i/2) Omega >= 0
        eig = np.linalg.eigvalsh(V + 0.5j * symplectic_form(n))
        if eig.min() < -EIGEN_SLACK:
            raise ValidationError(f"V + i Omega/2 has eigenvalue {eig.min():.3e} < 0")
        xi.setflags(write=False)
        V.setflags(write=False)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "V", V)

    @property
    def mode_count(self) -> int:
        return self.V.shape[0] // 2

    def purity_indicator(self) -> float:
        """``det(2V)``, equal to 1 for pure states."""
        return float(np.linalg.det(2.0 * self.V))


def vacuum(n_modes: int) -> GaussianState:
    return GaussianState(np.zeros(2 * n_modes), 0.5 * np.eye(2 * n_modes))


@dataclass(frozen=True, eq=False)
class SymplecticMatrix:
    F: np.ndarray
    d: np.ndarray = None

    def __post_init__(self):
        F = np.array(self.F, dtype=np.float64)
        if F.ndim != 2 or F.shape[0] != F.shape[1] or F.shape[0] % 2:
            raise DimensionError(f"symplectic matrix must be 2N x 2N, got {F.shape}")
        d = np.zeros(F.shape[0]) if self.d is None else np.array(self.d, dtype=np.float64)
        if d.shape != (F.shape[0],):
            raise DimensionError("displacement length must match F")
        om = symplectic_form(F.shape[0] // 2)
        defect = np.linalg.norm(F @ om @ F.T - om)
        if defect > SYMPLECTIC_TOL:
            raise ValidationError(f"F Omega F^T != Omega (defect {defect:.2e})")
        F.setflags(write=False)
        d.setflags(write=False)
        object.__setattr__(self, "F", F)
        object.__setattr__(self, "d", d)

    @property
    def mode_count(self) -> int:
        return self.F.shape[0] // 2

    def __matmul__(self, other: SymplecticMatrix) -> SymplecticMatrix:
        """Composition: apply ``other`` first, then ``self``."""
        return SymplecticMatrix(self.F @ other.F, self.F @ other.d + self.d)


def gaussian_wigner(state: GaussianState, x) -> float:
    """Wigner function of a Gaussian state at phase-space point(s) ``x``.

    ``x`` has shape ``(..., 2N)``. Normalized to one over phase space.
    """
    x = np.asarray(x, dtype=np.float64)
    n = state.mode_count
    if x.shape[-1] != 2 * n:
        raise DimensionError(f"point must have length {2 * n}")
    det = np.linalg.det(state.V)
    if not det > 0:
        raise DecompositionError("covariance matrix is singular")
    try:
        Vinv = np.linalg.inv(state.V)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(str(exc)) from exc
    dx = x - state.xi
    quad = np.einsum("...i,ij,...j->...", dx, Vinv, dx)
    return np.exp(-0.5 * quad) / ((2 * math.pi) ** n * math.sqrt(det))


def symplectic_apply(state: GaussianState, S: SymplecticMatrix) -> GaussianState:
    """``V -> F V F^T`` and ``xi -> F xi + d``."""
    if S.mode_count != state.mode_count:
        raise DimensionError("symplectic matrix and state act on different mode counts")
    V = S.F @ state.V @ S.F.T
    return GaussianState(S.F @ state.xi + S.d, 0.5 * (V + V.T))


def squeezer_symplectic(r: float) -> SymplecticMatrix:
    """Single-mode squeezer; ``r > 0`` shrinks the q variance."""
    return SymplecticMatrix(np.diag([math.exp(-r), math.exp(r)]))


def phase_symplectic(phi: float) -> SymplecticMatrix:
    """Rotation ``a -> e^{i phi} a``."""
    return passive_symplectic(np.array([[np.exp(1j * phi)]]))


def displacement_symplectic(d: complex) -> SymplecticMatrix:
    d = complex(d)
    return SymplecticMatrix(np.eye(2), math.sqrt(2.0) * np.array([d.real, d.imag]))


def passive_symplectic(W) -> SymplecticMatrix:
    """Symplectic matrix of the mode map ``a_k -> sum_j W_kj a_j``."""
    W = np.asarray(W, dtype=np.complex128)
    n = W.shape[0]
    F = np.zeros((2 * n, 2 * n))
    for k in range(n):
        for j in range(n):
            w = W[k, j]
            F[2 * k:2 * k + 2, 2 * j:2 * j + 2] = [[w.real, -w.imag], [w.imag, w.real]]
    return SymplecticMatrix(F)


def beamsplitter_unitary(theta: float, phi: float) -> np.ndarray:
    """Single-particle 2x2 unitary of the beam splitter.

    Column ``j`` is the image of ``a_j^dag``, so ``|1,0>`` goes to
    ``cos(theta)|1,0> - e^{-i phi} sin(theta)|0,1>``.
    """
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, np.exp(1j * phi) * s], [-np.exp(-1j * phi) * s, c]])


def beamsplitter_symplectic(theta: float, phi: float) -> SymplecticMatrix:
    return passive_symplectic(beamsplitter_unitary(theta, phi))


def embed(S: SymplecticMatrix, modes, n_modes: int) -> SymplecticMatrix:
    """Lift a k-mode symplectic map to act on ``modes`` of an N-mode system."""
    idx = np.concatenate([[2 * m, 2 * m + 1] for m in modes])
    F = np.eye(2 * n_modes)
    F[np.ix_(idx, idx)] = S.F
    d = np.zeros(2 * n_modes)
    d[idx] = S.d
    return SymplecticMatrix(F, d)


@dataclass(frozen=True, eq=False)
class MomentRecord:
    """First and symmetrized second quadrature moments of an arbitrary state."""

    xi: np.ndarray
    V: np.ndarray

    @property
    def mode_count(self) -> int:
        return self.V.shape[0] // 2


def _lower(psi, mode):
    """Truncated annihilation operator on one axis of the amplitude tensor."""
    D = psi.shape[mode]
    sq = np.sqrt(np.arange(1, D))
    shape = [1] * psi.ndim
    shape[mode] = D - 1
    out = np.zeros_like(psi)
    src = [slice(None)] * psi.ndim
    dst = [slice(None)] * psi.ndim
    src[mode] = slice(1, None)
    dst[mode] = slice(0, D - 1)
    out[tuple(dst)] = psi[tuple(src)] * sq.reshape(shape)
    return out


def moments_from_fock(state: MultiModeState, max_deficit: float = 1e-6) -> MomentRecord:
    """Quadrature means and covariance computed directly from Fock amplitudes."""
    psi = state.amplitudes
    deficit = 1.0 - state.norm_squared
    if deficit > max_deficit:
        raise TruncationError(f"norm deficit {deficit:.3e} exceeds {max_deficit:.1e}")
    psi = psi / math.sqrt(state.norm_squared)
    n = state.mode_count
    lowered = [_lower(psi, k) for k in range(n)]
    a = np.array([np.vdot(psi, lk) for lk in lowered])
    aa = np.array([[np.vdot(psi, _lower(lowered[j], i)) for j in range(n)] for i in range(n)])
    ada = np.array([[np.vdot(lowered[i], lowered[j]) for j in range(n)] for i in range(n)])
    xi = np.zeros(2 * n)
    xi[0::2] = math.sqrt(2.0) * a.real
    xi[1::2] = math.sqrt(2.0) * a.imag
    # symmetrized <x_i x_j> from <a_i a_j>, <a_i^dag a_j> and [a_i, a_j^dag] = delta_ij
    sym = ada + ada.T + np.eye(n)
    V = np.zeros((2 * n, 2 * n))
    for i in range(n):
        for j in range(n):
            A = aa[i, j]
            N = sym[i, j]
            qq = 0.5 * (A + A.conjugate() + N).real
            pp = 0.5 * (-(A + A.conjugate()) + N).real
            qp = (-0.5j * (A - A.conjugate() + ada[i, j] - ada[j, i])).real
            V[2 * i, 2 * j] = qq - xi[2 * i] * xi[2 * j]
            V[2 * i + 1, 2 * j + 1] = pp - xi[2 * i + 1] * xi[2 * j + 1]
            V[2 * i, 2 * j + 1] = qp - xi[2 * i] * xi[2 * j + 1]
    for i in range(n):
        for j in range(n):
            V[2 * j + 1, 2 * i] = V[2 * i, 2 * j + 1]
    return MomentRecord(xi, 0.5 * (V + V.T))
