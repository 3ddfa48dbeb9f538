"""Target states (cat, GKP) and their phase-space pictures."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.special import gammaln

from . import kernels
from .errors import ContractError, ParameterError, TruncationError, ValidationError
from .fock import FockVector

SQRT_PI = math.sqrt(math.pi)


# --------------------------------------------------------------------- cats

def cat_norm(alpha: complex, parity: str) -> float:
    """Normalization ``N = sqrt(2 (1 +- exp(-2|alpha|^2)))``."""
    sign = _parity_sign(parity)
    return math.sqrt(2.0 * (1.0 + sign * math.exp(-2.0 * abs(alpha) ** 2)))


def _parity_sign(parity):
    if parity in ("even", "e", "+", 1):
        return 1.0
    if parity in ("odd", "o", "-", -1):
        return -1.0
    raise ValidationError(f"unknown parity {parity!r}")


def cat_state(alpha: complex, parity: str, D: int, max_tail: float = 1e-8) -> FockVector:
    """``(|alpha> +- |-alpha>) / N`` truncated at ``D`` photons and renormalized.

    Raises ``TruncationError`` if more than ``max_tail`` of the exact norm
    lies at or above ``D``.
    """
    sign = _parity_sign(parity)
    alpha = complex(alpha)
    if alpha == 0:
        if sign < 0:
            raise ParameterError("the odd cat state does not exist at alpha = 0")
        amps = np.zeros(D, dtype=np.complex128)
        amps[0] = 1.0
        return FockVector(amps)
    n = np.arange(D)
    keep = (n % 2 == 0) if sign > 0 else (n % 2 == 1)
    logmag = -0.5 * abs(alpha) ** 2 + n * math.log(abs(alpha)) - 0.5 * gammaln(n + 1)
    amps = np.where(keep, 2.0 * np.exp(logmag) * np.exp(1j * n * np.angle(alpha)), 0.0)
    amps = amps / cat_norm(alpha, parity)
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    if tail > max_tail:
        raise TruncationError(f"cat state loses {tail:.2e} above cutoff {D} (limit {max_tail:.0e})")
    return FockVector(amps / math.sqrt(1.0 - tail), tail)


@dataclass(frozen=True, eq=False)
class WignerGrid:
    """Samples ``values[i, j] = W(q[i], p[j])`` on a rectangular grid."""

    q: np.ndarray
    p: np.ndarray
    values: np.ndarray

    def integral(self) -> float:
        return float(np.trapezoid(np.trapezoid(self.values, self.p, axis=1), self.q))

    def marginal_q(self) -> np.ndarray:
        return np.trapezoid(self.values, self.p, axis=1)

    def to_text(self) -> str:
        lines = ["# q p W"]
        for i, qi in enumerate(self.q):
            for j, pj in enumerate(self.p):
                lines.append(f"{qi:.6g} {pj:.6g} {self.values[i, j]:.6g}")
        return "\n".join(lines) + "\n"


def grid_axes(qmin=-6.0, qmax=6.0, pmin=-6.0, pmax=6.0, res=121):
    if res < 2 or qmax <= qmin or pmax <= pmin:
        raise ValidationError("grid needs res >= 2 and increasing bounds")
    return np.linspace(qmin, qmax, res), np.linspace(pmin, pmax, res)


def cat_wigner(alpha: complex, parity: str, q, p) -> WignerGrid:
    """Closed-form Wigner function of a cat state on the ``q x p`` grid.

    Phase-space point ``a = (q + i p)/sqrt(2)``; normalized in ``dq dp``.
    """
    sign = _parity_sign(parity)
    beta = complex(alpha)
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    Q, P = np.meshgrid(q, p, indexing="ij")
    a = (Q + 1j * P) / math.sqrt(2.0)
    interference = 2.0 * np.exp(-2.0 * np.abs(a) ** 2) * np.cos(4.0 * np.imag(a * np.conj(beta)))
    W = (np.exp(-2.0 * np.abs(a - beta) ** 2) + np.exp(-2.0 * np.abs(a + beta) ** 2)
         + sign * interference)
    W = W / (2.0 * math.pi * (1.0 + sign * math.exp(-2.0 * abs(beta) ** 2)))
    return WignerGrid(q, p, W)


def wigner_of_fock_state(state: FockVector, q, p, tol: float = 1e-9) -> WignerGrid:
    if not state.is_normalized(tol):
        raise ContractError("Wigner evaluation needs a normalized state")
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    Q, P = np.meshgrid(q, p, indexing="ij")
    return WignerGrid(q, p, kernels.wigner_pure(state.amplitudes, Q, P))


def wavefunction(state: FockVector, q) -> np.ndarray:
    """Position-space wavefunction ``<q|psi>``."""
    amps = state.amplitudes
    H = kernels.hermite_functions(np.asarray(q, dtype=float), amps.size - 1)
    return np.tensordot(amps, H, axes=(0, 0))


def position_density(state: FockVector, q, tol: float = 1e-9) -> np.ndarray:
    if not state.is_normalized(tol):
        raise ContractError("position density needs a normalized state")
    return np.abs(wavefunction(state, q)) ** 2


def density_to_text(q, density) -> str:
    lines = ["# q density"]
    lines += [f"{qi:.6g} {di:.6g}" for qi, di in zip(q, density)]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- GKP

def _envelope_weights(kappa, halfwidth):
    n = np.arange(-halfwidth, halfwidth + 1)
    return n, np.exp(-0.5 * kappa**2 * (2.0 * n * SQRT_PI) ** 2)


def lattice_halfwidth_for(kappa: float, tol: float = 1e-8) -> int:
    """Smallest lattice cut whose discarded envelope mass is below ``tol``."""
    L = 1
    while _discarded_mass(kappa, L) > tol:
        L += 1
        if L > 10_000:
            raise ParameterError("envelope too wide for a finite lattice cut")
    return L


def _discarded_mass(kappa, L):
    _, w_all = _envelope_weights(kappa, L + 200)
    inner = w_all[200:-200]
    return float(1.0 - np.sum(inner**2) / np.sum(w_all**2))


def gkp_wavefunction(delta: float, kappa: float, halfwidth: int, q) -> np.ndarray:
    """Unnormalized ``sum_n exp(-kappa^2 (2n sqrt(pi))^2 / 2) <q - 2n sqrt(pi)|Delta>``."""
    q = np.asarray(q, dtype=float)
    n, w = _envelope_weights(kappa, halfwidth)
    centers = 2.0 * n * SQRT_PI
    peaks = np.exp(-((q[..., None] - centers) ** 2) / (2.0 * delta**2))
    return (peaks * w).sum(axis=-1) * (math.pi * delta**2) ** -0.25


def _quadrature_grid(delta, halfwidth, D):
    reach = max(2.0 * halfwidth * SQRT_PI + 12.0 * delta, math.sqrt(2.0 * D + 1) + 10.0)
    h = min(0.05, delta / 10.0, 0.5 / math.sqrt(2.0 * D + 1))
    npts = int(math.ceil(2 * reach / h)) + 1
    return np.linspace(-reach, reach, npts)


@dataclass(frozen=True, eq=False)
class GKPApprox:
    delta: float
    kappa: float
    lattice_halfwidth: int
    state: FockVector

    @property
    def cutoff(self) -> int:
        return self.state.cutoff

    def wavefunction(self, q):
        """Exact (untruncated) normalized wavefunction."""
        return gkp_wavefunction(self.delta, self.kappa, self.lattice_halfwidth, q) / self._norm

    @property
    def _norm(self):
        x = _quadrature_grid(self.delta, self.lattice_halfwidth, 1)
        psi = gkp_wavefunction(self.delta, self.kappa, self.lattice_halfwidth, x)
        return math.sqrt(np.trapezoid(psi**2, x))


def gkp_canonical(delta: float, kappa: float, lattice_halfwidth: int | None = None,
                  D: int = 100, envelope_tol: float = 1e-8) -> GKPApprox:
    """Canonical finite-energy GKP ``|0>``: width-``delta`` peaks at ``2n sqrt(pi)``
    under a ``1/kappa`` Gaussian envelope, projected onto ``D`` Fock states.
    """
    if not (delta > 0 and kappa > 0):
        raise ParameterError("delta and kappa must be positive")
    if lattice_halfwidth is None:
        lattice_halfwidth = lattice_halfwidth_for(kappa, envelope_tol)
    elif _discarded_mass(kappa, lattice_halfwidth) > envelope_tol:
        raise ParameterError(
            f"lattice cut {lattice_halfwidth} drops more than {envelope_tol:.0e} of the envelope")
    x = _quadrature_grid(delta, lattice_halfwidth, D)
    psi = gkp_wavefunction(delta, kappa, lattice_halfwidth, x)
    norm2 = float(np.trapezoid(psi**2, x))
    H = kernels.hermite_functions(x, D - 1)
    c = np.trapezoid(H * psi, x, axis=1) / math.sqrt(norm2)
    c[1::2] = np.where(np.abs(c[1::2]) < 1e-13, 0.0, c[1::2])
    tail = max(0.0, 1.0 - float(np.sum(c**2)))
    return GKPApprox(delta, kappa, lattice_halfwidth,
                     FockVector(c / np.linalg.norm(c), tail))


@dataclass(frozen=True, eq=False)
class CoreTarget:
    """Low-photon core ``sum_{n<D_core} c_n |n>`` and the squeezing that best
    maps it onto the canonical GKP state."""

    core: FockVector
    r: float
    overlap: float
    delta: float

    def embedded(self, D: int) -> FockVector:
        return self.core.resized(D)


def _squeezed_basis_overlaps(delta, D_core, r, grid, gkp_psi):
    # <q|S(r)|n> = e^{r/2} psi_n(e^r q): r > 0 narrows the q distribution
    H = kernels.hermite_functions(math.exp(r) * grid, D_core - 1) * math.exp(0.5 * r)
    return np.trapezoid(H * gkp_psi, grid, axis=1)


def gkp_core_target(delta: float = 0.25, D_core: int = 5, r_bounds=(-3.0, 3.0),
                    starts: int = 13) -> CoreTarget:
    """Best ``S(r) sum_{n<D_core} c_n|n>`` approximation of the GKP state with kappa = delta.

    For fixed ``r`` the optimal coefficients are the (conjugated, normalized)
    overlaps ``<GKP|S(r)|n>`` and the squared overlap is their squared norm, so
    only ``r`` is searched: a deterministic grid of starts, each refined by a
    bounded scalar minimization.
    """
    if delta < 0.05:
        raise ParameterError("delta below 0.05 makes the core target degenerate")
    if D_core < 1:
        raise ValidationError("D_core must be >= 1")
    L = lattice_halfwidth_for(delta)
    grid = _quadrature_grid(delta, L, 4 * D_core + 40)
    psi = gkp_wavefunction(delta, delta, L, grid)
    psi = psi / math.sqrt(np.trapezoid(psi**2, grid))

    def loss(r):
        g = _squeezed_basis_overlaps(delta, D_core, r, grid, psi)
        return -float(np.sum(g**2))

    edges = np.linspace(r_bounds[0], r_bounds[1], starts + 1)
    best_r, best = None, np.inf
    for lo, hi in zip(edges[:-1], edges[1:]):
        res = minimize_scalar(loss, bounds=(lo, hi), method="bounded", options={"xatol": 1e-10})
        if res.fun < best - 1e-14:
            best_r, best = float(res.x), float(res.fun)
    g = _squeezed_basis_overlaps(delta, D_core, best_r, grid, psi)
    g[1::2] = 0.0
    core = FockVector(g / np.linalg.norm(g))
    return CoreTarget(core, best_r, -best, delta)
