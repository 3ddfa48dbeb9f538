"""Fock-basis gates, the rectangular interferometer mesh and circuit execution.

Beam-splitter convention: ``beamsplitter_fock(theta, phi)`` is the Fock
representation of the single-particle unitary

    [[cos t,            e^{i phi} sin t],
     [-e^{-i phi} sin t, cos t         ]]

(column j is the image of ``a_j^dag``). In generator form this is
``exp(theta (e^{i g} a_i a_j^dag - e^{-i g} a_i^dag a_j))`` with ``g = pi - phi``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
from scipy.linalg import expm
from scipy.special import gammaln

from . import kernels
from .constants import DEFAULT_PAD, R_MAX
from .errors import TruncationError, ValidationError
from .fock import FockVector, MultiModeState, tensor_product
from .phase_space import (
    GaussianState,
    SymplecticMatrix,
    beamsplitter_symplectic,
    beamsplitter_unitary,
    displacement_symplectic,
    embed,
    phase_symplectic,
    squeezer_symplectic,
    symplectic_apply,
    vacuum,
)

#: generator phase = GENERATOR_PHASE_OFFSET - phi
GENERATOR_PHASE_OFFSET = math.pi

INPUT_KINDS = ("vacuum", "squeezed", "displaced_squeezed", "single_photon")


def check_squeezing(r: float, r_max: float = R_MAX):
    if not math.isfinite(r) or abs(r) > r_max + 1e-12:
        raise ValidationError(f"|r| = {abs(r):.6g} exceeds the cap {r_max:.6g}")


@dataclass(frozen=True, eq=False)
class GateMatrix:
    """Fock matrix of a one- or two-mode gate.

    Two-mode gates store the 4-index tensor ``M[k, l, n, m] = <k,l|G|n,m>``.
    ``unitary_within`` bounds ``max |G^dag G - 1|`` on the subspace where the
    truncation is exact.
    """

    matrix: np.ndarray
    modes: int
    unitary_within: float = 0.0

    def __post_init__(self):
        m = np.array(self.matrix, dtype=np.complex128)
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def cutoff(self) -> int:
        return self.matrix.shape[0]

    def as_matrix(self) -> np.ndarray:
        D = self.cutoff
        return self.matrix.reshape(D**self.modes, D**self.modes)

    def apply(self, vec: np.ndarray) -> np.ndarray:
        return self.matrix @ vec if self.modes == 1 else np.einsum("klnm,nm->kl", self.matrix, vec)


def _ladder(D):
    return np.diag(np.sqrt(np.arange(1, D)), 1)


def _photon_block_defect(T, D):
    """Unitarity defect of a number-conserving 2-mode tensor on blocks n+m < D."""
    tot = np.add.outer(np.arange(D), np.arange(D)).ravel()
    keep = tot < D
    U = T.reshape(D * D, D * D)[np.ix_(keep, keep)]
    return float(np.max(np.abs(U.conj().T @ U - np.eye(U.shape[0]))))


def beamsplitter_fock(theta: float, phi: float, D: int) -> GateMatrix:
    W = beamsplitter_unitary(theta, phi)
    T = kernels.beamsplitter_tensor(W[0, 0], W[0, 1], W[1, 0], W[1, 1], D)
    return GateMatrix(T, 2, _photon_block_defect(T, D))


def beamsplitter_generator_fock(theta: float, phi: float, D: int) -> np.ndarray:
    """Same gate by exponentiating the generator on the two-mode truncated space.

    Only blocks with ``n + m < D`` are exact; this is an independent check.
    """
    g = GENERATOR_PHASE_OFFSET - phi
    a = _ladder(D)
    eye = np.eye(D)
    a0, a1 = np.kron(a, eye), np.kron(eye, a)
    X = np.exp(1j * g) * a0 @ a1.conj().T - np.exp(-1j * g) * a0.conj().T @ a1
    return expm(theta * X).reshape(D, D, D, D)


def beamsplitter_combinatorial(theta: float, phi: float, D: int) -> np.ndarray:
    """Same gate from the closed double-sum over binomial terms.

    Loses precision quickly with photon number (alternating sums); meant for
    ``D <= 12`` as a cross-check.
    """
    g = GENERATOR_PHASE_OFFSET - phi
    c, s = math.cos(theta), math.sin(theta)
    T = np.zeros((D, D, D, D), dtype=np.complex128)
    for n in range(D):
        for m in range(D):
            pref = 1.0 / math.sqrt(math.factorial(n) * math.factorial(m))
            for q in range(n + 1):
                for qp in range(m + 1):
                    k, l = q + qp, n + m - q - qp
                    if k >= D or l >= D:
                        continue
                    amp = (math.comb(n, q) * math.comb(m, qp) * pref
                           * math.sqrt(math.factorial(k) * math.factorial(l))
                           * c ** (m + q - qp) * s ** (n - q + qp)
                           * (-1) ** qp)
                    T[k, l, n, m] += amp * np.exp(1j * (n - q - qp) * g)
    return T


def phase_shifter_fock(phi: float, D: int) -> GateMatrix:
    return GateMatrix(np.diag(np.exp(1j * phi * np.arange(D))), 1)


def squeezer_fock(r: float, D: int, pad: int = DEFAULT_PAD, r_max: float = R_MAX) -> GateMatrix:
    """Matrix of ``exp(r (a^2 - a^dag^2)/2)`` truncated to ``D``.

    Built from the exact matrix-element recurrence; ``pad`` only sets how far
    past ``D`` the column-norm leakage is measured.
    """
    check_squeezing(r, r_max)
    S = kernels.squeezing_matrix(r, D + pad)
    return GateMatrix(S[:D, :D], 1, _column_leak(S, D))


def squeezer_generator_fock(r: float, D: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    """Squeezer by exponentiating the padded truncated generator."""
    a = _ladder(D + pad)
    return expm(0.5 * r * (a @ a - a.T @ a.T))[:D, :D]


def displacement_fock(d: complex, D: int, pad: int = DEFAULT_PAD, max_leak: float = 1e-6) -> GateMatrix:
    """Matrix of ``exp(d a^dag - d* a)``; raises if column norms leak past ``max_leak``."""
    M = kernels.displacement_matrix(d, D + pad)
    col0 = 1.0 - float(np.sum(np.abs(M[:D, 0]) ** 2))
    if col0 > max_leak:
        raise TruncationError(f"displacement |d|={abs(d):.3g} leaks {col0:.2e} past cutoff {D}")
    return GateMatrix(M[:D, :D], 1, _column_leak(M, D))


def _column_leak(M, D):
    return float(np.max(np.abs(1.0 - np.sum(np.abs(M[:D, :D]) ** 2, axis=0)[: max(1, D // 2)])))


def squeezed_vacuum_fock(r: float, D: int, r_max: float = R_MAX) -> FockVector:
    """``S(r)|0>`` from the closed series; amplitude at ``2n`` is
    ``(-tanh r)^n sqrt((2n)!) / (2^n n! sqrt(cosh r))``."""
    check_squeezing(r, r_max)
    amps = np.zeros(D, dtype=np.complex128)
    t = math.tanh(r)
    n = np.arange((D + 1) // 2)
    with np.errstate(divide="ignore"):
        logmag = (0.5 * gammaln(2 * n + 1) - n * math.log(2.0) - gammaln(n + 1)
                  + n * (math.log(abs(t)) if t != 0 else -np.inf) - 0.5 * math.log(math.cosh(r)))
    mag = np.exp(logmag)
    mag[0] = 1.0 / math.sqrt(math.cosh(r))
    amps[0::2] = mag * (-np.sign(t)) ** n
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    return FockVector(amps, tail)


@dataclass(frozen=True)
class InputState:
    """Per-mode input. ``single_photon`` may carry an inline squeezing ``r``."""

    kind: str = "vacuum"
    r: float = 0.0
    d: complex = 0j

    def __post_init__(self):
        if self.kind not in INPUT_KINDS:
            raise ValidationError(f"unknown input kind {self.kind!r}")
        if self.kind == "vacuum" and (self.r or self.d):
            raise ValidationError("vacuum input takes no parameters")
        if self.kind != "displaced_squeezed" and self.d:
            raise ValidationError("only displaced_squeezed inputs carry a displacement")

    @property
    def photons(self) -> int:
        return 1 if self.kind == "single_photon" else 0

    @property
    def is_gaussian(self) -> bool:
        return self.kind != "single_photon"


def vacuum_input():
    return InputState("vacuum")


def squeezed_input(r):
    return InputState("squeezed", float(r))


def photon_input(r=0.0):
    return InputState("single_photon", float(r))


@dataclass(frozen=True)
class BSPlacement:
    i: int
    j: int
    theta: float = 0.0
    phi: float = 0.0


@dataclass(frozen=True)
class CircuitSpec:
    """Inputs, beam-splitter mesh and output phases of an M-mode circuit."""

    inputs: tuple
    mesh: tuple = ()
    phases: tuple = ()
    cutoff: int = 20
    r_max: float = R_MAX

    def __post_init__(self):
        object.__setattr__(self, "inputs", tuple(self.inputs))
        object.__setattr__(self, "mesh", tuple(self.mesh))
        M = len(self.inputs)
        if M < 1:
            raise ValidationError("circuit needs at least one mode")
        phases = tuple(self.phases) or (0.0,) * M
        if len(phases) != M:
            raise ValidationError(f"expected {M} output phases, got {len(phases)}")
        object.__setattr__(self, "phases", tuple(float(p) for p in phases))
        if self.cutoff < 2:
            raise ValidationError("cutoff must be >= 2")
        for inp in self.inputs:
            check_squeezing(inp.r, self.r_max)
        for bs in self.mesh:
            if not (0 <= bs.i < M and 0 <= bs.j < M) or bs.i == bs.j:
                raise ValidationError(f"beam splitter on invalid modes ({bs.i}, {bs.j})")

    @property
    def mode_count(self) -> int:
        return len(self.inputs)

    @property
    def photon_count(self) -> int:
        return sum(inp.photons for inp in self.inputs)

    @property
    def is_full_mesh(self) -> bool:
        M = self.mode_count
        return len(self.mesh) == M * (M - 1) // 2

    def with_params(self, thetas, phis, phases=None) -> CircuitSpec:
        mesh = tuple(replace(bs, theta=float(t), phi=float(p))
                     for bs, t, p in zip(self.mesh, thetas, phis))
        return replace(self, mesh=mesh, phases=self.phases if phases is None else tuple(phases))


def rectangular_pairs(M: int) -> list:
    """Mode pairs of the rectangular mesh, column by column."""
    pairs = []
    for layer in range(M):
        for i in range(layer % 2, M - 1, 2):
            pairs.append((i, i + 1))
    return pairs


def build_mesh(spec: CircuitSpec) -> list:
    """Ordered gate program: inputs, rectangular beam splitters, output phases.

    Each entry is ``(kind, modes, params)``. A spec with an empty mesh gets the
    canonical rectangular placements at zero angles.
    """
    M = spec.mode_count
    mesh = spec.mesh or tuple(BSPlacement(i, j) for i, j in rectangular_pairs(M))
    program = [("input", (k,), inp) for k, inp in enumerate(spec.inputs)]
    for bs in mesh:
        if not (0 <= bs.i < M and 0 <= bs.j < M) or bs.i == bs.j:
            raise ValidationError(f"beam splitter on invalid modes ({bs.i}, {bs.j})")
        program.append(("bs", (bs.i, bs.j), (bs.theta, bs.phi)))
    for k, ph in enumerate(spec.phases):
        program.append(("phase", (k,), ph))
    return program


def full_mesh_spec(inputs: Sequence[InputState], cutoff: int, thetas=None, phis=None,
                   phases=None, r_max: float = R_MAX) -> CircuitSpec:
    M = len(inputs)
    pairs = rectangular_pairs(M)
    thetas = np.zeros(len(pairs)) if thetas is None else thetas
    phis = np.zeros(len(pairs)) if phis is None else phis
    mesh = tuple(BSPlacement(i, j, float(t), float(p)) for (i, j), t, p in zip(pairs, thetas, phis))
    return CircuitSpec(tuple(inputs), mesh, tuple(phases) if phases is not None else (), cutoff, r_max)


def input_vector(inp: InputState, D: int, pad: int = DEFAULT_PAD) -> np.ndarray:
    """Fock amplitudes of one prepared input mode (``D(d) S(r) |k>``)."""
    k = inp.photons
    S = kernels.squeezing_matrix(inp.r, D + pad)
    v = S[:, k].astype(np.complex128)
    if inp.kind == "displaced_squeezed" and inp.d:
        v = kernels.displacement_matrix(inp.d, D + pad) @ v
    return v[:D]


def apply_two_mode(psi: np.ndarray, T: np.ndarray, i: int, j: int) -> np.ndarray:
    """Contract a 2-mode tensor ``T[k,l,n,m]`` into axes ``(i, j)`` of ``psi``."""
    out = np.tensordot(T, psi, axes=([2, 3], [i, j]))
    return np.moveaxis(out, [0, 1], [i, j])


def apply_one_mode(psi: np.ndarray, U: np.ndarray, i: int) -> np.ndarray:
    out = np.tensordot(U, psi, axes=([1], [i]))
    return np.moveaxis(out, 0, i)


def apply_diagonal(psi: np.ndarray, diag: np.ndarray, i: int) -> np.ndarray:
    shape = [1] * psi.ndim
    shape[i] = diag.size
    return psi * diag.reshape(shape)


def run_circuit(spec: CircuitSpec, max_tail: float = 1e-4, check: bool = True) -> MultiModeState:
    """Prepare inputs, apply the mesh in rectangular order, then output phases.

    The returned state's ``norm_deficit`` is the probability lost to the cutoff.
    With ``check`` set, a deficit above ``max_tail`` raises ``TruncationError``.
    """
    D = spec.cutoff
    psi = tensor_product([FockVector(input_vector(inp, D)) for inp in spec.inputs]).amplitudes
    for kind, modes, params in build_mesh(spec)[spec.mode_count:]:
        if kind == "bs":
            psi = apply_two_mode(psi, beamsplitter_fock(params[0], params[1], D).matrix, *modes)
        else:
            psi = apply_diagonal(psi, np.exp(1j * params * np.arange(D)), modes[0])
    deficit = max(0.0, 1.0 - float(np.vdot(psi, psi).real))
    if check and deficit > max_tail:
        raise TruncationError(f"cutoff {D} loses {deficit:.3e} of the norm (limit {max_tail:.1e})")
    return MultiModeState(psi, deficit)


def gaussian_propagate(spec: CircuitSpec) -> GaussianState:
    """Symplectic propagation of an all-Gaussian circuit starting from vacuum."""
    M = spec.mode_count
    state = vacuum(M)
    for k, inp in enumerate(spec.inputs):
        if not inp.is_gaussian:
            raise ValidationError("gaussian_propagate needs Gaussian inputs only")
        S: SymplecticMatrix = squeezer_symplectic(inp.r)
        if inp.kind == "displaced_squeezed":
            S = displacement_symplectic(inp.d) @ S
        state = symplectic_apply(state, embed(S, (k,), M))
    for bs in spec.mesh:
        state = symplectic_apply(state, embed(beamsplitter_symplectic(bs.theta, bs.phi), (bs.i, bs.j), M))
    for k, ph in enumerate(spec.phases):
        state = symplectic_apply(state, embed(phase_symplectic(ph), (k,), M))
    return state
