"""Dense Fock-space states and the overlap metrics built on them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from functools import reduce
from typing import Sequence

import numpy as np

from .constants import NORM_SLACK, NORM_TOL, PARITY_TOL
from .errors import ContractError, DimensionError, DomainError, ValidationError


def _frozen(array, dtype=np.complex128):
    arr = np.array(array, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class FockVector:
    """Single-mode pure state, amplitudes indexed by photon number.

    ``tail_mass`` records probability known to live above the cutoff
    (zero when unknown or exact).
    """

    amplitudes: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim != 1 or amps.size < 1:
            raise ValidationError("FockVector needs a non-empty 1-d amplitude array")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def cutoff(self) -> int:
        return self.amplitudes.size

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def is_normalized(self, tol: float = NORM_TOL) -> bool:
        return abs(self.norm_squared - 1.0) <= tol

    def normalized(self) -> FockVector:
        n2 = self.norm_squared
        if n2 <= 0.0:
            raise ContractError("cannot normalize the null vector")
        return FockVector(self.amplitudes / math.sqrt(n2), self.tail_mass)

    def resized(self, cutoff: int) -> FockVector:
        """Zero-pad or truncate to ``cutoff``; truncated weight goes to the tail."""
        if cutoff >= self.cutoff:
            amps = np.zeros(cutoff, dtype=np.complex128)
            amps[: self.cutoff] = self.amplitudes
            return FockVector(amps, self.tail_mass)
        lost = float(np.sum(np.abs(self.amplitudes[cutoff:]) ** 2))
        return FockVector(self.amplitudes[:cutoff], self.tail_mass + lost)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)

    def __repr__(self):
        return f"FockVector(cutoff={self.cutoff}, norm2={self.norm_squared:.6g})"


def basis(n: int, cutoff: int) -> FockVector:
    """Number state ``|n>``."""
    if not 0 <= n < cutoff:
        raise DomainError(f"photon number {n} outside cutoff {cutoff}")
    amps = np.zeros(cutoff, dtype=np.complex128)
    amps[n] = 1.0
    return FockVector(amps)


@dataclass(frozen=True, eq=False)
class MultiModeState:
    """Pure M-mode state as a dense tensor of shape ``(D,) * M``."""

    amplitudes: np.ndarray
    norm_deficit: float = field(default=0.0)

    def __post_init__(self):
        amps = _frozen(self.amplitudes)
        if amps.ndim < 1:
            raise ValidationError("need at least one mode")
        D = amps.shape[0]
        if D < 2 or any(s != D for s in amps.shape):
            raise DimensionError(f"all modes must share a cutoff >= 2, got {amps.shape}")
        n2 = float(np.vdot(amps, amps).real)
        if n2 > 1.0 + 1e-9:
            raise ContractError(f"squared norm {n2} exceeds 1")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def mode_count(self) -> int:
        return self.amplitudes.ndim

    @property
    def cutoff(self) -> int:
        return self.amplitudes.shape[0]

    @property
    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def total_photon_distribution(self) -> np.ndarray:
        """Probability of each total photon number ``0 .. M (D-1)``."""
        probs = np.abs(self.amplitudes) ** 2
        totals = reduce(np.add.outer, [np.arange(self.cutoff)] * self.mode_count)
        return np.bincount(totals.ravel(), weights=probs.ravel(),
                           minlength=self.mode_count * (self.cutoff - 1) + 1)

    def __repr__(self):
        return (f"MultiModeState(modes={self.mode_count}, cutoff={self.cutoff}, "
                f"norm2={self.norm_squared:.6g})")


@dataclass(frozen=True)
class QuantumAngle:
    """Bures-type angle ``arccos(sqrt(F))`` between two pure states."""

    radians: float

    def __post_init__(self):
        if not -1e-15 <= self.radians <= math.pi / 2 + 1e-15:
            raise DomainError(f"quantum angle {self.radians} outside [0, pi/2]")

    def __float__(self):
        return float(self.radians)


class Parity(str, Enum):
    EVEN = "even"
    ODD = "odd"
    MIXED = "mixed"
    NONE = "none"


def _check_cutoffs(a: FockVector, b: FockVector):
    if a.cutoff != b.cutoff:
        raise DimensionError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")


def inner_product(a: FockVector, b: FockVector) -> complex:
    """``<a|b>`` (antilinear in ``a``)."""
    _check_cutoffs(a, b)
    return complex(np.vdot(a.amplitudes, b.amplitudes))


def fidelity(a: FockVector, b: FockVector, tol: float = NORM_SLACK) -> float:
    """``|<a|b>|^2`` for two normalized pure states."""
    _check_cutoffs(a, b)
    for name, v in (("first", a), ("second", b)):
        if not v.is_normalized(tol):
            raise ContractError(f"{name} state is not normalized (norm^2={v.norm_squared!r})")
    f = abs(inner_product(a, b)) ** 2
    return min(1.0, max(0.0, f))


def quantum_angle(F: float, slack: float = 1e-12) -> QuantumAngle:
    """Angle ``arccos(sqrt(F))``; ``F`` may stray from [0, 1] by ``slack``."""
    if not -slack <= F <= 1.0 + slack:
        raise DomainError(f"fidelity {F} outside [0, 1]")
    F = min(1.0, max(0.0, F))
    return QuantumAngle(math.acos(math.sqrt(F)))


def tensor_product(states: Sequence[FockVector]) -> MultiModeState:
    """Product state; the amplitude of ``|n_1 ... n_M>`` is the product of factors."""
    states = list(states)
    if not states:
        raise ValidationError("tensor_product needs at least one state")
    D = states[0].cutoff
    for s in states[1:]:
        if s.cutoff != D:
            raise DimensionError("all factors must share a cutoff")
    out = states[0].amplitudes
    for s in states[1:]:
        out = np.multiply.outer(out, s.amplitudes)
    return MultiModeState(out)


def total_photon_parity_support(state: MultiModeState, tol: float = PARITY_TOL) -> Parity:
    """Which total-photon-number parities carry amplitude above ``tol``."""
    totals = reduce(np.add.outer, [np.arange(state.cutoff)] * state.mode_count)
    occupied = np.abs(state.amplitudes) > tol
    even = bool(np.any(occupied & (totals % 2 == 0)))
    odd = bool(np.any(occupied & (totals % 2 == 1)))
    if even and odd:
        return Parity.MIXED
    if even:
        return Parity.EVEN
    if odd:
        return Parity.ODD
    return Parity.NONE
