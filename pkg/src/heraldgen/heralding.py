"""Photon-number-resolved heralding of one output mode."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .constants import NORM_SLACK, ZERO_PROBABILITY
from .errors import ContractError, ResourceError, ValidationError
from .fock import FockVector, MultiModeState

MAX_PATTERNS = 10**6


@dataclass(frozen=True)
class HeraldPattern:
    """Detector counts on every mode except ``heralded_mode``, in mode order."""

    counts: tuple
    heralded_mode: int = 0

    def __post_init__(self):
        counts = tuple(int(c) for c in self.counts)
        if any(c < 0 for c in counts):
            raise ValidationError("photon counts must be non-negative")
        if self.heralded_mode < 0 or self.heralded_mode > len(counts):
            raise ValidationError(f"heralded mode {self.heralded_mode} out of range")
        object.__setattr__(self, "counts", counts)

    @property
    def n_T(self) -> int:
        return sum(self.counts)

    @property
    def mode_count(self) -> int:
        return len(self.counts) + 1

    def index(self) -> tuple:
        """Tensor index with a full slice at the heralded mode."""
        idx = list(self.counts)
        idx.insert(self.heralded_mode, slice(None))
        return tuple(idx)

    def __str__(self):
        return ",".join(str(c) for c in self.counts)


@dataclass(frozen=True)
class HeraldedResult:
    """Outcome of a herald. ``state`` is None when the pattern has (numerically) zero probability."""

    state: FockVector | None
    probability: float
    n_T: int
    pattern: HeraldPattern

    @property
    def stellar_rank_bound(self) -> int:
        return self.n_T

    @property
    def is_zero(self) -> bool:
        return self.state is None


def herald(state: MultiModeState, pattern: HeraldPattern,
           zero_threshold: float = ZERO_PROBABILITY) -> HeraldedResult:
    """Project the measured modes onto ``pattern`` and renormalize the rest."""
    if pattern.mode_count != state.mode_count:
        raise ValidationError(
            f"pattern covers {pattern.mode_count} modes, state has {state.mode_count}")
    if any(c >= state.cutoff for c in pattern.counts):
        raise ValidationError("pattern counts must be below the cutoff")
    if state.norm_squared > 1.0 + NORM_SLACK:
        raise ContractError("input state norm exceeds one")
    vec = np.asarray(state.amplitudes[pattern.index()])
    p = min(1.0, float(np.vdot(vec, vec).real))
    if p < zero_threshold:
        return HeraldedResult(None, p, pattern.n_T, pattern)
    return HeraldedResult(FockVector(vec / math.sqrt(p)), p, pattern.n_T, pattern)


def enumerate_patterns(measured_modes: int, max_nT: int):
    """All count tuples with total ``<= max_nT``, in lexicographic order."""
    for counts in itertools.product(range(max_nT + 1), repeat=measured_modes):
        if sum(counts) <= max_nT:
            yield counts


def pattern_count(measured_modes: int, max_nT: int) -> int:
    return math.comb(max_nT + measured_modes, measured_modes)


def herald_all_patterns(state: MultiModeState, heralded_mode: int, max_nT: int) -> dict:
    """Herald every pattern with total count ``<= max_nT``; keys are count tuples."""
    if max_nT >= state.cutoff:
        raise ValidationError("max_nT must be below the cutoff")
    measured = state.mode_count - 1
    if pattern_count(measured, max_nT) > MAX_PATTERNS:
        raise ResourceError(f"more than {MAX_PATTERNS} patterns requested")
    return {
        counts: herald(state, HeraldPattern(counts, heralded_mode))
        for counts in enumerate_patterns(measured, max_nT)
    }


class HeraldParity(str, Enum):
    EVEN = "even"
    ODD = "odd"


def feasible_heralded_parity(photon_inputs: int, n_T: int) -> HeraldParity:
    """Parity of the heralded state's Fock support.

    Squeezers change photon number by two and the mesh conserves it, so the
    total parity equals that of the number of single-photon inputs.
    """
    return HeraldParity.EVEN if (photon_inputs - n_T) % 2 == 0 else HeraldParity.ODD


def pattern_parity_feasible(spec, pattern: HeraldPattern) -> dict:
    """Map each heralded parity class to whether the circuit can populate it.

    Displaced inputs break photon-number parity, so every class is feasible.
    """
    if any(inp.kind == "displaced_squeezed" and inp.d for inp in spec.inputs):
        return {HeraldParity.EVEN: True, HeraldParity.ODD: True}
    good = feasible_heralded_parity(spec.photon_count, pattern.n_T)
    return {par: par == good for par in HeraldParity}


def independent_parameter_count(M: int) -> int:
    """Upper bound ``(M+2)(M-1)/2`` on independent stellar coefficients."""
    if M < 1:
        raise ValidationError("mode count must be >= 1")
    return (M + 2) * (M - 1) // 2


def stellar_core(heralded: np.ndarray, gaussian_reference: np.ndarray, length: int | None = None) -> np.ndarray:
    """Polynomial part of a heralded state relative to its Gaussian envelope.

    For a Gaussian circuit the stellar function ``sum_k psi_k z^k / sqrt(k!)``
    of any heralded state equals a polynomial times that of the zero-count
    herald. Dividing the two power series returns the polynomial coefficients;
    a stellar rank ``<= n_T`` shows up as coefficients beyond ``n_T`` vanishing.
    """
    psi = np.asarray(heralded, dtype=np.complex128)
    ref = np.asarray(gaussian_reference, dtype=np.complex128)
    n = psi.size if length is None else length
    k = np.arange(n)
    scale = np.exp(-0.5 * np.array([math.lgamma(j + 1) for j in k]))
    a = psi[:n] * scale
    b = ref[:n] * scale
    if abs(b[0]) < 1e-300:
        raise ValidationError("reference state has no vacuum component")
    q = np.zeros(n, dtype=np.complex128)
    for j in range(n):
        q[j] = (a[j] - np.dot(q[:j], b[j:0:-1])) / b[0]
    return q
