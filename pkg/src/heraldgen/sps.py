"""Two-mode single-photon source: two squeezed vacua, one beam splitter,
one detector registering a single photon.

Everything here is closed form and doubles as an oracle for the Fock
simulator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circuits import GENERATOR_PHASE_OFFSET, CircuitSpec, BSPlacement, run_circuit, squeezed_input
from .errors import OracleMismatchError, ValidationError
from .fock import FockVector, fidelity
from .heralding import HeraldPattern, herald

R_STAR = math.atanh(1.0 / math.sqrt(2.0))
VALIDITY_TOL = 1e-10
HERALDED_MODE = 0


@dataclass(frozen=True)
class SpsDesign:
    r1: float
    r2: float
    theta: float
    phi: float

    @property
    def f(self) -> float:
        """``tanh(r1) / tanh(r2)``."""
        if self.r2 == 0:
            raise ValidationError("f is undefined for r2 = 0")
        return math.tanh(self.r1) / math.tanh(self.r2)

    def is_cancelling(self, tol: float = VALIDITY_TOL) -> bool:
        phase_ok = abs(math.cos(self.phi)) < tol
        try:
            return phase_ok and abs(self.f - math.tan(self.theta) ** 2) < tol
        except ValidationError:
            return False


def alpha_n(r: float, n: int) -> float:
    """Squeezed-vacuum weight ``sqrt((2n)!)/(2^n n!) tanh(r)^n / sqrt(cosh r)``."""
    if n < 0:
        raise ValidationError("n must be >= 0")
    t = math.tanh(r)
    if t == 0.0:
        return 1.0 / math.sqrt(math.cosh(r)) if n == 0 else 0.0
    log_mag = (0.5 * math.lgamma(2 * n + 1) - n * math.log(2.0) - math.lgamma(n + 1)
               + n * math.log(abs(t)) - 0.5 * math.log(math.cosh(r)))
    return math.copysign(1.0, t) ** n * math.exp(log_mag)


def _signed_log(x):
    """``(log|x|, sign)`` with ``log 0 = -inf``."""
    return (math.log(abs(x)) if x else -math.inf), (1.0 if x >= 0 else -1.0)


def heralded_coefficients(design: SpsDesign, N_max: int) -> np.ndarray:
    """Amplitudes ``c_N`` on ``|2N-1>``, ``N = 1..N_max``, of the unnormalized heralded state.

    ``sum |c_N|^2`` over all N is the herald probability. Terms are built in
    the log domain; the squeezers map ``a_j^dag`` onto ``-tanh(r_j)`` and the
    beam-splitter phase enters through ``g = pi - phi``.
    """
    if N_max < 1:
        raise ValidationError("N_max must be >= 1")
    t1, s1 = _signed_log(-math.tanh(design.r1))
    t2, s2 = _signed_log(-math.tanh(design.r2))
    lc, sc = _signed_log(math.cos(design.theta))
    ls, ss = _signed_log(math.sin(design.theta))
    g = GENERATOR_PHASE_OFFSET - design.phi
    pre = -0.5 * (math.log(math.cosh(design.r1)) + math.log(math.cosh(design.r2)))
    out = np.zeros(N_max, dtype=np.complex128)
    for N in range(1, N_max + 1):
        head = pre + 0.5 * math.lgamma(2 * N) - N * math.log(2.0)
        acc = 0j
        for n in range(N + 1):
            m = N - n
            base = head + n * t1 + m * t2 - math.lgamma(n + 1) - math.lgamma(m + 1)
            sign = s1**n * s2**m
            phase = np.exp(1j * (1 - 2 * m) * g)
            if n >= 1:
                lt = base + math.log(2 * n) + (2 * n - 1) * lc + (2 * m + 1) * ls
                if lt > -math.inf:
                    acc += sign * sc ** (2 * n - 1) * ss ** (2 * m + 1) * math.exp(lt) * phase
            if m >= 1:
                lt = base + math.log(2 * m) + (2 * n + 1) * lc + (2 * m - 1) * ls
                if lt > -math.inf:
                    acc -= sign * sc ** (2 * n + 1) * ss ** (2 * m - 1) * math.exp(lt) * phase
        out[N - 1] = acc
    return out


def _x(design: SpsDesign) -> complex:
    tan2 = math.tan(design.theta) ** 2
    return design.f * np.exp(2j * design.phi) / tan2


@dataclass(frozen=True)
class PhiDiagnostic:
    phi_allowed: bool
    c1: complex
    c2: complex
    x: complex

    @property
    def c2_vanishes(self) -> bool:
        return abs(self.c2) <= VALIDITY_TOL * max(abs(self.c1), 1e-300)

    @property
    def consistent(self) -> bool:
        """True unless c2 vanishes with c1 alive at a forbidden phase."""
        return self.phi_allowed or not self.c2_vanishes or abs(self.c1) < 1e-14


def check_phi_necessity(design: SpsDesign) -> PhiDiagnostic:
    """Show that ``c_2`` survives whenever ``phi`` is not ``pi/2`` or ``3pi/2``.

    ``c_2 / c_1`` is proportional to ``1 + x`` with
    ``x = f e^{2 i phi} cot^2(theta)``; for real ``f`` the imaginary part of
    ``x`` only vanishes at ``e^{2 i phi} = +-1``, and ``x = -1`` needs
    ``e^{2 i phi} = -1``.
    """
    c = heralded_coefficients(design, 2)
    allowed = abs(math.cos(design.phi)) < VALIDITY_TOL
    return PhiDiagnostic(allowed, complex(c[0]), complex(c[1]), complex(_x(design)))


def herald_probability(r1: float, r2: float) -> float:
    """Success probability of a cancelling design: ``|sinh r1 sinh r2| / (cosh r1 cosh r2)^2``."""
    return abs(math.sinh(r1) * math.sinh(r2)) / (math.cosh(r1) * math.cosh(r2)) ** 2


def design_from_squeezing(r1: float, r2: float, phi: float = math.pi / 2) -> SpsDesign:
    """Cancelling design for given squeezings: ``tan^2(theta) = f``."""
    f = SpsDesign(r1, r2, 0.0, phi).f
    if f <= 0:
        raise ValidationError("cancellation needs tanh(r1)/tanh(r2) > 0 at this phase")
    return SpsDesign(r1, r2, math.atan(math.sqrt(f)), phi)


def optimal_design() -> SpsDesign:
    return SpsDesign(R_STAR, R_STAR, math.pi / 4, math.pi / 2)


def sps_circuit(design: SpsDesign, D: int, r_max: float = 2.0) -> CircuitSpec:
    return CircuitSpec((squeezed_input(design.r1), squeezed_input(design.r2)),
                       (BSPlacement(0, 1, design.theta, design.phi),), (), D, r_max)


@dataclass(frozen=True)
class OracleReport:
    design: SpsDesign
    cutoff: int
    fidelity: float
    probability_fock: float
    probability_analytic: float
    coefficients: np.ndarray

    @property
    def probability_error(self) -> float:
        return abs(self.probability_fock - self.probability_analytic)


def verify_against_fock(design: SpsDesign, D: int, fid_tol: float = 1e-9,
                        prob_tol: float = 1e-8) -> OracleReport:
    """Run the circuit in the Fock simulator and compare to the analytic state."""
    if D < 10:
        raise ValidationError("verification needs D >= 10")
    state = run_circuit(sps_circuit(design, D + 1), max_tail=1.0)
    # one extra level so the analytic state is compared inside the exact block
    res = herald(state, HeraldPattern((1,), HERALDED_MODE))
    c = heralded_coefficients(design, (D + 1) // 2)
    analytic = np.zeros(D, dtype=np.complex128)
    analytic[1::2] = c[: analytic[1::2].size]
    # the truncated block is what both sides describe exactly
    p_block = float(np.vdot(analytic, analytic).real)
    if design.is_cancelling():
        p_total = herald_probability(design.r1, design.r2)
    else:
        p_total = float(np.sum(np.abs(heralded_coefficients(design, 4 * D)) ** 2))
    if res.state is None:
        if p_block > prob_tol:
            raise OracleMismatchError("Fock herald vanished", p_block, res.probability)
        return OracleReport(design, D, 1.0, res.probability, p_total, c)
    block = res.state.amplitudes[:D] * math.sqrt(res.probability)
    p_fock = float(np.vdot(block, block).real)
    F = fidelity(FockVector(analytic).normalized(), FockVector(block).normalized())
    if 1.0 - F > fid_tol:
        raise OracleMismatchError(f"heralded state fidelity {F:.12f}", 1.0, F)
    if abs(p_fock - p_block) > prob_tol:
        raise OracleMismatchError("herald probability", p_block, p_fock)
    return OracleReport(design, D, F, p_fock, p_total, c)
