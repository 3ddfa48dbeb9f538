"""Multi-restart maximization of fidelity plus herald probability.

Parameter vector layout for an M-mode problem with ``K = M(M-1)/2`` beam
splitters::

    [r_0 .. r_{M-1}, theta_0 .. theta_{K-1}, phi_0 .. phi_{K-1},
     phase_0 .. phase_{M-1}, (Re d_k, Im d_k for each squeezed mode)]

The displacement block is present only when ``include_displacement`` is set.
Single-photon inputs are squeezed in line, ``S(r)|1>``.

Gradients come from one forward sweep that stores intermediate states and
one adjoint sweep. They are exact derivatives of the truncated simulation.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import kernels
from .circuits import (
    BSPlacement,
    CircuitSpec,
    InputState,
    apply_two_mode,
    rectangular_pairs,
    run_circuit,
)
from .constants import DEFAULT_PAD, R_MAX, ZERO_PROBABILITY
from .errors import ConvergenceError, TruncationError, ValidationError
from .fock import FockVector
from .heralding import HeraldPattern, pattern_parity_feasible
from .phase_space import beamsplitter_unitary

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True, eq=False)
class OptimizationProblem:
    """Fixed structure of one optimization: modes, photons, herald and target.

    ``photon_modes`` lists the modes fed with single photons. The heralded
    amplitudes are kept only below ``cutoff - n_T``, where the truncated
    simulation is exact.
    """

    mode_count: int
    photon_modes: tuple
    pattern: HeraldPattern
    target: FockVector
    cutoff: int = 20
    r_max: float = R_MAX
    include_displacement: bool = False
    weights: tuple = (1.0, 1.0)
    target_tail_limit: float = 1e-6

    def __post_init__(self):
        M = self.mode_count
        if M < 2:
            raise ValidationError("optimization needs at least two modes")
        modes = tuple(sorted(int(k) for k in self.photon_modes))
        if len(set(modes)) != len(modes) or any(not 0 <= k < M for k in modes):
            raise ValidationError(f"invalid single-photon placement {self.photon_modes}")
        object.__setattr__(self, "photon_modes", modes)
        if self.pattern.mode_count != M:
            raise ValidationError("pattern does not match the mode count")
        if any(c >= self.cutoff for c in self.pattern.counts):
            raise ValidationError("pattern counts must be below the cutoff")
        if self.block <= 0:
            raise ValidationError("cutoff leaves no exact heralded amplitudes")
        t = np.asarray(self.target.amplitudes)
        lost = float(np.sum(np.abs(t[self.block:]) ** 2)) + self.target.tail_mass
        if lost > self.target_tail_limit:
            raise TruncationError(
                f"target keeps {lost:.2e} of its weight at or above {self.block} photons")
        head = np.zeros(self.block, dtype=np.complex128)
        n = min(self.block, t.size)
        head[:n] = t[:n]
        object.__setattr__(self, "_target", head / np.linalg.norm(head))

    @property
    def photon_count(self) -> int:
        return len(self.photon_modes)

    @property
    def n_T(self) -> int:
        return self.pattern.n_T

    @property
    def block(self) -> int:
        return self.cutoff - self.pattern.n_T

    @property
    def pairs(self) -> list:
        return rectangular_pairs(self.mode_count)

    @property
    def displaced_modes(self) -> tuple:
        if not self.include_displacement:
            return ()
        return tuple(k for k in range(self.mode_count) if k not in self.photon_modes)

    @property
    def parameter_count(self) -> int:
        K = len(self.pairs)
        return 2 * self.mode_count + 2 * K + 2 * len(self.displaced_modes)

    def bounds(self) -> list:
        M, K = self.mode_count, len(self.pairs)
        rb = [(-self.r_max, self.r_max)] * M
        return rb + [(None, None)] * (2 * K + M + 2 * len(self.displaced_modes))

    def with_cutoff(self, cutoff: int) -> OptimizationProblem:
        return OptimizationProblem(self.mode_count, self.photon_modes, self.pattern,
                                   self.target.resized(cutoff), cutoff, self.r_max,
                                   self.include_displacement, self.weights,
                                   self.target_tail_limit)

    def unpack(self, x):
        x = np.asarray(x, dtype=np.float64)
        if x.shape != (self.parameter_count,):
            raise ValidationError(f"expected {self.parameter_count} parameters, got {x.shape}")
        M, K = self.mode_count, len(self.pairs)
        r = x[:M]
        th = x[M:M + K]
        ph = x[M + K:M + 2 * K]
        out = x[M + 2 * K:2 * M + 2 * K]
        dv = x[2 * M + 2 * K:]
        d = {k: complex(dv[2 * i], dv[2 * i + 1]) for i, k in enumerate(self.displaced_modes)}
        return r, th, ph, out, d

    def circuit(self, x) -> CircuitSpec:
        """Circuit description of a parameter vector (for ``run_circuit``)."""
        r, th, ph, out, d = self.unpack(x)
        inputs = []
        for k in range(self.mode_count):
            if k in self.photon_modes:
                inputs.append(InputState("single_photon", float(r[k])))
            elif k in d:
                inputs.append(InputState("displaced_squeezed", float(r[k]), d[k]))
            else:
                inputs.append(InputState("squeezed", float(r[k])))
        mesh = tuple(BSPlacement(i, j, float(t), float(p))
                     for (i, j), t, p in zip(self.pairs, th, ph))
        return CircuitSpec(tuple(inputs), mesh, tuple(float(o) for o in out), self.cutoff,
                           self.r_max)

    def target_parity(self):
        t = self._target
        even = np.any(np.abs(t[0::2]) > 1e-12)
        odd = np.any(np.abs(t[1::2]) > 1e-12)
        return "even" if even and not odd else "odd" if odd and not even else "mixed"

    def is_feasible(self) -> bool:
        """False when parity alone forces zero overlap with the target."""
        tp = self.target_parity()
        if tp == "mixed":
            return True
        spec = self.circuit(np.full(self.parameter_count, 0.1))
        feasible = pattern_parity_feasible(spec, self.pattern)
        return any(par.value == tp and ok for par, ok in feasible.items())


@dataclass(frozen=True)
class Evaluation:
    fidelity: float
    probability: float
    reward: float
    feasible: bool = True


def _sq_ladder(D):
    return np.sqrt(np.arange(D, dtype=np.float64))


def _squeeze_derivative(col, D):
    """Rows ``< D`` of ``(a^2 - a^dag^2)/2`` applied to ``col`` (which has ``>= D + 2`` rows)."""
    i = np.arange(D)
    up = np.sqrt((i + 1.0) * (i + 2.0)) * col[2:D + 2]
    down = np.zeros(D, dtype=col.dtype)
    down[2:] = np.sqrt(i[2:] * (i[2:] - 1.0)) * col[:D - 2]
    return 0.5 * (up - down)


def _input_with_derivatives(k, r, d, D, need_grad):
    """Input vector ``D(d) S(r) |k>`` truncated to ``D``, plus its parameter derivatives."""
    if d is None:
        S = kernels.squeezing_matrix(r, D + 2)
        col = S[:, k].astype(np.complex128)
        v = col[:D].copy()
        if not need_grad:
            return v, []
        return v, [_squeeze_derivative(col, D)]
    K = D + DEFAULT_PAD
    S = kernels.squeezing_matrix(r, K + 2)
    Dm = kernels.displacement_matrix(d, K + 1)
    col = S[:, k].astype(np.complex128)
    full = Dm[:, :K] @ col[:K]
    v = full[:D].copy()
    if not need_grad:
        return v, []
    dr = Dm[:D, :K] @ _squeeze_derivative(col, K)
    sq = _sq_ladder(K + 1)
    # a^dag and a acting on Dm S |k>, rows < D
    adag = np.zeros(D, dtype=np.complex128)
    adag[1:] = sq[1:D] * full[:D - 1]
    a = sq[1:D + 1] * full[1:D + 1]
    dx = adag - a + 1j * d.imag * v
    dy = 1j * (adag + a) - 1j * d.real * v
    return v, [dr, dx, dy]


def _outer(vectors):
    out = vectors[0]
    for v in vectors[1:]:
        out = np.multiply.outer(out, v)
    return out


def _contract_except(lam, vectors, k):
    """``sum conj(lam) * prod_{j != k} v_j`` leaving mode ``k`` open."""
    t = lam.conj()
    for j in reversed(range(len(vectors))):
        if j == k:
            continue
        t = np.tensordot(t, vectors[j], axes=([j], [0]))
    return t


def _shift_generator(psi_big, i, j, phi, D):
    """Rows ``< D`` of ``(-e^{-i phi} a_i a_j^dag + e^{i phi} a_i^dag a_j) psi_big``.

    ``psi_big`` has size ``D + 1`` on modes ``i`` and ``j``.
    """
    Y = np.moveaxis(psi_big, [i, j], [0, 1])
    sq = _sq_ladder(D + 1)
    out = np.zeros((D, D) + Y.shape[2:], dtype=np.complex128)
    col = (None,) * (Y.ndim - 2)
    # a_i a_j^dag: [k, l] <- sqrt(k+1) sqrt(l) Y[k+1, l-1]
    w1 = (sq[1:D + 1][:, None] * sq[1:D][None, :])[(...,) + col]
    out[:, 1:] += -np.exp(-1j * phi) * w1 * Y[1:D + 1, 0:D - 1]
    # a_i^dag a_j: [k, l] <- sqrt(k) sqrt(l+1) Y[k-1, l+1]
    w2 = (sq[1:D][:, None] * sq[1:D + 1][None, :])[(...,) + col]
    out[1:, :] += np.exp(1j * phi) * w2 * Y[0:D - 1, 1:D + 1]
    return np.moveaxis(out, [0, 1], [i, j])


def _number_on(psi, mode):
    shape = [1] * psi.ndim
    shape[mode] = psi.shape[mode]
    return psi * np.arange(psi.shape[mode]).reshape(shape)


def _reward_parts(problem, psi):
    h = psi[problem.pattern.index()][: problem.block]
    p = float(np.vdot(h, h).real)
    t = problem._target
    ov = complex(np.vdot(t, h))
    if p < ZERO_PROBABILITY:
        return h, p, ov, 0.0
    return h, p, ov, min(1.0, abs(ov) ** 2 / p)


def evaluate(problem: OptimizationProblem, params) -> Evaluation:
    """Fidelity, herald probability and reward of one parameter vector."""
    if not problem.is_feasible():
        return Evaluation(0.0, 0.0, 0.0, feasible=False)
    _check_bounds(problem, params)
    F, p, _ = _value_and_grad(problem, params, need_grad=False)
    wF, wp = problem.weights
    return Evaluation(F, p, wF * F + wp * p)


def _check_bounds(problem, params):
    r = np.asarray(params, dtype=float)[: problem.mode_count]
    if np.any(np.abs(r) > problem.r_max + 1e-12):
        raise ValidationError(f"squeezing {np.abs(r).max():.6g} beyond r_max {problem.r_max:.6g}")


def _value_and_grad(problem, x, need_grad=True):
    D = problem.cutoff
    M = problem.mode_count
    r, th, ph, out, disp = problem.unpack(x)
    vecs, dvecs = [], []
    for k in range(M):
        n_in = 1 if k in problem.photon_modes else 0
        v, dv = _input_with_derivatives(n_in, float(r[k]), disp.get(k), D, need_grad)
        vecs.append(v)
        dvecs.append(dv)
    psi = _outer(vecs)
    states, gates = [psi], []
    for (i, j), t, p in zip(problem.pairs, th, ph):
        W = beamsplitter_unitary(t, p)
        B1 = kernels.beamsplitter_tensor(W[0, 0], W[0, 1], W[1, 0], W[1, 1], D + 1)
        big = apply_two_mode(psi, B1[:, :, :D, :D], i, j)
        idx = [slice(None)] * M
        idx[i] = idx[j] = slice(0, D)
        psi = big[tuple(idx)]
        gates.append((i, j, p, B1, big))
        states.append(psi)
    for k in range(M):
        shape = [1] * M
        shape[k] = D
        psi = psi * np.exp(1j * out[k] * np.arange(D)).reshape(shape)
    h, prob, ov, F = _reward_parts(problem, psi)
    if not need_grad:
        return F, prob, None

    wF, wp = problem.weights
    lam_h = wp * h
    if prob >= ZERO_PROBABILITY:
        lam_h = lam_h + wF * (ov * problem._target - F * h) / prob
    lam = np.zeros_like(psi)
    lam[problem.pattern.index()][: problem.block] = lam_h
    grad = np.zeros(problem.parameter_count)
    K = len(problem.pairs)

    off = M + 2 * K
    for k in range(M):
        grad[off + k] = 2.0 * np.vdot(lam, 1j * _number_on(psi, k)).real
    for k in range(M):
        shape = [1] * M
        shape[k] = D
        lam = lam * np.exp(-1j * out[k] * np.arange(D)).reshape(shape)

    for g in reversed(range(K)):
        i, j, p, B1, big = gates[g]
        psi_in, psi_out = states[g], states[g + 1]
        grad[M + g] = 2.0 * np.vdot(lam, _shift_generator(big, i, j, p, D)).real
        B = B1[:D, :D, :D, :D]
        lam_prev = apply_two_mode(lam, np.conj(B).transpose(2, 3, 0, 1), i, j)
        grad[M + K + g] = 2.0 * (np.vdot(lam_prev, 1j * _number_on(psi_in, j))
                                 - np.vdot(lam, 1j * _number_on(psi_out, j))).real
        lam = lam_prev

    for k in range(M):
        u = _contract_except(lam, vecs, k)
        grad[k] = 2.0 * np.dot(u, dvecs[k][0]).real
    for n, k in enumerate(problem.displaced_modes):
        u = _contract_except(lam, vecs, k)
        base = 2 * M + 2 * K + 2 * n
        grad[base] = 2.0 * np.dot(u, dvecs[k][1]).real
        grad[base + 1] = 2.0 * np.dot(u, dvecs[k][2]).real
    return F, prob, grad


def heralded_state(problem: OptimizationProblem, params) -> FockVector:
    """Normalized heralded state (exact block, zero-padded to the cutoff)."""
    _check_bounds(problem, params)
    spec = problem.circuit(params)
    psi = run_circuit(spec, check=False).amplitudes
    h = np.zeros(problem.cutoff, dtype=np.complex128)
    h[: problem.block] = psi[problem.pattern.index()][: problem.block]
    nrm = np.linalg.norm(h)
    if nrm**2 < ZERO_PROBABILITY:
        raise ValidationError("herald pattern has zero probability at these parameters")
    return FockVector(h / nrm)


def reward_and_gradient(problem: OptimizationProblem, params):
    """``(reward, d reward / d params)``."""
    F, p, g = _value_and_grad(problem, params)
    wF, wp = problem.weights
    return wF * F + wp * p, g


def gradient_check(problem: OptimizationProblem, params, step: float = 1e-5) -> float:
    """Max relative deviation between the adjoint gradient and central differences.

    Compared along each coordinate and along the gradient direction itself.
    """
    x = np.asarray(params, dtype=float)
    _, g = reward_and_gradient(problem, x)

    def R(y):
        return reward_and_gradient(problem, y)[0]

    scale = max(np.linalg.norm(g), 1e-12)
    dirs = list(np.eye(x.size)) + [g / scale]
    worst = 0.0
    for u in dirs:
        fd = (R(x + step * u) - R(x - step * u)) / (2 * step)
        an = float(np.dot(g, u))
        worst = max(worst, abs(fd - an) / max(abs(an), abs(fd), 1e-3 * scale, 1e-10))
    return worst


@dataclass(frozen=True, eq=False)
class OptimizationResult:
    params: np.ndarray
    fidelity: float
    probability: float
    reward: float
    n_T: int
    restart: int
    trace: tuple = field(default=(), repr=False)
    converged: bool = True
    message: str = ""

    @property
    def trace_length(self) -> int:
        return len(self.trace)

    @property
    def one_minus_F(self) -> float:
        return 1.0 - self.fidelity


def initial_params(problem: OptimizationProblem, rng: np.random.Generator) -> np.ndarray:
    """Squeezings uniform in ``[0.1, 0.9 r_max]``, angles uniform in ``[0, 2 pi)``."""
    M, K = problem.mode_count, len(problem.pairs)
    r = rng.uniform(0.1, 0.9 * problem.r_max, M)
    ang = rng.uniform(0.0, TWO_PI, 2 * K + M)
    d = rng.uniform(-0.5, 0.5, 2 * len(problem.displaced_modes))
    return np.concatenate([r, ang, d])


def _wrap(problem, x):
    x = np.array(x, dtype=float)
    M, K = problem.mode_count, len(problem.pairs)
    x[M:2 * M + 2 * K] = np.mod(x[M:2 * M + 2 * K], TWO_PI)
    return x


def local_ascent(problem: OptimizationProblem, x0, max_iter: int = 5000,
                 tol: float = 1e-8, restart: int = 0) -> OptimizationResult:
    trace = []

    def fun(x):
        R, g = reward_and_gradient(problem, x)
        return -R, -g

    def record(xk):
        trace.append(-fun(xk)[0])

    res = minimize(fun, np.asarray(x0, dtype=float), jac=True, method="L-BFGS-B",
                   bounds=problem.bounds(), callback=record,
                   options={"maxiter": max_iter, "ftol": tol, "gtol": tol, "maxcor": 20})
    x = _wrap(problem, res.x)
    ev = evaluate(problem, x)
    return OptimizationResult(x, ev.fidelity, ev.probability, ev.reward, problem.n_T,
                              restart, tuple(trace), bool(res.success), str(res.message))


def optimize(problem: OptimizationProblem, restarts: int, seed: int,
             max_iter: int = 5000, tol: float = 1e-8, progress=None) -> list:
    """Independent seeded restarts, sorted by reward (ties: lower restart index first)."""
    if restarts < 1:
        raise ValidationError("restarts must be >= 1")
    if not problem.is_feasible():
        raise ConvergenceError("pattern parity rules out any overlap with the target; "
                               "no restart is feasible")
    children = np.random.SeedSequence(seed).spawn(restarts)
    results = []
    for idx, ss in enumerate(children):
        x0 = initial_params(problem, np.random.default_rng(ss))
        results.append(local_ascent(problem, x0, max_iter, tol, idx))
        if progress is not None:
            progress(results[-1])
    results.sort(key=lambda res: (-res.reward, res.restart))
    return results


def best_so_far(results) -> list:
    """Running maximum of reward in restart order."""
    ordered = sorted(results, key=lambda res: res.restart)
    return list(np.maximum.accumulate([res.reward for res in ordered]))


def pareto_front(results, rel_tol: float = 1e-2) -> list:
    """Restarts not dominated in (lower 1-F, higher p), near-duplicates merged.

    Ordered by increasing infidelity. Local optima of the reward often sit on
    this frontier far from the top-reward point, so it is what gets reported.
    """
    ordered = sorted(results, key=lambda r: (r.one_minus_F, -r.probability, r.restart))
    front = []
    for res in ordered:
        if any(f.probability >= res.probability and f.one_minus_F <= res.one_minus_F for f in front):
            continue
        front.append(res)
    merged = []
    for res in front:
        if merged and _close(merged[-1], res, rel_tol):
            continue
        merged.append(res)
    return merged


def _close(a, b, rel_tol):
    return (abs(a.one_minus_F - b.one_minus_F) <= rel_tol * max(a.one_minus_F, 1e-12)
            and abs(a.probability - b.probability) <= rel_tol * max(a.probability, 1e-12))


def meets(result: OptimizationResult, max_infidelity: float, min_probability: float) -> bool:
    return result.one_minus_F <= max_infidelity and result.probability >= min_probability


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0
