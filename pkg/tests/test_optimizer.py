import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraldgen.circuits import run_circuit
from heraldgen.errors import ConvergenceError, TruncationError, ValidationError
from heraldgen.fock import basis, fidelity
from heraldgen.heralding import HeraldPattern, herald
from heraldgen.optimizer import (
    OptimizationProblem,
    OptimizationResult,
    best_so_far,
    evaluate,
    gradient_check,
    heralded_state,
    initial_params,
    local_ascent,
    meets,
    optimize,
    pareto_front,
    reward_and_gradient,
)
from heraldgen.targets import cat_state


def sps_problem(D=12):
    return OptimizationProblem(2, (), HeraldPattern((1,)), basis(1, D), cutoff=D)


def cat_problem(D=14, photons=(), nT=2):
    return OptimizationProblem(2, photons, HeraldPattern((nT,)),
                               cat_state(1.0, "even", D, max_tail=1e-6), cutoff=D)


def test_problem_validation():
    with pytest.raises(ValidationError):
        OptimizationProblem(1, (), HeraldPattern(()), basis(0, 5))
    with pytest.raises(ValidationError):
        OptimizationProblem(2, (0, 0), HeraldPattern((1,)), basis(0, 5))
    with pytest.raises(ValidationError):
        OptimizationProblem(2, (), HeraldPattern((1, 1)), basis(0, 5))
    with pytest.raises(TruncationError):
        OptimizationProblem(2, (), HeraldPattern((6,)), cat_state(2.0, "even", 20, 1e-6), cutoff=20)


def test_parameter_layout():
    p = cat_problem()
    assert p.parameter_count == 2 + 2 + 2
    assert p.bounds()[0] == (-p.r_max, p.r_max)
    q = OptimizationProblem(2, (1,), HeraldPattern((1,)), basis(0, 10), cutoff=10,
                            include_displacement=True)
    assert q.displaced_modes == (0,) and q.parameter_count == 8


def test_evaluate_agrees_with_simulation(rng):
    p = cat_problem(photons=(0,), nT=1)
    x = initial_params(p, rng)
    ev = evaluate(p, x)
    state = run_circuit(p.circuit(x), check=False)
    res = herald(state, p.pattern)
    block = res.state.amplitudes[: p.block] * math.sqrt(res.probability)
    assert ev.probability == pytest.approx(float(np.sum(np.abs(block) ** 2)), rel=1e-10)
    assert ev.fidelity == pytest.approx(fidelity(heralded_state(p, x), p.target.normalized()), abs=1e-10)
    assert ev.reward == pytest.approx(ev.fidelity + ev.probability)


@pytest.mark.parametrize("photons,nT,disp", [((), 2, False), ((0,), 1, False), ((1,), 2, True)])
def test_adjoint_gradient(photons, nT, disp):
    p = OptimizationProblem(2, photons, HeraldPattern((nT,)),
                            cat_state(1.0, "even", 14, 1e-6), cutoff=14, include_displacement=disp)
    x = initial_params(p, np.random.default_rng(7))
    assert gradient_check(p, x) < 1e-5


def test_gradient_three_modes():
    p = OptimizationProblem(3, (0,), HeraldPattern((1, 0)), cat_state(1.0, "even", 10, 1e-4),
                            cutoff=10, target_tail_limit=1e-4)
    x = initial_params(p, np.random.default_rng(3))
    assert gradient_check(p, x) < 1e-5


def test_squeezing_bound_enforced():
    p = sps_problem()
    x = np.zeros(p.parameter_count)
    x[0] = p.r_max + 0.1
    with pytest.raises(ValidationError):
        evaluate(p, x)


def test_infeasible_parity_raises():
    p = OptimizationProblem(2, (), HeraldPattern((1,)), cat_state(1.0, "even", 12, 1e-6), cutoff=12)
    assert not p.is_feasible()
    assert not evaluate(p, np.full(p.parameter_count, 0.1)).feasible
    with pytest.raises(ConvergenceError):
        optimize(p, 2, seed=0)


def test_sps_optimum_found():
    res = optimize(sps_problem(), restarts=4, seed=0)
    best = res[0]
    assert best.fidelity > 1 - 1e-6
    assert best.probability == pytest.approx(0.25, abs=1e-4)


def test_seed_determinism():
    a = optimize(cat_problem(), restarts=3, seed=42)
    b = optimize(cat_problem(), restarts=3, seed=42)
    assert [r.restart for r in a] == [r.restart for r in b]
    for ra, rb in zip(a, b):
        assert np.array_equal(ra.params, rb.params)
        assert ra.reward == rb.reward


def test_restart_independence():
    # restart k starts from the same point whatever the restart count
    a = optimize(cat_problem(), restarts=2, seed=5)
    b = optimize(cat_problem(), restarts=4, seed=5)
    pa = {r.restart: r.params for r in a}
    pb = {r.restart: r.params for r in b}
    for k in pa:
        assert np.array_equal(pa[k], pb[k])


def test_results_sorted_and_bounded():
    res = optimize(cat_problem(), restarts=3, seed=1)
    assert all(x.reward >= y.reward for x, y in zip(res, res[1:]))
    for r in res:
        assert np.all(np.abs(r.params[:2]) <= r.params.dtype.type(cat_problem().r_max) + 1e-12)
        assert 0 <= r.fidelity <= 1 and 0 <= r.probability <= 1
    assert best_so_far(res)[-1] == res[0].reward


def _result(F, p, k):
    return OptimizationResult(np.zeros(1), F, p, F + p, 2, k)


def test_pareto_front():
    rs = [_result(0.9, 0.1, 0), _result(0.8, 0.3, 1), _result(0.7, 0.2, 2), _result(0.9, 0.1001, 3)]
    front = pareto_front(rs)
    assert [r.restart for r in front] == [3, 1]
    assert meets(front[0], 0.11, 0.1) and not meets(front[1], 0.1, 0.1)


@settings(max_examples=40)
@given(st.integers(0, 2**31))
def test_initial_params_within_bounds(seed):
    p = cat_problem(photons=(0,), nT=1)
    x = initial_params(p, np.random.default_rng(seed))
    assert np.all((x[:2] >= 0.1) & (x[:2] <= 0.9 * p.r_max))
    assert np.all((x[2:] >= 0) & (x[2:] < 2 * math.pi))


def test_local_ascent_never_decreases_reward(rng):
    p = cat_problem()
    x0 = initial_params(p, rng)
    r0, _ = reward_and_gradient(p, x0)
    res = local_ascent(p, x0, max_iter=50)
    assert res.reward >= r0 - 1e-12
