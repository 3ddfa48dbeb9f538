import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraldgen.circuits import full_mesh_spec, photon_input, run_circuit, squeezed_input
from heraldgen.errors import ResourceError, ValidationError
from heraldgen.fock import basis, tensor_product
from heraldgen.heralding import (
    HeraldParity,
    HeraldPattern,
    enumerate_patterns,
    feasible_heralded_parity,
    herald,
    herald_all_patterns,
    independent_parameter_count,
    pattern_count,
    pattern_parity_feasible,
    stellar_core,
)


def two_mode(r1=0.6, r2=-0.4, theta=0.7, phi=1.2, D=16, photons=0):
    inputs = [photon_input(r1) if photons > 0 else squeezed_input(r1),
              photon_input(r2) if photons > 1 else squeezed_input(r2)]
    return full_mesh_spec(inputs, D, [theta], [phi])


def test_pattern_index_and_validation():
    p = HeraldPattern((2, 1), heralded_mode=1)
    assert p.index() == (2, slice(None), 1)
    assert p.n_T == 3 and p.mode_count == 3 and str(p) == "2,1"
    with pytest.raises(ValidationError):
        HeraldPattern((-1,))
    with pytest.raises(ValidationError):
        HeraldPattern((1,), heralded_mode=3)


def test_herald_product_state():
    s = tensor_product([basis(2, 4), basis(1, 4)])
    res = herald(s, HeraldPattern((1,)))
    assert res.probability == pytest.approx(1.0)
    assert np.allclose(res.state.amplitudes, [0, 0, 1, 0])
    assert herald(s, HeraldPattern((0,))).is_zero


def test_herald_mode_mismatch():
    s = tensor_product([basis(0, 3)] * 2)
    with pytest.raises(ValidationError):
        herald(s, HeraldPattern((0, 0)))
    with pytest.raises(ValidationError):
        herald(s, HeraldPattern((3,)))


def test_pattern_enumeration():
    pats = list(enumerate_patterns(2, 3))
    assert len(pats) == pattern_count(2, 3) == 10
    assert all(sum(c) <= 3 for c in pats)


def test_pattern_budget():
    s = tensor_product([basis(0, 3)] * 2)
    with pytest.raises(ValidationError):
        herald_all_patterns(s, 0, 3)


def test_resource_guard(monkeypatch):
    import heraldgen.heralding as h
    monkeypatch.setattr(h, "MAX_PATTERNS", 3)
    s = tensor_product([basis(0, 4)] * 3)
    with pytest.raises(ResourceError):
        herald_all_patterns(s, 0, 2)


def test_parity_feasibility():
    assert feasible_heralded_parity(0, 2) is HeraldParity.EVEN
    assert feasible_heralded_parity(1, 2) is HeraldParity.ODD
    spec = two_mode(photons=1)
    ok = pattern_parity_feasible(spec, HeraldPattern((1,)))
    assert ok[HeraldParity.EVEN] and not ok[HeraldParity.ODD]


def test_heralded_parity_matches_rule():
    state = run_circuit(two_mode(photons=1, D=20))
    for counts, res in herald_all_patterns(state, 0, 4).items():
        if res.is_zero:
            continue
        par = feasible_heralded_parity(1, sum(counts))
        wrong = res.state.amplitudes[1::2] if par is HeraldParity.EVEN else res.state.amplitudes[0::2]
        assert np.max(np.abs(wrong)) < 1e-12


def test_independent_parameter_count():
    assert [independent_parameter_count(M) for M in (1, 2, 3, 4)] == [0, 2, 5, 9]


@pytest.mark.parametrize("nT", [1, 2, 3, 4])
def test_stellar_rank_bounded_by_detected_photons(nT):
    D = 30
    state = run_circuit(two_mode(r1=0.5, r2=0.3, D=D))
    ref = herald(state, HeraldPattern((0,))).state.amplitudes
    res = herald(state, HeraldPattern((nT,)))
    q = stellar_core(res.state.amplitudes, ref, length=10)
    assert np.max(np.abs(q[nT + 1:])) < 1e-8 * np.max(np.abs(q[: nT + 1]))
    assert res.stellar_rank_bound == nT


@settings(max_examples=60)
@given(st.floats(-1.0, 1.0), st.floats(-1.0, 1.0), st.floats(0, math.pi), st.floats(0, 2 * math.pi))
def test_pattern_probabilities_never_exceed_one(r1, r2, theta, phi):
    state = run_circuit(two_mode(r1, r2, theta, phi, D=12), check=False)
    results = herald_all_patterns(state, 0, 11)
    total = sum(r.probability for r in results.values())
    assert total <= state.norm_squared + 1e-12
    for r in results.values():
        assert 0.0 <= r.probability <= 1.0
        if not r.is_zero:
            assert r.state.norm_squared == pytest.approx(1.0)
