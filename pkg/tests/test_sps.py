import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from heraldgen.circuits import run_circuit, squeezed_vacuum_fock
from heraldgen.errors import ValidationError
from heraldgen.heralding import HeraldPattern, herald
from heraldgen.sps import (
    R_STAR,
    SpsDesign,
    alpha_n,
    check_phi_necessity,
    design_from_squeezing,
    herald_probability,
    heralded_coefficients,
    optimal_design,
    sps_circuit,
    verify_against_fock,
)


def test_r_star():
    assert R_STAR == pytest.approx(0.881374, abs=1e-6)
    assert herald_probability(R_STAR, R_STAR) == pytest.approx(0.25, abs=1e-15)


def test_alpha_n_magnitudes_match_squeezed_vacuum():
    v = squeezed_vacuum_fock(0.6, 20).amplitudes
    for n in range(10):
        assert abs(alpha_n(0.6, n)) == pytest.approx(abs(v[2 * n]), rel=1e-13)
    assert alpha_n(R_STAR, 0) == pytest.approx(2 ** -0.25)
    with pytest.raises(ValidationError):
        alpha_n(0.3, -1)


def test_optimal_design_is_cancelling():
    d = optimal_design()
    assert d.is_cancelling() and d.f == pytest.approx(1.0)
    c = heralded_coefficients(d, 8)
    assert abs(c[0]) ** 2 == pytest.approx(0.25)
    assert np.max(np.abs(c[1:])) < 1e-15


def test_coefficients_match_fock_for_generic_design():
    d = SpsDesign(0.4, -0.7, 0.9, 0.3)
    state = run_circuit(sps_circuit(d, 31), max_tail=1.0)
    vec = state.amplitudes[:, 1]
    c = heralded_coefficients(d, 15)
    assert np.max(np.abs(vec[1:30:2] - c)) < 1e-12
    assert np.max(np.abs(vec[0:30:2])) < 1e-14


def test_verify_against_fock_reports():
    rep = verify_against_fock(optimal_design(), 20)
    assert rep.fidelity >= 1 - 1e-9
    assert rep.probability_fock == pytest.approx(0.25, abs=1e-8)
    assert rep.probability_error < 1e-8
    with pytest.raises(ValidationError):
        verify_against_fock(optimal_design(), 4)


def test_non_cancelling_phase_keeps_c2():
    d = SpsDesign(R_STAR, R_STAR, math.pi / 4, 0.0)
    diag = check_phi_necessity(d)
    assert not diag.phi_allowed and not diag.c2_vanishes and diag.consistent


def test_sign_flip_needs_other_phase():
    # opposite squeezing signs cancel at the other quadrature
    d = design_from_squeezing(0.5, 0.8)
    assert d.is_cancelling()
    with pytest.raises(ValidationError):
        design_from_squeezing(0.5, -0.8)
    flipped = SpsDesign(0.5, -0.8, math.atan(math.sqrt(abs(math.tanh(0.5) / math.tanh(-0.8)))), 0.0)
    assert check_phi_necessity(flipped).c2_vanishes


def test_f_undefined():
    with pytest.raises(ValidationError):
        SpsDesign(0.3, 0.0, 0.1, 0.0).f


@settings(max_examples=200)
@given(st.floats(0.05, 1.3), st.floats(0.05, 1.3), st.sampled_from([math.pi / 2, 3 * math.pi / 2]),
       st.booleans())
def test_cancellation_for_valid_designs(r1, r2, phi, flip):
    if flip:
        r1, r2 = -r1, -r2
    d = design_from_squeezing(r1, r2, phi)
    c = heralded_coefficients(d, 15)
    assert np.max(np.abs(c[1:])) / abs(c[0]) < 1e-10
    assert np.sum(np.abs(c) ** 2) == pytest.approx(herald_probability(r1, r2), rel=1e-12)


@settings(max_examples=200)
@given(st.floats(-1.3, 1.3), st.floats(-1.3, 1.3), st.floats(0.05, 1.5), st.floats(0, 2 * math.pi))
def test_phi_necessity(r1, r2, theta, phi):
    if min(abs(r1), abs(r2)) < 1e-3:
        return
    assert check_phi_necessity(SpsDesign(r1, r2, theta, phi)).consistent


def test_fock_heralding_one_photon_at_optimum():
    state = run_circuit(sps_circuit(optimal_design(), 21), max_tail=1.0)
    res = herald(state, HeraldPattern((1,)))
    assert abs(res.state.amplitudes[1]) ** 2 == pytest.approx(1.0, abs=1e-9)
