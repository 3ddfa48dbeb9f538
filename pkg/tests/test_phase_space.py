import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate

from heraldgen.circuits import full_mesh_spec, gaussian_propagate, run_circuit, squeezed_input
from heraldgen.errors import DimensionError, ValidationError
from heraldgen.phase_space import (
    GaussianState,
    SymplecticMatrix,
    beamsplitter_symplectic,
    displacement_symplectic,
    embed,
    gaussian_wigner,
    moments_from_fock,
    phase_symplectic,
    squeezer_symplectic,
    symplectic_apply,
    symplectic_form,
    vacuum,
)


def test_vacuum_wigner_peak():
    assert gaussian_wigner(vacuum(1), [0.0, 0.0]) == pytest.approx(1 / math.pi)
    assert gaussian_wigner(vacuum(2), np.zeros(4)) == pytest.approx(1 / math.pi**2)


def test_gaussian_wigner_integrates_to_one():
    st_ = symplectic_apply(vacuum(1), squeezer_symplectic(0.5))
    val, _ = integrate.dblquad(lambda p, q: gaussian_wigner(st_, [q, p]), -10, 10, -10, 10)
    assert val == pytest.approx(1.0, abs=1e-8)


def test_uncertainty_check_rejects_subvacuum():
    with pytest.raises(ValidationError):
        GaussianState(np.zeros(2), 0.2 * np.eye(2))
    with pytest.raises(ValidationError):
        GaussianState(np.zeros(2), np.array([[1.0, 0.1], [0.0, 1.0]]))
    with pytest.raises(DimensionError):
        GaussianState(np.zeros(3), np.eye(2))


def test_symplectic_check():
    with pytest.raises(ValidationError):
        SymplecticMatrix(np.diag([2.0, 2.0]))


def test_squeezer_shrinks_q():
    V = symplectic_apply(vacuum(1), squeezer_symplectic(1.0)).V
    assert V[0, 0] == pytest.approx(0.5 * math.exp(-2))


def test_displacement_moves_mean():
    s = symplectic_apply(vacuum(1), displacement_symplectic(1 + 2j))
    assert np.allclose(s.xi, math.sqrt(2) * np.array([1, 2]))


def test_embed_and_purity():
    S = embed(beamsplitter_symplectic(0.3, 0.2) @ embed(squeezer_symplectic(0.4), (0,), 2), (0, 1), 2)
    s = symplectic_apply(vacuum(2), S)
    assert s.purity_indicator() == pytest.approx(1.0)


angles = st.floats(0, 2 * math.pi)


@given(st.floats(-1.3, 1.3), angles, angles, angles)
def test_symplectic_group_closure(r, t, p, q):
    S = (embed(phase_symplectic(q), (1,), 2) @ beamsplitter_symplectic(t, p)
         @ embed(squeezer_symplectic(r), (0,), 2))
    om = symplectic_form(2)
    assert np.allclose(S.F @ om @ S.F.T, om, atol=1e-10)


def test_moments_match_symplectic_for_single_squeezer():
    spec = full_mesh_spec([squeezed_input(0.5), squeezed_input(-0.3)], 30, [0.4], [1.0], [0.2, -0.7])
    rec = moments_from_fock(run_circuit(spec))
    g = gaussian_propagate(spec)
    assert np.max(np.abs(rec.V - g.V)) < 1e-8
    assert np.max(np.abs(rec.xi - g.xi)) < 1e-8
