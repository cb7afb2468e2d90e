import cmath
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import qutrits, su2_from
from qutrit_schmidt.core import (
    KERNEL_TOL,
    PolarizationMode,
    coefficient_matrix,
    decompose,
    kernel_residual,
    make_qutrit,
)
from qutrit_schmidt.oracle import (
    compare_decompositions,
    con_eigen_modes,
    eig_hermitian_2x2,
    reduced_density_matrix,
)
from qutrit_schmidt.transforms import apply_unitary, canonical_state

R2 = 1 / math.sqrt(2)


def test_rho_hv_is_half_identity():
    rho = reduced_density_matrix(make_qutrit(0, 1, 0))
    assert np.allclose(rho.to_array(), 0.5 * np.eye(2), atol=1e-15)


def test_rho_product_state():
    rho = reduced_density_matrix(make_qutrit(1, 0, 0))
    assert np.allclose(rho.to_array(), [[1, 0], [0, 0]], atol=1e-15)


def test_rho_matches_matrix_product(haar_states):
    for q in haar_states[:200]:
        m = coefficient_matrix(q)
        rho = reduced_density_matrix(q)
        assert np.allclose(rho.to_array(), m @ m.conj().T, atol=1e-15)
        assert rho.trace == pytest.approx(1.0, abs=1e-14)


def test_eig_matches_eigvalsh(haar_states):
    for q in haar_states[:300]:
        rho = reduced_density_matrix(q)
        (lp, vp), (lm, vm) = eig_hermitian_2x2(rho)
        ref = np.linalg.eigvalsh(rho.to_array())
        assert (lm, lp) == pytest.approx(tuple(ref), abs=1e-14)
        a = rho.to_array()
        for lam, v in ((lp, vp), (lm, vm)):
            assert np.linalg.norm(a @ v.as_array() - lam * v.as_array()) <= 1e-14


def test_con_eigen_hv():
    d = con_eigen_modes(make_qutrit(0, 1, 0))
    assert (d.lambda_plus, d.lambda_minus) == pytest.approx((0.5, 0.5), abs=1e-15)
    assert d.branch == "takagi"
    for lam, psi in d.pairs:
        assert np.linalg.norm(
            coefficient_matrix(make_qutrit(0, 1, 0)) @ psi.as_array().conj() - math.sqrt(lam) * psi.as_array()
        ) <= 1e-15
    assert abs(d.mode_plus.inner(d.mode_minus)) <= 1e-15


def test_con_eigen_c2_zero():
    q = make_qutrit(0.8 * cmath.exp(1.0j), 0, 0.6 * cmath.exp(-2.0j))
    d = con_eigen_modes(q)
    assert d.lambda_plus == pytest.approx(0.64, abs=1e-15)
    e = cmath.exp(0.5j)
    assert min(abs(d.mode_plus.alpha - s * e) for s in (1, -1)) <= 1e-15
    assert abs(d.mode_plus.beta) <= 1e-15


def _takagi_error(q, d):
    u = np.column_stack([d.mode_plus.as_array(), d.mode_minus.as_array()])
    s = np.diag([math.sqrt(d.lambda_plus), math.sqrt(d.lambda_minus)])
    return np.linalg.norm(u @ s @ u.T - coefficient_matrix(q))


def test_takagi_reconstruction(haar_states):
    for q in haar_states[:500]:
        assert _takagi_error(q, con_eigen_modes(q)) <= 1e-12


def test_takagi_reconstruction_degenerate(rng):
    for _ in range(200):
        q = apply_unitary(canonical_state(0.5, rng.uniform(-3, 3)), su2_from(rng.normal(size=4)))
        d = con_eigen_modes(q)
        assert _takagi_error(q, d) <= 1e-12
        assert abs(d.mode_plus.inner(d.mode_minus)) <= 1e-12


@settings(max_examples=300, deadline=None)
@given(qutrits())
def test_oracle_kernel_hypothesis(q):
    d = con_eigen_modes(q)
    for lam, psi in d.pairs:
        assert kernel_residual(q, lam, psi) <= KERNEL_TOL


def test_compare_identical_and_sign_flipped(haar_states):
    for q in haar_states[:100]:
        d = decompose(q)
        assert compare_decompositions(d, d, q) == 0.0
        flipped = replace(d, mode_plus=-d.mode_plus, mode_minus=-d.mode_minus)
        assert compare_decompositions(d, flipped, q) <= 1e-15


def test_compare_detects_wrong_phase():
    q = make_qutrit(0.3 + 0.2j, -0.5 + 0.4j, 0.1 - 0.6j)
    d = decompose(q)
    bad = replace(d, mode_plus=PolarizationMode(1j * d.mode_plus.alpha, 1j * d.mode_plus.beta))
    assert compare_decompositions(d, bad, q) > 0.5


def test_closed_form_agrees_with_oracle(haar_states):
    worst = max(compare_decompositions(decompose(q), con_eigen_modes(q), q) for q in haar_states)
    assert worst <= 1e-9
