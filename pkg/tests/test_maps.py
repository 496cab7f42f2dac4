import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from curvespec.curves import Interval, UnitCircleClosed, real_line, unit_circle_arc
from curvespec.errors import (
    ClosedCurveError,
    ConfigError,
    DefectiveMatrixError,
    OffCurveError,
)
from curvespec.maps import (
    Compose,
    Conj,
    OrderMap,
    Rho,
    TransposeConj,
    compose,
    eigen_conj,
    map_from_json,
    map_to_json,
    rho,
)
from curvespec.spectral import (
    MatrixClass,
    random_unitary,
    sample,
    sample_batch,
    sample_commuting_pair,
    spectra_equal,
    spectral_decompose,
)
from curvespec.subspaces import line_distance


def _random_frame(n, rng, scale=1.0):
    return np.eye(n) + scale * (
        rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    ) / np.sqrt(2.0)


def test_rho_skewed_rotation_oracle():
    X = np.array([[0.0, 2.0], [-0.5, 0.0]])
    expected = np.array([[0.0, 0.5], [-2.0, 0.0]])
    assert_allclose(rho(X), expected, atol=1e-12)


def test_rho_on_positive_frame_conjugate():
    rng = np.random.default_rng(8)
    for _ in range(5):
        Q = random_unitary(3, rng)
        R = Q @ np.diag(rng.uniform(0.5, 2.0, 3)) @ Q.conj().T
        N = random_unitary(3, rng)
        X = R @ N @ np.linalg.inv(R)
        expected = np.linalg.inv(R) @ N @ R
        assert np.linalg.norm(rho(X) - expected) <= 1e-8 * np.linalg.norm(X)


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=25, deadline=None)
def test_rho_fixes_normal_matrices(seed):
    rng = np.random.default_rng(seed)
    X = sample(UnitCircleClosed(), 3, MatrixClass.NORMAL, rng)
    assert np.linalg.norm(rho(X) - X) <= 1e-8 * np.linalg.norm(X)


@given(seed=st.integers(0, 2**31 - 1), n=st.integers(2, 5))
@settings(max_examples=40, deadline=None)
def test_rho_is_an_involution(seed, n):
    rng = np.random.default_rng(seed)
    X = sample(real_line(), n, MatrixClass.SEMISIMPLE, rng, Interval(-1.0, 1.0))
    assert np.linalg.norm(rho(rho(X)) - X) <= 1e-6 * np.linalg.norm(X)


def test_rho_preserves_spectrum():
    rng = np.random.default_rng(17)
    X = sample(UnitCircleClosed(), 4, MatrixClass.SEMISIMPLE, rng)
    assert spectra_equal(X, rho(X), 1e-6 * np.linalg.norm(X))


def test_rho_defective_input_rejected():
    with pytest.raises(DefectiveMatrixError):
        rho(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_eigen_conj_fixes_hermitian():
    rng = np.random.default_rng(2)
    g = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    H = g + g.conj().T
    assert np.linalg.norm(eigen_conj(H) - H) <= 1e-8 * np.linalg.norm(H)


def test_eigen_conj_diagonal():
    assert_allclose(eigen_conj(np.diag([1j, -1j])), np.diag([-1j, 1j]), atol=1e-12)


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_eigen_conj_is_rho_adjoint(seed):
    rng = np.random.default_rng(seed)
    X = sample(unit_circle_arc(0.0), 3, MatrixClass.SEMISIMPLE, rng)
    lhs = eigen_conj(X)
    rhs = rho(X).conj().T
    assert np.linalg.norm(lhs - rhs) <= 1e-7 * np.linalg.norm(X)


def test_order_map_sorts_diagonal():
    om = OrderMap(real_line(), np.eye(3))
    assert_allclose(om.apply(np.diag([3.0, 1.0, 2.0])), np.diag([1.0, 2.0, 3.0]), atol=1e-12)


def test_order_map_reversed_orientation():
    om = OrderMap(real_line().reversed(), np.eye(3))
    assert_allclose(om.apply(np.diag([3.0, 1.0, 2.0])), np.diag([3.0, 2.0, 1.0]), atol=1e-12)


def test_order_map_repeated_eigenvalues_contiguous():
    om = OrderMap(real_line(), np.eye(3))
    assert_allclose(om.apply(np.diag([5.0, 2.0, 2.0])), np.diag([2.0, 2.0, 5.0]), atol=1e-10)


def test_order_map_idempotent_in_action():
    rng = np.random.default_rng(4)
    T = _random_frame(3, rng, 0.5)
    om = OrderMap(real_line(), T)
    X = sample(real_line(), 3, MatrixClass.NORMAL, rng, Interval(0.0, 1.0))
    once = om.apply(X)
    twice = om.apply(once)
    assert np.linalg.norm(twice - once) <= 1e-8 * np.linalg.norm(once)


def test_order_map_output_eigenspaces_are_input_independent():
    rng = np.random.default_rng(12)
    T = _random_frame(3, rng, 0.5)
    om = OrderMap(real_line(), T)
    outs = []
    for _ in range(2):
        X = sample(real_line(), 3, MatrixClass.SEMISIMPLE, rng, Interval(0.0, 1.0))
        dec = spectral_decompose(om.apply(X))
        order = np.argsort(dec.distinct_eigenvalues.real)
        lines = [dec.idempotents[k] for k in order]
        outs.append(lines)
    for Pa, Pb in zip(*outs):
        assert np.linalg.norm(Pa - Pb) < 1e-6


def test_order_map_off_curve_spectrum_rejected():
    om = OrderMap(real_line(), np.eye(2))
    with pytest.raises(OffCurveError):
        om.apply(np.diag([1.0 + 0.5j, 2.0]))


def test_order_map_defective_rejected():
    om = OrderMap(real_line(), np.eye(2))
    with pytest.raises(DefectiveMatrixError):
        om.apply(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_order_map_closed_curve_rejected():
    with pytest.raises(ClosedCurveError):
        OrderMap(UnitCircleClosed(), np.eye(2))


def test_transpose_conj_plain_transpose():
    tc = TransposeConj(np.eye(2))
    assert_allclose(tc.apply(np.array([[1.0, 2.0], [0.0, 3.0]])), np.array([[1.0, 0.0], [2.0, 3.0]]))


def test_transpose_conj_unfolds_as_conj_of_transpose():
    rng = np.random.default_rng(9)
    T = _random_frame(4, rng)
    tc = TransposeConj(T)
    cj = Conj(T)
    X = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    assert_allclose(tc.apply(X), cj.apply(X.T), atol=1e-12)


def test_conj_preserves_spectrum():
    rng = np.random.default_rng(6)
    T = _random_frame(3, rng)
    cj = Conj(T)
    X = sample(real_line(), 3, MatrixClass.NORMAL, rng, Interval(0.0, 1.0))
    assert spectra_equal(X, cj.apply(X), 1e-6 * np.linalg.norm(X))


def test_ill_conditioned_frame_rejected():
    T = np.diag([1.0, 1e-11])
    with pytest.raises(ConfigError):
        Conj(T)
    with pytest.raises(ConfigError):
        TransposeConj(T)
    with pytest.raises(ConfigError):
        OrderMap(real_line(), T)


def test_dimension_mismatch_rejected():
    cj = Conj(np.eye(2))
    with pytest.raises(ConfigError):
        cj.apply(np.eye(3))


def test_compose_left_to_right():
    rng = np.random.default_rng(3)
    T = _random_frame(3, rng, 0.5)
    m = Compose((Conj(T), Rho()))
    X = sample(real_line(), 3, MatrixClass.NORMAL, rng, Interval(0.0, 1.0))
    assert_allclose(m.apply(X), rho(Conj(T).apply(X)), atol=1e-10)


def test_compose_inverse_pair_is_identity():
    rng = np.random.default_rng(10)
    T = _random_frame(3, rng, 0.5)
    m = Compose((Conj(T), Conj(np.linalg.inv(T))))
    X = rng.standard_normal((3, 3))
    assert np.linalg.norm(m.apply(X) - X) <= 1e-8 * np.linalg.norm(X)


def test_compose_rho_rho_identity_on_semisimple():
    rng = np.random.default_rng(14)
    m = Compose((Rho(), Rho()))
    X = sample(real_line(), 4, MatrixClass.SEMISIMPLE, rng, Interval(0.0, 1.0))
    assert np.linalg.norm(m.apply(X) - X) <= 1e-6 * np.linalg.norm(X)


def test_compose_order_order_equals_order():
    rng = np.random.default_rng(15)
    T = _random_frame(3, rng, 0.5)
    om = OrderMap(real_line(), T)
    m = Compose((om, om))
    X = sample(real_line(), 3, MatrixClass.SEMISIMPLE, rng, Interval(0.0, 1.0))
    assert np.linalg.norm(m.apply(X) - om.apply(X)) <= 1e-7 * np.linalg.norm(X)


def test_compose_empty_rejected():
    with pytest.raises(ConfigError):
        Compose(())
    with pytest.raises(ConfigError):
        Compose((Rho(), "not a map"))


def test_compose_helper_unwraps_singleton():
    m = compose([Rho()])
    assert isinstance(m, Rho)


def _variant_pool(rng):
    T = _random_frame(3, rng, 0.4)
    return [
        Conj(T),
        TransposeConj(T),
        OrderMap(real_line(), T),
        Rho(),
        Compose((OrderMap(real_line(), T), Rho(), Conj(T))),
    ]


@pytest.mark.parametrize("k", range(5))
def test_apply_batch_matches_sequential(k):
    rng = np.random.default_rng(100 + k)
    m = _variant_pool(rng)[k]
    Xs = sample_batch(
        real_line(), 3, MatrixClass.SEMISIMPLE, rng, Interval(0.0, 1.0), count=12
    )
    seq = np.array([m.apply(X) for X in Xs])
    bat = m.apply_batch(Xs)
    assert np.max(np.abs(seq - bat)) < 1e-9 * max(1.0, np.max(np.abs(seq)))


def test_apply_batch_handles_repeated_eigenvalues():
    om = OrderMap(real_line(), np.eye(3))
    Xs = np.array([np.diag([5.0, 2.0, 2.0]), np.diag([1.0, 3.0, 2.0])], dtype=complex)
    bat = om.apply_batch(Xs)
    assert_allclose(bat[0], np.diag([2.0, 2.0, 5.0]), atol=1e-10)
    assert_allclose(bat[1], np.diag([1.0, 2.0, 3.0]), atol=1e-12)


@given(seed=st.integers(0, 2**31 - 1), k=st.integers(0, 4))
@settings(max_examples=40, deadline=None)
def test_all_variants_preserve_spectrum_and_commutativity(seed, k):
    rng = np.random.default_rng(seed)
    m = _variant_pool(rng)[k]
    X, Y = sample_commuting_pair(
        real_line(), 3, MatrixClass.NORMAL, rng, Interval(0.0, 1.0)
    )
    fx, fy = m.apply(X), m.apply(Y)
    assert spectra_equal(X, fx, max(1e-12, 1e-6 * np.linalg.norm(X)))
    comm = np.linalg.norm(fx @ fy - fy @ fx)
    assert comm <= max(1e-12, 1e-6 * np.linalg.norm(X) * np.linalg.norm(Y))


def test_rho_commutativity_on_semisimple_pairs():
    # the normal-operator commutation transfer behind the involution's claim
    rng = np.random.default_rng(77)
    for _ in range(10):
        X, Y = sample_commuting_pair(
            unit_circle_arc(0.0), 3, MatrixClass.SEMISIMPLE, rng
        )
        fx, fy = rho(X), rho(Y)
        comm = np.linalg.norm(fx @ fy - fy @ fx)
        assert comm <= 1e-6 * np.linalg.norm(X) * np.linalg.norm(Y)


@pytest.mark.parametrize("k", range(5))
def test_map_json_roundtrip(k):
    rng = np.random.default_rng(200 + k)
    m = _variant_pool(rng)[k]
    back = map_from_json(map_to_json(m))
    X = sample(real_line(), 3, MatrixClass.SEMISIMPLE, rng, Interval(0.0, 1.0))
    assert_allclose(back.apply(X), m.apply(X), atol=1e-12)


def test_map_json_malformed():
    with pytest.raises(ConfigError):
        map_from_json({"variant": "spiral"})
    with pytest.raises(ConfigError):
        map_from_json({"variant": "conj"})
    with pytest.raises(ConfigError):
        map_from_json({})
