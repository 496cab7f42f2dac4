import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose

from curvespec.curves import (
    CornerGraph,
    Interval,
    RealInterval,
    Segment,
    UnitCircleClosed,
    real_line,
)
from curvespec.errors import (
    ClosedCurveError,
    ConfigError,
    DefectiveMatrixError,
    NumericalDomainError,
)
from curvespec.spectral import (
    LineTuple,
    MatrixClass,
    classify_matrix,
    decomposition_from_json,
    decomposition_to_json,
    default_window,
    eigenflag,
    k_blocks,
    k_subset,
    matrix_from_json,
    matrix_to_json,
    random_unitary,
    sample,
    sample_batch,
    sample_commuting_pair,
    spectra_equal,
    spectral_bottleneck_distance,
    spectral_decompose,
)
from curvespec.subspaces import line_distance


def test_rotation_matrix_projectors():
    X = np.array([[0.0, 1.0], [-1.0, 0.0]], dtype=complex)
    dec = spectral_decompose(X)
    assert dec.multiplicities == (1, 1)
    expected = {
        1j: 0.5 * np.array([[1.0, -1j], [1j, 1.0]]),
        -1j: 0.5 * np.array([[1.0, 1j], [-1j, 1.0]]),
    }
    for lam, P in zip(dec.distinct_eigenvalues, dec.idempotents):
        key = 1j if lam.imag > 0 else -1j
        assert abs(lam - key) < 1e-12
        assert_allclose(P, expected[key], atol=1e-12)
    assert dec.is_orthogonal
    dec.validate(X)


def test_diagonal_with_repeated_eigenvalue():
    dec = spectral_decompose(np.diag([2.0, 2.0, 5.0]), cluster_tol=1e-8)
    assert dec.multiplicities == (2, 1)
    assert_allclose(sorted(dec.distinct_eigenvalues, key=abs), [2.0, 5.0], atol=1e-12)
    by_val = {round(v.real): P for v, P in zip(dec.distinct_eigenvalues, dec.idempotents)}
    assert_allclose(by_val[2], np.diag([1.0, 1.0, 0.0]), atol=1e-12)
    assert_allclose(by_val[5], np.diag([0.0, 0.0, 1.0]), atol=1e-12)


def test_nilpotent_jordan_block_is_defective():
    with pytest.raises(DefectiveMatrixError):
        spectral_decompose(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_near_defective_perturbation_is_rejected():
    # eigenvectors collapse as the off-diagonal coupling dominates the split
    X = np.array([[0.0, 1.0], [0.0, 1e-14]])
    with pytest.raises(DefectiveMatrixError):
        spectral_decompose(X)


def test_classify_hermitian_is_normal_with_real_spectrum():
    rng = np.random.default_rng(3)
    g = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    H = g + g.conj().T
    cls, on_curve = classify_matrix(H, real_line())
    assert cls is MatrixClass.NORMAL
    assert on_curve


def test_classify_skewed_rotation_on_unit_circle():
    X = np.array([[0.0, 2.0], [-0.5, 0.0]])
    cls, on_curve = classify_matrix(X, UnitCircleClosed())
    assert cls is MatrixClass.SEMISIMPLE
    assert on_curve
    w = np.sort_complex(np.linalg.eigvals(X))
    assert_allclose(w, [-1j, 1j], atol=1e-12)


def test_classify_jordan_block_general():
    X = np.array([[0.0, 1.0], [0.0, 0.0]])
    cls, on_curve = classify_matrix(X, real_line())
    assert cls is MatrixClass.GENERAL
    assert on_curve


def test_class_nesting():
    assert MatrixClass.NORMAL.satisfies(MatrixClass.SEMISIMPLE)
    assert MatrixClass.NORMAL.satisfies(MatrixClass.GENERAL)
    assert MatrixClass.SEMISIMPLE.satisfies(MatrixClass.GENERAL)
    assert not MatrixClass.GENERAL.satisfies(MatrixClass.SEMISIMPLE)
    assert not MatrixClass.SEMISIMPLE.satisfies(MatrixClass.NORMAL)


def test_sample_normal_real_window():
    rng = np.random.default_rng(7)
    X = sample(real_line(), 3, MatrixClass.NORMAL, rng, Interval(0.0, 1.0))
    assert np.linalg.norm(X - X.conj().T) < 1e-12
    w = np.linalg.eigvals(X)
    assert np.all(w.real > -1e-9) and np.all(w.real < 1 + 1e-9)
    cls, on_curve = classify_matrix(X, real_line())
    assert cls.satisfies(MatrixClass.NORMAL)
    assert on_curve


def test_sample_unit_circle_normal_has_unimodular_spectrum():
    rng = np.random.default_rng(7)
    X = sample(UnitCircleClosed(), 3, MatrixClass.NORMAL, rng)
    w = np.linalg.eigvals(X)
    assert np.max(np.abs(np.abs(w) - 1.0)) < 1e-9


def test_sample_semisimple_matches_request():
    rng = np.random.default_rng(11)
    X = sample(real_line(), 4, MatrixClass.SEMISIMPLE, rng, Interval(-2.0, 2.0))
    cls, on_curve = classify_matrix(X, real_line())
    assert cls.satisfies(MatrixClass.SEMISIMPLE)
    assert on_curve


def test_sample_unbounded_window_rejected():
    with pytest.raises(ConfigError):
        sample(
            real_line(),
            3,
            MatrixClass.NORMAL,
            np.random.default_rng(0),
            Interval(0.0, np.inf, upper_closed=False),
        )


def test_sample_window_must_sit_inside_domain():
    seg = Segment(0.0 + 0.0j, 1.0 + 1.0j)
    with pytest.raises(ConfigError):
        sample(seg, 2, MatrixClass.NORMAL, np.random.default_rng(0), Interval(0.0, 2.0))


def test_degenerate_window_rejected():
    with pytest.raises(ConfigError):
        Interval(0.5, 0.5)


def test_commuting_pair_small_commutator():
    rng = np.random.default_rng(1)
    X, Y = sample_commuting_pair(
        real_line(), 3, MatrixClass.NORMAL, rng, Interval(0.0, 1.0)
    )
    assert np.linalg.norm(X @ Y - Y @ X) < 1e-10


def test_commuting_pair_shares_an_eigenframe():
    rng = np.random.default_rng(5)
    X, Y = sample_commuting_pair(
        real_line(), 2, MatrixClass.NORMAL, rng, Interval(0.0, 1.0)
    )
    _, V = np.linalg.eig(X)
    off = np.linalg.inv(V) @ Y @ V
    assert np.linalg.norm(off - np.diag(np.diag(off))) < 1e-9


def test_commuting_pair_semisimple():
    rng = np.random.default_rng(9)
    X, Y = sample_commuting_pair(
        UnitCircleClosed(), 4, MatrixClass.SEMISIMPLE, rng
    )
    assert np.linalg.norm(X @ Y - Y @ X) <= 1e-9 * np.linalg.norm(X) * np.linalg.norm(Y)


def test_sample_determinism():
    a = sample_batch(
        real_line(), 3, MatrixClass.SEMISIMPLE, np.random.default_rng(42),
        Interval(0.0, 1.0), count=3,
    )
    b = sample_batch(
        real_line(), 3, MatrixClass.SEMISIMPLE, np.random.default_rng(42),
        Interval(0.0, 1.0), count=3,
    )
    assert np.array_equal(a, b)


def test_default_windows():
    assert default_window(UnitCircleClosed()) == Interval(0.0, 2 * np.pi, upper_closed=False)
    assert default_window(real_line()) == Interval(-1.0, 1.0)
    assert default_window(Segment(0.0j, 1.0 + 0.0j)) == Interval(0.0, 1.0)
    assert default_window(RealInterval(Interval(0.0, np.inf, upper_closed=False))) == Interval(0.0, 1.0)


def test_k_subset_sorted_positions():
    dec = spectral_decompose(np.diag([3.0, 1.0, 2.0]))
    basis = k_subset(dec, real_line(), {1, 2})
    # eigenvalues sort 1 < 2 < 3, so positions 1,2 live on coordinates 2,3
    proj = basis @ basis.conj().T
    assert_allclose(proj, np.diag([0.0, 1.0, 1.0]), atol=1e-10)


def test_k_subset_everything():
    dec = spectral_decompose(np.diag([3.0, 1.0, 2.0]))
    basis = k_subset(dec, real_line(), {1, 2, 3})
    assert basis.shape == (3, 3)
    assert_allclose(basis @ basis.conj().T, np.eye(3), atol=1e-10)


def test_k_subset_multiplicity_closure():
    dec = spectral_decompose(np.diag([2.0, 2.0, 5.0]))
    basis = k_subset(dec, real_line(), {1, 2})
    proj = basis @ basis.conj().T
    assert_allclose(proj, np.diag([1.0, 1.0, 0.0]), atol=1e-10)
    # selecting one copy of the double eigenvalue pulls in its whole eigenspace
    assert k_subset(dec, real_line(), {1}).shape == (3, 2)


def test_k_subset_index_out_of_range():
    dec = spectral_decompose(np.diag([1.0, 2.0]))
    with pytest.raises(ConfigError):
        k_subset(dec, real_line(), {0, 1})
    with pytest.raises(ConfigError):
        k_subset(dec, real_line(), {3})


def test_k_subset_closed_curve_rejected():
    dec = spectral_decompose(np.diag([1.0, 1j, -1.0]))
    with pytest.raises(ClosedCurveError):
        k_subset(dec, UnitCircleClosed(), {1})


def test_k_subset_complement_is_direct():
    rng = np.random.default_rng(21)
    X = sample(real_line(), 5, MatrixClass.SEMISIMPLE, rng, Interval(0.0, 1.0))
    dec = spectral_decompose(X)
    if dec.num_clusters < 5:
        pytest.skip("coincidental eigenvalue collision")
    a = k_subset(dec, real_line(), {1, 3})
    b = k_subset(dec, real_line(), {2, 4, 5})
    stacked = np.hstack([a, b])
    sv = np.linalg.svd(stacked, compute_uv=False)
    assert sv[-1] > 1e-8


def test_k_blocks_singletons():
    dec = spectral_decompose(np.diag([1.0, 2.0, 3.0]))
    parts = k_blocks(dec, real_line(), (1, 1, 1))
    for i, blk in enumerate(parts):
        assert_allclose(blk @ blk.conj().T, np.diag(np.eye(3)[i]), atol=1e-10)


def test_k_blocks_two_rows():
    dec = spectral_decompose(np.diag([3.0, 1.0, 2.0]))
    parts = k_blocks(dec, real_line(), (2, 1))
    assert_allclose(parts[0] @ parts[0].conj().T, np.diag([0.0, 1.0, 1.0]), atol=1e-10)
    assert_allclose(parts[1] @ parts[1].conj().T, np.diag([1.0, 0.0, 0.0]), atol=1e-10)


def test_k_blocks_bad_partition():
    dec = spectral_decompose(np.diag([1.0, 2.0, 3.0]))
    with pytest.raises(ConfigError):
        k_blocks(dec, real_line(), (2, 2))
    with pytest.raises(ConfigError):
        k_blocks(dec, real_line(), (1, 2))
    with pytest.raises(ConfigError):
        k_blocks(dec, real_line(), (3, 0))


def test_k_blocks_must_respect_multiplicities():
    dec = spectral_decompose(np.diag([2.0, 2.0, 5.0]))
    with pytest.raises(ConfigError):
        k_blocks(dec, real_line(), (1, 1, 1))
    parts = k_blocks(dec, real_line(), (2, 1))
    assert parts[0].shape == (3, 2)


def test_eigenflag_diagonal():
    dec = spectral_decompose(np.diag([3.0, 1.0, 2.0]))
    flag = eigenflag(dec, real_line())
    perm = np.abs(flag.vectors)
    assert_allclose(perm, np.eye(3)[:, [1, 2, 0]], atol=1e-10)
    assert flag.orthogonal


def test_eigenflag_repeated_eigenvalue_rejected():
    dec = spectral_decompose(np.diag([2.0, 2.0, 5.0]))
    with pytest.raises(NumericalDomainError):
        eigenflag(dec, real_line())


def test_eigenflag_conjugated_lines():
    rng = np.random.default_rng(13)
    Q = random_unitary(3, rng)
    X = Q @ np.diag([1.0, 2.0, 3.0]) @ Q.conj().T
    dec = spectral_decompose(X)
    flag = eigenflag(dec, real_line())
    for i in range(3):
        assert line_distance(flag.line(i), Q[:, i]) < 1e-8


@given(perm=st.permutations(range(4)))
@settings(max_examples=24, deadline=None)
def test_eigenflag_equivariant_on_diagonal_models(perm):
    values = np.array([0.5, 1.5, 2.5, 3.5])
    dec = spectral_decompose(np.diag(values[list(perm)]))
    flag = eigenflag(dec, real_line())
    # position k of the flag is the eigenline of the k-th smallest value
    for k in range(4):
        coord = list(perm).index(k)
        assert line_distance(flag.line(k), np.eye(4)[:, coord]) < 1e-10


def test_line_tuple_validation():
    with pytest.raises(ConfigError):
        LineTuple(np.array([[2.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(ConfigError):
        v = np.array([[1.0, 1.0], [0.0, 1e-12]])
        LineTuple(v / np.linalg.norm(v, axis=0))
    with pytest.raises(ConfigError):
        v = np.array([[1.0, 1.0], [0.0, 1.0]]) / np.array([1.0, np.sqrt(2.0)])
        LineTuple(v, orthogonal=True)


def test_spectra_equal_reflexive_and_multiset():
    X = np.array([[1.0, 3.0], [0.0, 2.0]])
    assert spectra_equal(X, X)
    assert spectra_equal(np.diag([1.0, 2.0]), np.diag([2.0, 1.0]))
    assert not spectra_equal(np.diag([1.0, 2.0]), np.diag([1.0, 2.5]), tol=1e-6)


def test_spectra_equal_needs_optimal_matching():
    # greedy pairing gives max distance 0.6 here; the optimal pairing gives 0.35
    a = -0.1875 + 1j * np.sqrt(0.1225 - 0.0125**2)
    X = np.diag([0.0, a])
    Y = np.diag([0.3, -0.2])
    d = spectral_bottleneck_distance(X, Y)
    assert abs(d - 0.35) < 1e-9
    assert spectra_equal(X, Y, tol=0.4)
    assert not spectra_equal(X, Y, tol=0.3)


def test_bottleneck_distance_dimension_mismatch():
    assert spectral_bottleneck_distance(np.eye(2), np.eye(3)) == np.inf
    assert not spectra_equal(np.eye(2), np.eye(3))


def test_matrix_json_roundtrip():
    rng = np.random.default_rng(2)
    X = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    assert_allclose(matrix_from_json(matrix_to_json(X)), X)


def test_matrix_json_malformed():
    with pytest.raises(ConfigError):
        matrix_from_json({"n": 2, "entries": [[[0.0, 0.0]]]})
    with pytest.raises(ConfigError):
        matrix_from_json({"entries": []})


def test_decomposition_json_roundtrip():
    dec = spectral_decompose(np.array([[0.0, 1.0], [-1.0, 0.0]]))
    back = decomposition_from_json(decomposition_to_json(dec))
    assert_allclose(back.distinct_eigenvalues, dec.distinct_eigenvalues)
    assert back.multiplicities == dec.multiplicities
    assert_allclose(back.idempotents, dec.idempotents)
    assert back.is_orthogonal == dec.is_orthogonal
    back.validate()


_CURVES = [real_line(), UnitCircleClosed(), Segment(-1.0 + 0.0j, 1.0 + 1.0j), CornerGraph(-1.0, 1.0)]


@given(
    seed=st.integers(0, 2**31 - 1),
    n=st.integers(2, 5),
    which=st.integers(0, len(_CURVES) - 1),
    cls=st.sampled_from([MatrixClass.NORMAL, MatrixClass.SEMISIMPLE]),
)
@settings(max_examples=60, deadline=None)
def test_decomposition_invariants_on_samples(seed, n, which, cls):
    curve = _CURVES[which]
    rng = np.random.default_rng(seed)
    X = sample(curve, n, cls, rng)
    dec = spectral_decompose(X)
    dec.validate(X)
    if cls is MatrixClass.NORMAL:
        assert dec.is_orthogonal
        for p in dec.idempotents:
            assert np.linalg.norm(p - p.conj().T) < 1e-8


@given(seed=st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_normal_samples_have_orthogonal_eigenspaces(seed):
    rng = np.random.default_rng(seed)
    X = sample(real_line(), 4, MatrixClass.NORMAL, rng, Interval(0.0, 1.0))
    dec = spectral_decompose(X)
    for i in range(dec.num_clusters):
        for j in range(i + 1, dec.num_clusters):
            prod = dec.idempotents[i].conj().T @ dec.idempotents[j]
            assert np.linalg.norm(prod) < 1e-7
