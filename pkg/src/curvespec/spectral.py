"""Matrix domain: spectral decompositions, class tests, and curve-spectrum sampling.

The decomposition routine clusters eigenvalues by single linkage, builds one
idempotent per cluster, and refuses inputs that are defective beyond
tolerance.  Normal inputs take a Schur path so their idempotents come out
exactly Hermitian; everything else goes through an eigenvector basis guarded
by condition-number and reconstruction checks.

Samplers draw spectra from a parameter window on a curve and conjugate a
Haar-unitary frame (optionally skewed by a well-conditioned S) around the
diagonal.  Batch variants operate on (count, n, n) stacks throughout; the
stacked LAPACK calls are what keeps large randomized checks affordable on a
single core.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.optimize

from .curves import Curve, Interval, TAU
from .errors import (
    ClosedCurveError,
    ConfigError,
    DefectiveMatrixError,
    NumericalDomainError,
)
from .subspaces import orthonormal_columns, projector_range

__all__ = [
    "MatrixClass",
    "SpectralDecomposition",
    "LineTuple",
    "as_matrix",
    "matrix_to_json",
    "matrix_from_json",
    "spectral_decompose",
    "decomposition_to_json",
    "decomposition_from_json",
    "classify_matrix",
    "random_unitary",
    "default_window",
    "sample",
    "sample_batch",
    "sample_commuting_pair",
    "sample_commuting_pair_batch",
    "k_subset",
    "k_blocks",
    "eigenflag",
    "spectra_equal",
    "spectral_bottleneck_distance",
]

MIN_DIM = 2
MAX_DIM = 12

# Relative thresholds for the decomposition guards.
NORMALITY_RTOL = 1e-8
CLUSTER_RTOL = 1e-7
RANK_RTOL = 1e-8
BASIS_COND_LIMIT = 1e8
RECONSTRUCTION_RTOL = 1e-7

_SAMPLE_COND_LIMIT = 20.0


# ---------------------------------------------------------------------------
# matrices as values


def as_matrix(X, *, name: str = "matrix") -> np.ndarray:
    """Validate and return a square complex matrix with 2 <= n <= 12."""
    A = np.asarray(X, dtype=complex)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ConfigError(f"{name} must be square, got shape {A.shape}")
    n = A.shape[0]
    if not (MIN_DIM <= n <= MAX_DIM):
        raise ConfigError(f"{name} dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")
    if not np.all(np.isfinite(A)):
        raise ConfigError(f"{name} has non-finite entries")
    return A


def matrix_to_json(X: np.ndarray) -> dict:
    X = np.asarray(X, dtype=complex)
    entries = [[[float(z.real), float(z.imag)] for z in row] for row in X]
    return {"n": int(X.shape[0]), "entries": entries}


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        n = int(obj["n"])
        rows = obj["entries"]
        A = np.array(
            [[complex(e[0], e[1]) for e in row] for row in rows], dtype=complex
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"malformed matrix JSON: {exc}") from None
    if A.shape != (n, n):
        raise ConfigError(f"matrix JSON claims n={n} but entries are {A.shape}")
    return as_matrix(A)


class MatrixClass(enum.Enum):
    """Nested matrix classes: normal implies semisimple implies general."""

    GENERAL = "general"
    SEMISIMPLE = "semisimple"
    NORMAL = "normal"

    @property
    def _level(self) -> int:
        return {"general": 0, "semisimple": 1, "normal": 2}[self.value]

    def satisfies(self, requirement: "MatrixClass") -> bool:
        """Whether membership in this class entails the required one."""
        return self._level >= requirement._level


def _is_normal(X: np.ndarray, norm_x: float) -> bool:
    comm = X @ X.conj().T - X.conj().T @ X
    return np.linalg.norm(comm) <= NORMALITY_RTOL * max(1.0, norm_x**2)


# ---------------------------------------------------------------------------
# clustering and the decomposition core


def _cluster_components(values: np.ndarray, tol: float) -> list[np.ndarray]:
    """Single-linkage clusters at threshold tol, ordered by eigenvalue lex order."""
    m = values.size
    dist = np.abs(values[:, None] - values[None, :])
    adj = dist <= tol
    seen = np.zeros(m, dtype=bool)
    clusters = []
    for start in range(m):
        if seen[start]:
            continue
        # breadth-first sweep of the threshold graph
        frontier = np.zeros(m, dtype=bool)
        frontier[start] = True
        comp = np.zeros(m, dtype=bool)
        while frontier.any():
            comp |= frontier
            frontier = (adj[frontier].any(axis=0)) & ~comp
        seen |= comp
        clusters.append(np.flatnonzero(comp))
    reps = [values[c].mean() for c in clusters]
    order = sorted(range(len(clusters)), key=lambda k: (reps[k].real, reps[k].imag))
    return [clusters[k] for k in order]


@dataclass(eq=False)
class _CoreDecomp:
    """Similarity X = B diag(expanded values) B^{-1} with contiguous clusters."""

    values: np.ndarray
    multiplicities: tuple
    basis: np.ndarray
    basis_inv: np.ndarray
    unitary: bool
    cluster_tol: float = 0.0

    def expanded(self) -> np.ndarray:
        return np.repeat(self.values, self.multiplicities)


def _resolve_cluster_tol(cluster_tol, norm_x: float) -> float:
    if cluster_tol is None:
        return CLUSTER_RTOL * max(1.0, norm_x)
    tol = float(cluster_tol)
    if tol <= 0.0 or not np.isfinite(tol):
        raise ConfigError(f"cluster_tol must be positive and finite, got {tol}")
    return tol


def _core_decompose(X: np.ndarray, cluster_tol=None) -> _CoreDecomp:
    X = as_matrix(X)
    norm_x = np.linalg.norm(X)
    tol = _resolve_cluster_tol(cluster_tol, norm_x)

    if _is_normal(X, norm_x):
        out = _schur_core(X, tol, norm_x)
        if out is not None:
            return out
        # fall through: the Schur route can lose the reconstruction guard
        # for inputs sitting right on the normality threshold

    w, V = np.linalg.eig(X)
    clusters = _cluster_components(w, tol)
    blocks = []
    for cols in clusters:
        block = V[:, cols]
        if cols.size > 1:
            u, s, _ = np.linalg.svd(block, full_matrices=False)
            if s[-1] < RANK_RTOL * s[0]:
                raise DefectiveMatrixError(
                    f"eigenspace for clustered value {w[cols].mean():.6g} has "
                    f"numerical rank below multiplicity {cols.size}"
                )
            block = u
        blocks.append(block)
    B = np.hstack(blocks)
    sv = np.linalg.svd(B, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > BASIS_COND_LIMIT:
        raise DefectiveMatrixError(
            f"eigenvector basis condition number exceeds {BASIS_COND_LIMIT:.0e}"
        )
    Binv = np.linalg.inv(B)
    values = np.array([w[c].mean() for c in clusters])
    mults = tuple(int(c.size) for c in clusters)
    core = _CoreDecomp(values, mults, B, Binv, unitary=False, cluster_tol=tol)
    recon = (B * core.expanded()[None, :]) @ Binv
    if np.linalg.norm(recon - X) > RECONSTRUCTION_RTOL * max(norm_x, 1e-300):
        raise DefectiveMatrixError(
            "diagonalization fails to reconstruct the input at tolerance"
        )
    return core


def _schur_core(X: np.ndarray, tol: float, norm_x: float):
    T, Z = sla.schur(X, output="complex")
    d = np.diag(T)
    clusters = _cluster_components(d, tol)
    perm = np.concatenate(clusters)
    B = Z[:, perm]
    values = np.array([d[c].mean() for c in clusters])
    mults = tuple(int(c.size) for c in clusters)
    core = _CoreDecomp(values, mults, B, B.conj().T, unitary=True, cluster_tol=tol)
    recon = (B * core.expanded()[None, :]) @ B.conj().T
    if np.linalg.norm(recon - X) > RECONSTRUCTION_RTOL * max(norm_x, 1e-300):
        return None
    return core


# ---------------------------------------------------------------------------
# public decomposition


@dataclass(eq=False)
class SpectralDecomposition:
    """Clustered eigenvalues with their spectral idempotents.

    The idempotents resolve the identity, annihilate each other pairwise,
    and weighted by the eigenvalues reconstruct the decomposed matrix.
    is_orthogonal marks the Hermitian-projector case of a normal input.
    """

    distinct_eigenvalues: np.ndarray
    multiplicities: tuple
    idempotents: np.ndarray
    cluster_tol: float
    is_orthogonal: bool

    @property
    def n(self) -> int:
        return int(sum(self.multiplicities))

    @property
    def num_clusters(self) -> int:
        return len(self.multiplicities)

    def reconstruct(self) -> np.ndarray:
        return np.tensordot(self.distinct_eigenvalues, self.idempotents, axes=1)

    def validate(self, X=None) -> None:
        """Check the structural invariants, and reconstruction when X is given."""
        n = self.n
        P = self.idempotents
        ident = np.sum(P, axis=0)
        if np.linalg.norm(ident - np.eye(n)) > 1e-8 * n:
            raise NumericalDomainError("idempotents do not resolve the identity")
        for i in range(len(P)):
            for j in range(len(P)):
                prod = P[i] @ P[j]
                target = P[i] if i == j else 0.0
                scale = max(1.0, np.linalg.norm(P[i]) * np.linalg.norm(P[j]))
                if np.linalg.norm(prod - target) > 1e-8 * scale:
                    raise NumericalDomainError(
                        f"idempotent product ({i},{j}) violates annihilation"
                    )
        vals = self.distinct_eigenvalues
        if len(vals) > 1:
            gap = np.min(
                np.abs(vals[:, None] - vals[None, :])[~np.eye(len(vals), dtype=bool)]
            )
            if gap <= self.cluster_tol:
                raise NumericalDomainError(
                    "distinct eigenvalues closer than cluster_tol"
                )
        if self.is_orthogonal:
            for i, p in enumerate(P):
                if np.linalg.norm(p - p.conj().T) > 1e-8 * max(
                    1.0, np.linalg.norm(p)
                ):
                    raise NumericalDomainError(
                        f"idempotent {i} flagged orthogonal but not Hermitian"
                    )
        if X is not None:
            X = as_matrix(X)
            err = np.linalg.norm(self.reconstruct() - X)
            if err > RECONSTRUCTION_RTOL * max(np.linalg.norm(X), 1e-300):
                raise NumericalDomainError(
                    f"reconstruction error {err:.3g} exceeds tolerance"
                )


def spectral_decompose(X, cluster_tol=None) -> SpectralDecomposition:
    """Spectral decomposition of a semisimple-at-tolerance matrix.

    Eigenvalues are merged by single linkage at cluster_tol (default
    1e-7 * max(1, ||X||)); one idempotent is produced per cluster.  Raises
    DefectiveMatrixError when no adequately conditioned diagonalization
    exists.
    """
    core = _core_decompose(X, cluster_tol)
    offsets = np.concatenate([[0], np.cumsum(core.multiplicities)])
    idem = []
    for k in range(len(core.multiplicities)):
        sl = slice(offsets[k], offsets[k + 1])
        idem.append(core.basis[:, sl] @ core.basis_inv[sl, :])
    idem = np.array(idem)
    if core.unitary:
        orthogonal = True
    else:
        orthogonal = all(
            np.linalg.norm(p - p.conj().T) <= 1e-8 * max(1.0, np.linalg.norm(p))
            for p in idem
        )
    return SpectralDecomposition(
        distinct_eigenvalues=core.values,
        multiplicities=core.multiplicities,
        idempotents=idem,
        cluster_tol=core.cluster_tol,
        is_orthogonal=orthogonal,
    )


def decomposition_to_json(dec: SpectralDecomposition) -> dict:
    return {
        "distinct_eigenvalues": [
            [float(v.real), float(v.imag)] for v in dec.distinct_eigenvalues
        ],
        "multiplicities": [int(m) for m in dec.multiplicities],
        "idempotents": [matrix_to_json(p) for p in dec.idempotents],
        "cluster_tol": float(dec.cluster_tol),
        "is_orthogonal": bool(dec.is_orthogonal),
    }


def decomposition_from_json(obj: dict) -> SpectralDecomposition:
    try:
        vals = np.array(
            [complex(v[0], v[1]) for v in obj["distinct_eigenvalues"]], dtype=complex
        )
        mults = tuple(int(m) for m in obj["multiplicities"])
        idem = np.array([matrix_from_json(p) for p in obj["idempotents"]])
        return SpectralDecomposition(
            distinct_eigenvalues=vals,
            multiplicities=mults,
            idempotents=idem,
            cluster_tol=float(obj["cluster_tol"]),
            is_orthogonal=bool(obj["is_orthogonal"]),
        )
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise ConfigError(f"malformed decomposition JSON: {exc}") from None


def classify_matrix(X, curve: Curve | None = None):
    """Finest matrix class, plus whether the whole spectrum sits on the curve.

    Returns (MatrixClass, flag); the flag is None when no curve is given.
    Never raises on defective input: General is the fallback.
    """
    X = as_matrix(X)
    norm_x = np.linalg.norm(X)
    if _is_normal(X, norm_x):
        cls = MatrixClass.NORMAL
    else:
        try:
            _core_decompose(X)
            cls = MatrixClass.SEMISIMPLE
        except DefectiveMatrixError:
            cls = MatrixClass.GENERAL
    if curve is None:
        return cls, None
    w = np.linalg.eigvals(X)
    on_curve = all(curve.contains(complex(z)) for z in w)
    return cls, on_curve


# ---------------------------------------------------------------------------
# sampling


def random_unitary(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitary via QR of a complex Ginibre matrix."""
    return _random_unitaries(n, 1, rng)[0]


def _random_unitaries(n: int, count: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((count, n, n)) + 1j * rng.standard_normal((count, n, n))
    q, r = np.linalg.qr(g / np.sqrt(2.0))
    d = np.diagonal(r, axis1=-2, axis2=-1).copy()
    mod = np.abs(d)
    mod[mod == 0.0] = 1.0
    return q * (d / mod)[:, None, :]


def default_window(curve: Curve) -> Interval:
    """Bounded parameter window used when a sampler is given none."""
    dom = curve.domain
    if dom is None:
        return Interval(0.0, TAU, upper_closed=False)
    if dom.bounded:
        return dom
    lo = max(dom.lower, -1.0)
    hi = min(dom.upper, 1.0)
    return Interval(lo, hi)


def _resolve_window(curve: Curve, window) -> Interval:
    if window is None:
        return default_window(curve)
    if not isinstance(window, Interval):
        raise ConfigError("window must be an Interval")
    if not window.bounded:
        raise ConfigError("sampling window must be bounded")
    dom = curve.domain
    if dom is not None:
        lo_ok = window.lower > dom.lower or (
            window.lower == dom.lower
            and (dom.lower_closed or not window.lower_closed)
        )
        hi_ok = window.upper < dom.upper or (
            window.upper == dom.upper
            and (dom.upper_closed or not window.upper_closed)
        )
        if not (lo_ok and hi_ok):
            raise ConfigError(
                f"window {window} not contained in curve domain {dom}"
            )
    return window


def _draw_params(
    window: Interval, shape, rng: np.random.Generator
) -> np.ndarray:
    t = rng.uniform(window.lower, window.upper, size=shape)
    if not window.lower_closed:
        # an exact endpoint draw would fall outside an open window
        t[t == window.lower] = 0.5 * (window.lower + window.upper)
    return t


def _conjugate_diag(frames: np.ndarray, diag: np.ndarray) -> np.ndarray:
    return (frames * diag[:, None, :]) @ frames.conj().transpose(0, 2, 1)


def _skew_frames(
    n: int, count: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Well-conditioned non-unitary frames S = I + 0.5 * Gaussian."""
    eye = np.eye(n)
    S = np.empty((count, n, n), dtype=complex)
    todo = np.arange(count)
    while todo.size:
        g = rng.standard_normal((todo.size, n, n)) + 1j * rng.standard_normal(
            (todo.size, n, n)
        )
        cand = eye + 0.5 * g / np.sqrt(2.0)
        conds = np.linalg.cond(cand)
        good = conds <= _SAMPLE_COND_LIMIT
        S[todo[good]] = cand[good]
        todo = todo[~good]
    return S, np.linalg.inv(S)


def sample_batch(
    curve: Curve,
    n: int,
    matrix_class: MatrixClass,
    rng: np.random.Generator,
    window: Interval | None = None,
    count: int = 1,
) -> np.ndarray:
    """Stack of count independent samples with spectrum on the curve."""
    if not (MIN_DIM <= n <= MAX_DIM):
        raise ConfigError(f"dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")
    window = _resolve_window(curve, window)
    t = _draw_params(window, (count, n), rng)
    lam = curve.eval_array(t.ravel()).reshape(count, n)
    Q = _random_unitaries(n, count, rng)
    N = _conjugate_diag(Q, lam)
    if matrix_class is MatrixClass.NORMAL:
        return N
    # General requests get semisimple samples too: random Jordan structure
    # is out of sampling scope.
    S, Sinv = _skew_frames(n, count, rng)
    return S @ N @ Sinv


def sample(
    curve: Curve,
    n: int,
    matrix_class: MatrixClass,
    rng: np.random.Generator,
    window: Interval | None = None,
) -> np.ndarray:
    """One random matrix of the requested class with spectrum on the curve."""
    return sample_batch(curve, n, matrix_class, rng, window, count=1)[0]


def sample_commuting_pair_batch(
    curve: Curve,
    n: int,
    matrix_class: MatrixClass,
    rng: np.random.Generator,
    window: Interval | None = None,
    count: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """Stacks (Xs, Ys) of commuting pairs sharing an eigenframe per index."""
    if not (MIN_DIM <= n <= MAX_DIM):
        raise ConfigError(f"dimension {n} outside [{MIN_DIM}, {MAX_DIM}]")
    window = _resolve_window(curve, window)
    tx = _draw_params(window, (count, n), rng)
    ty = _draw_params(window, (count, n), rng)
    lam_x = curve.eval_array(tx.ravel()).reshape(count, n)
    lam_y = curve.eval_array(ty.ravel()).reshape(count, n)
    Q = _random_unitaries(n, count, rng)
    X = _conjugate_diag(Q, lam_x)
    Y = _conjugate_diag(Q, lam_y)
    if matrix_class is MatrixClass.NORMAL:
        return X, Y
    S, Sinv = _skew_frames(n, count, rng)
    return S @ X @ Sinv, S @ Y @ Sinv


def sample_commuting_pair(
    curve: Curve,
    n: int,
    matrix_class: MatrixClass,
    rng: np.random.Generator,
    window: Interval | None = None,
) -> tuple[np.ndarray, np.ndarray]:
    X, Y = sample_commuting_pair_batch(curve, n, matrix_class, rng, window, 1)
    return X[0], Y[0]


# ---------------------------------------------------------------------------
# curve-ordered eigenstructure


def _curve_order(dec: SpectralDecomposition, curve: Curve) -> np.ndarray:
    """Cluster indices sorted along the oriented curve."""
    if curve.domain is None:
        raise ClosedCurveError("eigenvalue ordering requires a non-closed curve")
    params = curve.invert_array(dec.distinct_eigenvalues)
    key = curve.orientation * params
    # stable sort: curve position first, original cluster index breaks ties
    return np.argsort(key, kind="stable")


def _expanded_positions(dec: SpectralDecomposition, order: np.ndarray):
    """Map each 1-based sorted position to its cluster index."""
    pos_cluster = []
    for c in order:
        pos_cluster.extend([int(c)] * dec.multiplicities[int(c)])
    return pos_cluster


def k_subset(
    dec: SpectralDecomposition, curve: Curve, indices
) -> np.ndarray:
    """Orthonormal basis of the sum of eigenspaces at sorted positions.

    Positions are 1-based along the curve order with multiplicity expansion;
    selecting any copy of a repeated eigenvalue selects its whole eigenspace.
    """
    order = _curve_order(dec, curve)
    pos_cluster = _expanded_positions(dec, order)
    n = dec.n
    sel = sorted(set(int(i) for i in indices))
    if not sel:
        return np.zeros((n, 0), dtype=complex)
    if sel[0] < 1 or sel[-1] > n:
        raise ConfigError(f"index set {sel} outside 1..{n}")
    touched = []
    for c in order:
        if any(pos_cluster[i - 1] == c for i in sel) and c not in touched:
            touched.append(int(c))
    blocks = [
        projector_range(dec.idempotents[c], dec.multiplicities[c]) for c in touched
    ]
    basis = orthonormal_columns(np.hstack(blocks))
    expect = sum(dec.multiplicities[c] for c in touched)
    if basis.shape[1] != expect:
        raise NumericalDomainError(
            f"eigenspace sum has rank {basis.shape[1]}, expected {expect}"
        )
    return basis


def k_blocks(dec: SpectralDecomposition, curve: Curve, mu) -> tuple:
    """Eigenspace sums for the contiguous row filling of a partition of n."""
    mu = [int(m) for m in mu]
    if any(m <= 0 for m in mu) or sum(mu) != dec.n:
        raise ConfigError(f"{mu} is not a partition of {dec.n}")
    if any(mu[i] < mu[i + 1] for i in range(len(mu) - 1)):
        raise ConfigError(f"partition {mu} must be non-increasing")
    order = _curve_order(dec, curve)
    pos_cluster = _expanded_positions(dec, order)
    # row boundaries must not split a cluster, else blocks would overlap
    start = 0
    for m in mu[:-1]:
        start += m
        if pos_cluster[start - 1] == pos_cluster[start]:
            raise ConfigError(
                f"partition {mu} splits an eigenvalue cluster of multiplicity "
                f"{dec.multiplicities[pos_cluster[start]]}"
            )
    out = []
    start = 0
    for m in mu:
        out.append(k_subset(dec, curve, range(start + 1, start + m + 1)))
        start += m
    return tuple(out)


@dataclass(eq=False)
class LineTuple:
    """Tuple of n independent lines in C^n, one unit vector per column."""

    vectors: np.ndarray
    orthogonal: bool = False

    def __post_init__(self):
        V = np.asarray(self.vectors, dtype=complex)
        if V.ndim != 2 or V.shape[0] != V.shape[1]:
            raise ConfigError(f"line tuple must be square, got {V.shape}")
        norms = np.linalg.norm(V, axis=0)
        if np.any(np.abs(norms - 1.0) > 1e-8):
            raise ConfigError("line tuple columns must be unit vectors")
        sv = np.linalg.svd(V, compute_uv=False)
        if sv[-1] == 0.0 or sv[0] / sv[-1] > BASIS_COND_LIMIT:
            raise ConfigError("line tuple columns must be linearly independent")
        if self.orthogonal:
            gram = V.conj().T @ V
            if np.linalg.norm(gram - np.eye(V.shape[0])) > 1e-8 * V.shape[0]:
                raise ConfigError("orthogonal flag set but lines are not orthogonal")
        self.vectors = V

    @property
    def n(self) -> int:
        return self.vectors.shape[0]

    def line(self, i: int) -> np.ndarray:
        return self.vectors[:, i]


def _fix_phase(v: np.ndarray) -> np.ndarray:
    j = int(np.argmax(np.abs(v)))
    piv = v[j]
    return v * (np.conj(piv) / abs(piv))


def eigenflag(dec: SpectralDecomposition, curve: Curve) -> LineTuple:
    """Eigenlines in curve order for a simple-spectrum decomposition."""
    if any(m != 1 for m in dec.multiplicities):
        raise NumericalDomainError(
            "eigenflag requires a simple spectrum; "
            f"multiplicities are {dec.multiplicities}"
        )
    order = _curve_order(dec, curve)
    cols = []
    for c in order:
        v = projector_range(dec.idempotents[int(c)], 1)[:, 0]
        cols.append(_fix_phase(v))
    return LineTuple(np.column_stack(cols), orthogonal=dec.is_orthogonal)


# ---------------------------------------------------------------------------
# spectrum comparison


def _greedy_match_max(D: np.ndarray) -> float:
    n = D.shape[0]
    used = np.zeros(n, dtype=bool)
    worst = 0.0
    for i in range(n):
        row = np.where(used, np.inf, D[i])
        j = int(np.argmin(row))
        worst = max(worst, row[j])
        used[j] = True
    return worst


def _bottleneck_from_matrix(D: np.ndarray) -> float:
    """Smallest achievable maximum matched distance (optimal assignment)."""
    worst = _greedy_match_max(D)
    levels = np.unique(D[D <= worst])
    lo, hi = 0, levels.size - 1
    # binary search the threshold at which a perfect matching exists
    while lo < hi:
        mid = (lo + hi) // 2
        cost = (D > levels[mid]).astype(float)
        rows, cols = scipy.optimize.linear_sum_assignment(cost)
        if cost[rows, cols].sum() == 0.0:
            hi = mid
        else:
            lo = mid + 1
    return float(levels[lo])


def spectral_bottleneck_distance(X, Y) -> float:
    """Optimal-matching distance between the two eigenvalue multisets."""
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, name="Y")
    if X.shape != Y.shape:
        return np.inf
    wx = np.linalg.eigvals(X)
    wy = np.linalg.eigvals(Y)
    return _bottleneck_from_matrix(np.abs(wx[:, None] - wy[None, :]))


def _eigs_match(wx: np.ndarray, wy: np.ndarray, tol: float) -> bool:
    D = np.abs(wx[:, None] - wy[None, :])
    if _greedy_match_max(D) <= tol:
        return True
    cost = (D > tol).astype(float)
    rows, cols = scipy.optimize.linear_sum_assignment(cost)
    return cost[rows, cols].sum() == 0.0


def spectra_equal(X, Y, tol: float = 1e-9) -> bool:
    """Whether the eigenvalue multisets match within tol under optimal pairing."""
    X = as_matrix(X, name="X")
    Y = as_matrix(Y, name="Y")
    if X.shape != Y.shape:
        return False
    return _eigs_match(np.linalg.eigvals(X), np.linalg.eigvals(Y), tol)


def _batch_greedy_match_max(D: np.ndarray) -> np.ndarray:
    """Greedy matching maxima for a (N, n, n) distance stack."""
    N, n, _ = D.shape
    work = D.copy()
    worst = np.zeros(N)
    rows = np.arange(N)
    for i in range(n):
        j = np.argmin(work[:, i, :], axis=1)
        worst = np.maximum(worst, work[rows, i, j])
        work[rows, :, j] = np.inf
    return worst
