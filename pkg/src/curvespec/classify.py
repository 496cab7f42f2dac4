"""Black-box classification of spectrum/commutativity preservers.

A continuous preserver on normal matrices over a non-closed curve is
either a conjugation (possibly composed with transpose) or an ordering
map that freezes an output frame and only transports the sorted spectrum.
The two families are separated behaviorally: swapping two adjacent
eigenvalues across their eigenspaces either swaps the corresponding
output eigenlines (the map is permutation-equivariant) or leaves the
output lines untouched (the map factors through the spectrum alone).

Once the family is known, the conjugating matrix is reconstructed column
by column from probe operators with prescribed first eigenlines, and the
linear-vs-conjugate-linear ambiguity is resolved on a single complex
probe line.  Every reconstruction is validated on fresh holdout samples;
a failed validation downgrades the answer to unknown rather than forcing
a label.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .checking import BlackBoxMap
from .curves import Curve, punctured_unit_circle
from .errors import (
    ClosedCurveError,
    CoincidentPointsError,
    ConfigError,
    MixedWitnessError,
    NumericalDomainError,
    ReconstructionError,
)
from .maps import OrderMap
from .spectral import (
    MatrixClass,
    _curve_order,
    eigenflag,
    matrix_to_json,
    spectral_decompose,
)
from .subspaces import line_distance, orthonormal_columns

__all__ = [
    "EquivarianceVerdict",
    "equivariance_test",
    "reconstruct_conjugator",
    "PreserverType",
    "classify_preserver",
    "subspace_image",
    "ObstructionReport",
    "circle_obstruction_demo",
]

EQUIVARIANT = "equivariant"
FACTORS_THROUGH_QUOTIENT = "factors_through_quotient"

_LINE_TOL = 1e-6
_VALIDATION_TOL = 1e-6
_VALIDATION_SAMPLES = 50
_FRAME_SAMPLES = 20


@dataclass(frozen=True)
class EquivarianceVerdict:
    kind: str  # EQUIVARIANT or FACTORS_THROUGH_QUOTIENT
    witnesses: int

    def __post_init__(self):
        if self.kind not in (EQUIVARIANT, FACTORS_THROUGH_QUOTIENT):
            raise ConfigError(f"unknown verdict kind {self.kind!r}")
        if self.witnesses < 1:
            raise ConfigError("verdict needs at least one witness")


def _simple_sample(bb: BlackBoxMap, rng, attempts: int = 50):
    """Draw a domain sample with n distinct eigenvalues, plus its decomposition."""
    n = bb.domain.n
    for _ in range(attempts):
        X = bb.domain.sample_batch(rng, 1)[0]
        dec = spectral_decompose(X)
        if dec.num_clusters == n:
            return X, dec
    raise NumericalDomainError("could not draw a simple-spectrum sample")


def _adjacent_swap(X, dec, curve, j):
    """Exchange the j-th and (j+1)-th eigenvalues (in curve order) across
    their eigenspaces, keeping every eigenspace in place."""
    order = _curve_order(dec, curve)
    a, b = order[j], order[j + 1]
    va, vb = dec.distinct_eigenvalues[a], dec.distinct_eigenvalues[b]
    Pa, Pb = dec.idempotents[a], dec.idempotents[b]
    return X + (vb - va) * Pa + (va - vb) * Pb


def _witness(bb: BlackBoxMap, X, dec, j, tol):
    """One equivariance witness: 'swap', 'fix', or None (ambiguous)."""
    curve = bb.domain.curve
    FX = bb.apply(X)
    FtX = bb.apply(_adjacent_swap(X, dec, curve, j))
    L = eigenflag(spectral_decompose(FX), curve).vectors
    Lt = eigenflag(spectral_decompose(FtX), curve).vectors
    n = L.shape[1]
    others_fixed = all(
        line_distance(L[:, i], Lt[:, i]) <= tol
        for i in range(n)
        if i not in (j, j + 1)
    )
    if not others_fixed:
        return None
    swapped = (
        line_distance(L[:, j], Lt[:, j + 1]) <= tol
        and line_distance(L[:, j + 1], Lt[:, j]) <= tol
    )
    fixed = (
        line_distance(L[:, j], Lt[:, j]) <= tol
        and line_distance(L[:, j + 1], Lt[:, j + 1]) <= tol
    )
    if swapped == fixed:
        return None
    return "swap" if swapped else "fix"


def equivariance_test(
    bb: BlackBoxMap, trials: int = 20, rng=None, tol: float = _LINE_TOL
) -> EquivarianceVerdict:
    """Decide whether the map tracks eigenspaces or ignores them.

    Each trial swaps one adjacent-in-curve-order eigenvalue pair of a
    simple-spectrum sample across its eigenspaces and checks whether the
    output eigenlines swap along or stay put.  The verdict must be
    unanimous; a trial matching neither pattern, or trials disagreeing,
    is a witness conflict.
    """
    n = bb.domain.n
    if n < 3:
        raise ConfigError("equivariance dichotomy needs n >= 3")
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    if rng is None:
        rng = np.random.default_rng(0)
    counts = {"swap": 0, "fix": 0}
    for _ in range(trials):
        X, dec = _simple_sample(bb, rng)
        j = int(rng.integers(n - 1))
        w = _witness(bb, X, dec, j, tol)
        if w is None:
            raise MixedWitnessError(
                "witness matched neither the swapped nor the fixed line pattern"
            )
        counts[w] += 1
    if counts["swap"] and counts["fix"]:
        raise MixedWitnessError(
            f"contradictory witnesses: {counts['swap']} swapped, {counts['fix']} fixed"
        )
    kind = EQUIVARIANT if counts["swap"] else FACTORS_THROUGH_QUOTIENT
    return EquivarianceVerdict(kind=kind, witnesses=trials)


# ---------------------------------------------------------------------------
# conjugator reconstruction


def _probe_params(curve: Curve, window, n: int) -> np.ndarray:
    lo, hi = window.lower, window.upper
    return lo + (np.arange(1, n + 1) / (n + 1)) * (hi - lo)


def _probe_with_first_line(u: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Normal matrix with eigenline span(u) for values[0] and the rest of
    the spectrum on the orthogonal complement."""
    n = values.size
    u = u / np.linalg.norm(u)
    B = np.eye(n, dtype=complex)
    B[:, 0] = u
    Q, _ = np.linalg.qr(B)
    # qr may flip the first column's phase; pin it back to u
    Q[:, 0] = u
    Q[:, 1:] = orthonormal_columns(
        Q[:, 1:] - u[:, None] * (u.conj() @ Q[:, 1:])
    )
    return (Q * values) @ Q.conj().T


def _first_line_image(bb: BlackBoxMap, u, values) -> np.ndarray:
    """Unit vector spanning the output eigenline attached to values[0]."""
    X = _probe_with_first_line(u, values)
    FX = bb.apply(X)
    dec = spectral_decompose(FX)
    k = int(np.argmin(np.abs(dec.distinct_eigenvalues - values[0])))
    if dec.multiplicities[k] != 1:
        raise ReconstructionError("probe image eigenvalue is not simple")
    P = dec.idempotents[k]
    j = int(np.argmax(np.linalg.norm(P, axis=0)))
    v = P[:, j]
    return v / np.linalg.norm(v)


def reconstruct_conjugator(bb: BlackBoxMap, rng=None):
    """Recover (T, antilinear, residual) for an eigenspace-tracking map.

    Probes with first eigenlines span(e_i) give the columns of T up to
    scale, probes with span(e_0 + e_j) fix the relative scales, and the
    single probe span(e_0 + i e_1) separates linear from conjugate-linear
    line action.  The candidate is validated on fresh holdout samples;
    the residual is the worst relative deviation seen there.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    n = bb.domain.n
    window = bb.domain.window
    values = bb.domain.curve.eval_array(_probe_params(bb.domain.curve, window, n))
    eye = np.eye(n, dtype=complex)

    cols = [_first_line_image(bb, eye[:, i], values) for i in range(n)]
    T = np.empty((n, n), dtype=complex)
    T[:, 0] = cols[0]
    for j in range(1, n):
        w = _first_line_image(bb, (eye[:, 0] + eye[:, j]) / np.sqrt(2), values)
        coeffs, *_ = np.linalg.lstsq(
            np.column_stack([cols[0], cols[j]]), w, rcond=None
        )
        alpha, beta = coeffs
        if abs(alpha) < 1e-12 or abs(beta) < 1e-12:
            raise ReconstructionError("scale probe did not mix both columns")
        T[:, j] = (beta / alpha) * cols[j]

    w = _first_line_image(bb, (eye[:, 0] + 1j * eye[:, 1]) / np.sqrt(2), values)
    d_lin = line_distance(w, T @ (eye[:, 0] + 1j * eye[:, 1]))
    d_anti = line_distance(w, T @ (eye[:, 0] - 1j * eye[:, 1]))
    antilinear = d_anti < d_lin

    T /= _largest_entry(T)
    Tinv = np.linalg.inv(T)
    residual = 0.0
    Xs = bb.domain.sample_batch(rng, _VALIDATION_SAMPLES)
    for X in Xs:
        model = T @ (X.T if antilinear else X) @ Tinv
        residual = max(
            residual, np.linalg.norm(bb.apply(X) - model) / np.linalg.norm(X)
        )
    if residual > _VALIDATION_TOL:
        raise ReconstructionError(
            f"conjugator validation residual {residual:.3e} exceeds {_VALIDATION_TOL:g}"
        )
    return T, antilinear, float(residual)


def _largest_entry(T: np.ndarray) -> complex:
    flat = np.abs(T).ravel()
    return T.ravel()[int(np.argmax(flat))]


@dataclass
class PreserverType:
    """Classification result: the family label, its parameter, the
    validation residual, and the witness budget spent."""

    kind: str  # "conjugation" | "transpose_conjugation" | "ordering_map" | "unknown"
    T: np.ndarray | None
    antilinear: bool
    residual: float
    trials: int
    reason: str | None = None

    def to_json(self) -> dict:
        return {
            "type": self.kind,
            "T": None if self.T is None else matrix_to_json(self.T),
            "antilinear": self.antilinear,
            "residual": self.residual,
            "trials": self.trials,
            "reason": self.reason,
        }


def _recover_fixed_frame(bb: BlackBoxMap, rng):
    """Average the sorted output eigenvector matrices of a quotient map."""
    curve = bb.domain.curve
    frame = None
    for k in range(_FRAME_SAMPLES):
        X, _ = _simple_sample(bb, rng)
        F = eigenflag(spectral_decompose(bb.apply(X)), curve).vectors
        if frame is None:
            frame = F.copy()
            ref = F
        else:
            # align each column's phase to the first sample before averaging
            for j in range(F.shape[1]):
                c = ref[:, j].conj() @ F[:, j]
                if abs(c) < 1e-12:
                    raise ReconstructionError("output frames do not share columns")
                F[:, j] *= c.conjugate() / abs(c)
            frame += F
    frame /= np.linalg.norm(frame, axis=0, keepdims=True)
    return frame


def classify_preserver(
    bb: BlackBoxMap, rng=None, trials: int = 20
) -> PreserverType:
    """Label a black-box preserver as conjugation, transpose conjugation,
    or an ordering map, with its parameter; anything that fails witness
    agreement or holdout validation comes back unknown."""
    if bb.domain.n < 3:
        raise ConfigError("classification needs n >= 3")
    if bb.domain.curve.domain is None:
        raise ClosedCurveError("classification needs a non-closed curve")
    if bb.domain.matrix_class is not MatrixClass.NORMAL:
        raise ConfigError("classification runs on the normal-matrix domain")
    if rng is None:
        rng = np.random.default_rng(0)

    try:
        verdict = equivariance_test(bb, trials, rng)
    except (MixedWitnessError, NumericalDomainError) as exc:
        return PreserverType("unknown", None, False, float("inf"), trials,
                             reason=str(exc))

    if verdict.kind == EQUIVARIANT:
        try:
            T, antilinear, residual = reconstruct_conjugator(bb, rng)
        except (ReconstructionError, NumericalDomainError) as exc:
            return PreserverType("unknown", None, False, float("inf"), trials,
                                 reason=str(exc))
        kind = "transpose_conjugation" if antilinear else "conjugation"
        return PreserverType(kind, T, antilinear, residual, trials)

    try:
        frame = _recover_fixed_frame(bb, rng)
        ordering = OrderMap(bb.domain.curve, frame)
        residual = 0.0
        Xs = bb.domain.sample_batch(rng, _VALIDATION_SAMPLES)
        for X in Xs:
            residual = max(
                residual,
                np.linalg.norm(bb.apply(X) - ordering.apply(X))
                / np.linalg.norm(X),
            )
        if residual > _VALIDATION_TOL:
            return PreserverType(
                "unknown", None, False, float(residual), trials,
                reason=f"ordering-map validation residual {residual:.3e}")
    except (ReconstructionError, NumericalDomainError, ConfigError) as exc:
        return PreserverType("unknown", None, False, float("inf"), trials,
                             reason=str(exc))
    return PreserverType("ordering_map", frame, False, float(residual), trials)


# ---------------------------------------------------------------------------
# the induced subspace map


def subspace_image(bb: BlackBoxMap, V: np.ndarray) -> np.ndarray:
    """Image of the subspace span(V) under the map the preserver induces
    on sums of leading eigenspaces.

    Builds a normal operator whose d lowest (in curve order) eigenvalues
    carry span(V), applies the preserver, and reads back the span of the
    d lowest output eigenspaces.  For an eigenspace-tracking preserver
    this is well defined: the result does not depend on the basis of V
    or on the auxiliary eigenvalues.
    """
    n = bb.domain.n
    V = orthonormal_columns(np.asarray(V, dtype=complex))
    d = V.shape[1]
    if not 1 <= d <= n:
        raise ConfigError("subspace dimension out of range")
    curve = bb.domain.curve
    params = _probe_params(curve, bb.domain.window, n)
    order = np.argsort(curve.orientation * params, kind="stable")
    values = curve.eval_array(params)

    # complete V to a unitary: QR of [V | I] keeps V's span in the lead columns
    Q, _ = np.linalg.qr(np.column_stack([V, np.eye(n, dtype=complex)]))
    basis = np.column_stack([V, Q[:, d:]])
    # attach the d curve-lowest values to V's basis vectors
    diag = np.empty(n, dtype=complex)
    diag[: d] = values[order[:d]]
    diag[d:] = values[order[d:]]
    X = (basis * diag) @ basis.conj().T

    FX = bb.apply(X)
    dec = spectral_decompose(FX)
    out_order = _curve_order(dec, curve)
    blocks = []
    got = 0
    for k in out_order:
        if got >= d:
            break
        P = dec.idempotents[k]
        r = dec.multiplicities[k]
        U, s, _ = np.linalg.svd(P)
        blocks.append(U[:, :r])
        got += r
    if got != d:
        raise NumericalDomainError("output eigenspace dimensions straddle d")
    return orthonormal_columns(np.column_stack(blocks))


# ---------------------------------------------------------------------------
# the closed-circle obstruction


@dataclass
class ObstructionReport:
    spectrum: tuple
    cut_angles: tuple
    outputs: tuple
    orders: tuple
    mismatch: float
    same_gap: bool

    def to_json(self) -> dict:
        return {
            "spectrum": [[z.real, z.imag] for z in self.spectrum],
            "cut_angles": list(self.cut_angles),
            "outputs": [matrix_to_json(Y) for Y in self.outputs],
            "orders": [list(o) for o in self.orders],
            "mismatch": self.mismatch,
            "same_gap": self.same_gap,
        }


def circle_obstruction_demo(n: int, spectrum, cuts) -> ObstructionReport:
    """Show that cutting the circle in different spectral gaps produces
    genuinely different ordering maps.

    Each cut point turns the circle into an open arc starting just past
    the cut; ordering the same diagonal spectrum along the two arcs gives
    different outputs exactly when the cuts sit in different gaps between
    consecutive spectrum points.
    """
    spectrum = [complex(z) for z in spectrum]
    if len(spectrum) != n or n < 3:
        raise ConfigError("need n >= 3 spectrum points")
    angles = np.angle(spectrum)
    if any(abs(abs(z) - 1.0) > 1e-9 for z in spectrum):
        raise ConfigError("spectrum points must have unit modulus")
    if len(set(np.round(angles, 12))) != n:
        raise ConfigError("spectrum points must be distinct")
    cuts = [complex(z) for z in cuts]
    if len(cuts) != 2:
        raise ConfigError("exactly two cut points required")
    cut_angles = []
    for c in cuts:
        if abs(abs(c) - 1.0) > 1e-9:
            raise ConfigError("cut points must lie on the circle")
        if min(abs(c - z) for z in spectrum) < 1e-9:
            raise CoincidentPointsError("cut coincides with a spectrum point")
        cut_angles.append(float(np.angle(c)))

    X = np.diag(spectrum)
    outputs, orders = [], []
    for a in cut_angles:
        arc = punctured_unit_circle(a)
        Y = OrderMap(arc, np.eye(n, dtype=complex)).apply(X)
        outputs.append(Y)
        # output diagonal lists the spectrum in this arc's travel order
        order = tuple(
            int(np.argmin(np.abs(np.array(spectrum) - y))) for y in np.diag(Y)
        )
        orders.append(order)

    mismatch = float(np.linalg.norm(outputs[0] - outputs[1]))
    # the cuts share a gap iff they induce the same travel order
    same_gap = orders[0] == orders[1]
    return ObstructionReport(
        spectrum=tuple(spectrum),
        cut_angles=tuple(cut_angles),
        outputs=tuple(outputs),
        orders=tuple(orders),
        mismatch=mismatch,
        same_gap=same_gap,
    )
