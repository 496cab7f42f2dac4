"""The canonical spectrum/commutativity preservers and their compositions.

Four building blocks: conjugation by a fixed invertible frame, transpose
conjugation, the curve-ordering map that sorts the spectrum into a fixed
eigenspace chain, and the involution that conjugates every eigenvalue
against its own spectral idempotents.  Compositions apply left to right.

Every map has a vectorized apply_batch over (count, n, n) stacks.  The
batch paths take an eigvals-only shortcut when all eigenvalues in a row are
pairwise separated (n distinct eigenvalues force semisimplicity, so the
full decomposition guard is redundant there); rows with clustered or
suspicious spectra fall back to the per-matrix route and its checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import Curve, curve_from_json, curve_to_json
from .errors import ClosedCurveError, ConfigError
from .spectral import (
    RECONSTRUCTION_RTOL,
    _core_decompose,
    _resolve_cluster_tol,
    as_matrix,
    matrix_from_json,
    matrix_to_json,
)

__all__ = [
    "CanonicalMap",
    "Conj",
    "TransposeConj",
    "OrderMap",
    "Rho",
    "Compose",
    "rho",
    "eigen_conj",
    "compose",
    "map_to_json",
    "map_from_json",
]

FRAME_COND_LIMIT = 1e10


def rho(X, cluster_tol=None) -> np.ndarray:
    """Adjoint of the eigenvalue-conjugated decomposition: (sum conj(l) P_l)*.

    Fixes normal matrices; on X = R N R^{-1} with R positive and N normal it
    returns R^{-1} N R; an involution on semisimple matrices.  Raises
    DefectiveMatrixError when X has no decomposition at tolerance.
    """
    core = _core_decompose(X, cluster_tol)
    d = core.expanded()
    # (B diag(conj d) Binv)^* with the diagonal's adjoint undoing the conjugation
    return (core.basis_inv.conj().T * d[None, :]) @ core.basis.conj().T


def eigen_conj(X, cluster_tol=None) -> np.ndarray:
    """Conjugate every eigenvalue, keep every spectral idempotent."""
    core = _core_decompose(X, cluster_tol)
    d = np.conj(core.expanded())
    return (core.basis * d[None, :]) @ core.basis_inv


def _min_row_gap(w: np.ndarray) -> np.ndarray:
    """Per-row minimum pairwise eigenvalue distance for a (N, n) stack."""
    D = np.abs(w[:, :, None] - w[:, None, :])
    n = w.shape[1]
    D[:, np.arange(n), np.arange(n)] = np.inf
    return D.min(axis=(1, 2))


def _frame_with_inverse(T) -> tuple[np.ndarray, np.ndarray]:
    T = as_matrix(T, name="frame")
    sv = np.linalg.svd(T, compute_uv=False)
    if sv[-1] == 0.0 or sv[0] / sv[-1] > FRAME_COND_LIMIT:
        raise ConfigError(
            f"frame condition number exceeds {FRAME_COND_LIMIT:.0e}; not usable"
        )
    return T, np.linalg.inv(T)


@dataclass(frozen=True)
class CanonicalMap:
    """Base for the canonical preserver variants; immutable, pure apply."""

    def apply(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def apply_batch(self, Xs: np.ndarray) -> np.ndarray:
        Xs = np.asarray(Xs, dtype=complex)
        return np.array([self.apply(X) for X in Xs])

    def __call__(self, X: np.ndarray) -> np.ndarray:
        return self.apply(X)


def _check_dim(X: np.ndarray, T: np.ndarray) -> None:
    if X.shape[0] != T.shape[0]:
        raise ConfigError(
            f"input dimension {X.shape[0]} does not match frame dimension {T.shape[0]}"
        )


@dataclass(frozen=True)
class Conj(CanonicalMap):
    """X -> T X T^{-1}."""

    T: np.ndarray

    def __post_init__(self):
        T, Tinv = _frame_with_inverse(self.T)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "_Tinv", Tinv)

    def apply(self, X):
        X = as_matrix(X)
        _check_dim(X, self.T)
        return self.T @ X @ self._Tinv

    def apply_batch(self, Xs):
        return self.T @ np.asarray(Xs, dtype=complex) @ self._Tinv


@dataclass(frozen=True)
class TransposeConj(CanonicalMap):
    """X -> T X^t T^{-1}."""

    T: np.ndarray

    def __post_init__(self):
        T, Tinv = _frame_with_inverse(self.T)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "_Tinv", Tinv)

    def apply(self, X):
        X = as_matrix(X)
        _check_dim(X, self.T)
        return self.T @ X.T @ self._Tinv

    def apply_batch(self, Xs):
        Xs = np.asarray(Xs, dtype=complex)
        return self.T @ Xs.transpose(0, 2, 1) @ self._Tinv


@dataclass(frozen=True)
class OrderMap(CanonicalMap):
    """Sort the spectrum along the curve into the fixed eigenspace chain of T.

    The output is T diag(sorted eigenvalues, multiplicities contiguous)
    T^{-1}: its k-th sorted eigenspace is always the span of the k-th block
    of columns of T, independent of the input.
    """

    curve: Curve
    T: np.ndarray

    def __post_init__(self):
        if self.curve.domain is None:
            raise ClosedCurveError(
                "ordering along a closed curve is not defined; cut it first"
            )
        T, Tinv = _frame_with_inverse(self.T)
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "_Tinv", Tinv)

    def _sorted_values(self, X) -> np.ndarray:
        core = _core_decompose(X)
        params = self.curve.invert_array(core.values)
        order = np.argsort(self.curve.orientation * params, kind="stable")
        return np.repeat(
            core.values[order], np.asarray(core.multiplicities)[order]
        )

    def apply(self, X):
        X = as_matrix(X)
        _check_dim(X, self.T)
        d = self._sorted_values(X)
        return (self.T * d[None, :]) @ self._Tinv

    def apply_batch(self, Xs):
        Xs = np.asarray(Xs, dtype=complex)
        _check_dim(Xs[0], self.T)
        w = np.linalg.eigvals(Xs)
        norms = np.linalg.norm(Xs, axis=(1, 2))
        tols = np.array([_resolve_cluster_tol(None, s) for s in norms])
        fast = _min_row_gap(w) > tols
        out = np.empty_like(Xs)
        if fast.any():
            wf = w[fast]
            params = self.curve.invert_array(wf.ravel()).reshape(wf.shape)
            order = np.argsort(self.curve.orientation * params, axis=1, kind="stable")
            d = np.take_along_axis(wf, order, axis=1)
            out[fast] = (self.T * d[:, None, :]) @ self._Tinv
        for i in np.flatnonzero(~fast):
            out[i] = self.apply(Xs[i])
        return out


@dataclass(frozen=True)
class Rho(CanonicalMap):
    """The eigenvalue-conjugation involution; see rho()."""

    def apply(self, X):
        return rho(X)

    def apply_batch(self, Xs):
        Xs = np.asarray(Xs, dtype=complex)
        w, V = np.linalg.eig(Xs)
        norms = np.linalg.norm(Xs, axis=(1, 2))
        tols = np.array([_resolve_cluster_tol(None, s) for s in norms])
        fast = _min_row_gap(w) > tols
        out = np.empty_like(Xs)
        if fast.any():
            idx = np.flatnonzero(fast)
            Vf = V[idx]
            wf = w[idx]
            Vinv = np.linalg.inv(Vf)
            recon = (Vf * wf[:, None, :]) @ Vinv
            err = np.linalg.norm(recon - Xs[idx], axis=(1, 2))
            good = err <= RECONSTRUCTION_RTOL * np.maximum(norms[idx], 1e-300)
            ok = idx[good]
            sub = good.nonzero()[0]
            out[ok] = (
                Vinv[sub].conj().transpose(0, 2, 1) * wf[sub][:, None, :]
            ) @ Vf[sub].conj().transpose(0, 2, 1)
            fast = np.zeros_like(fast)
            fast[ok] = True
        for i in np.flatnonzero(~fast):
            out[i] = rho(Xs[i])
        return out


@dataclass(frozen=True)
class Compose(CanonicalMap):
    """Left-to-right composition: parts[0] is applied first."""

    parts: tuple

    def __post_init__(self):
        parts = tuple(self.parts)
        if not parts:
            raise ConfigError("composition needs at least one map")
        if not all(isinstance(p, CanonicalMap) for p in parts):
            raise ConfigError("composition parts must be canonical maps")
        object.__setattr__(self, "parts", parts)

    def apply(self, X):
        Y = as_matrix(X)
        for p in self.parts:
            Y = p.apply(Y)
        return Y

    def apply_batch(self, Xs):
        Ys = np.asarray(Xs, dtype=complex)
        for p in self.parts:
            Ys = p.apply_batch(Ys)
        return Ys


def compose(maps) -> CanonicalMap:
    """Composition of a nonempty list, applied left to right."""
    maps = tuple(maps)
    if len(maps) == 1:
        return maps[0]
    return Compose(maps)


# ---------------------------------------------------------------------------
# serialization


def map_to_json(m: CanonicalMap) -> dict:
    if isinstance(m, Conj):
        return {"variant": "conj", "T": matrix_to_json(m.T)}
    if isinstance(m, TransposeConj):
        return {"variant": "transpose_conj", "T": matrix_to_json(m.T)}
    if isinstance(m, OrderMap):
        return {
            "variant": "order",
            "curve": curve_to_json(m.curve),
            "T": matrix_to_json(m.T),
        }
    if isinstance(m, Rho):
        return {"variant": "rho"}
    if isinstance(m, Compose):
        return {"variant": "compose", "parts": [map_to_json(p) for p in m.parts]}
    raise ConfigError(f"unknown canonical map {type(m).__name__}")


def map_from_json(obj: dict) -> CanonicalMap:
    try:
        variant = obj["variant"]
        if variant == "conj":
            return Conj(matrix_from_json(obj["T"]))
        if variant == "transpose_conj":
            return TransposeConj(matrix_from_json(obj["T"]))
        if variant == "order":
            return OrderMap(curve_from_json(obj["curve"]), matrix_from_json(obj["T"]))
        if variant == "rho":
            return Rho()
        if variant == "compose":
            return Compose(tuple(map_from_json(p) for p in obj.get("parts", [])))
    except (TypeError, KeyError) as exc:
        raise ConfigError(f"malformed map JSON: missing {exc}") from None
    raise ConfigError(f"unknown map variant {variant!r}")
