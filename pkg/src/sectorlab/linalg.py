"""Dense complex matrix primitives.

Matrices are plain ``numpy`` arrays of dtype ``complex128``.  Hermitian
results are re-symmetrized before they are returned so that downstream
eigensolvers always stay on the Hermitian path.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .errors import (
    DimensionError,
    EigenConvergenceError,
    IllConditionedError,
    NonFiniteError,
)

__all__ = [
    "TolerancePolicy",
    "DEFAULT_TOL",
    "Verdict",
    "EigGeneral",
    "as_matrix",
    "hermitize",
    "hadamard",
    "kronecker",
    "canonical_isometry",
    "compress",
    "cartesian",
    "re_part",
    "im_part",
    "loewner_leq",
    "lambda_min",
    "lambda_max",
    "eig_hermitian",
    "eig_general",
    "norm",
    "commutation_matrix",
    "matrix_to_json",
    "matrix_from_json",
    "load_matrix",
    "dump_matrix",
]

NormKind = Literal["spectral", "frobenius", "trace"]


@dataclass(frozen=True)
class TolerancePolicy:
    """Mixed absolute/relative tolerances used by every order comparison."""

    abs_tol: float = 1e-9
    rel_tol: float = 1e-8
    eig_condition_cap: float = 1e8

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "eig_condition_cap"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be strictly positive, got {value!r}")

    def threshold(self, scale: float) -> float:
        """Allowed negative slack for a comparison at magnitude ``scale``."""
        return self.abs_tol + self.rel_tol * scale

    def to_dict(self) -> dict:
        return {
            "abs_tol": self.abs_tol,
            "rel_tol": self.rel_tol,
            "eig_condition_cap": self.eig_condition_cap,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "TolerancePolicy":
        return cls(**{k: float(v) for k, v in data.items()})


DEFAULT_TOL = TolerancePolicy()


@dataclass(frozen=True)
class Verdict:
    ok: bool
    residual: float
    threshold: float = 0.0

    def __bool__(self):
        return self.ok


@dataclass(frozen=True)
class EigGeneral:
    values: np.ndarray
    vectors: np.ndarray
    condition: float

    def reconstruct(self, mapped: np.ndarray | None = None) -> np.ndarray:
        vals = self.values if mapped is None else mapped
        return (self.vectors * vals) @ np.linalg.inv(self.vectors)


def as_matrix(a, *, square: bool = True) -> np.ndarray:
    """Coerce ``a`` to a finite complex 2-d array."""
    m = np.array(a, dtype=complex)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2 or m.size == 0:
        raise DimensionError(f"expected a non-empty 2-d matrix, got shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise NonFiniteError("matrix has NaN or Inf entries")
    return m


def hermitize(h) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    return (h + h.conj().T) / 2


def hadamard(a, b) -> np.ndarray:
    """Entrywise (Schur) product."""
    a, b = as_matrix(a, square=False), as_matrix(b, square=False)
    if a.shape != b.shape:
        raise DimensionError(f"hadamard: shape mismatch {a.shape} vs {b.shape}")
    return a * b


def kronecker(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, square=False), as_matrix(b, square=False))


def canonical_isometry(n: int) -> np.ndarray:
    """The n^2 x n isometry sending e_j to e_j (x) e_j."""
    if n < 1:
        raise ValueError("n must be >= 1")
    v = np.zeros((n * n, n), dtype=complex)
    v[np.arange(n) * (n + 1), np.arange(n)] = 1.0
    return v


def compress(x, m) -> np.ndarray:
    """Return X* M X."""
    x = np.asarray(x, dtype=complex)
    return x.conj().T @ np.asarray(m, dtype=complex) @ x


def commutation_matrix(n: int, m: int) -> np.ndarray:
    """Permutation K with K (A (x) B) K^T = B (x) A for A n x n, B m x m."""
    k = np.zeros((n * m, n * m))
    for i in range(n):
        for j in range(m):
            k[j * n + i, i * m + j] = 1.0
    return k


def cartesian(a) -> tuple[np.ndarray, np.ndarray]:
    """Split ``a`` into Hermitian parts (R, S) with a = R + iS."""
    a = as_matrix(a)
    ah = a.conj().T
    return hermitize((a + ah) / 2), hermitize((a - ah) / 2j)


def re_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return (a + a.conj().T) / 2


def im_part(a) -> np.ndarray:
    a = np.asarray(a, dtype=complex)
    return hermitize((a - a.conj().T) / 2j)


def _eigvalsh(h) -> np.ndarray:
    h = hermitize(h)
    if not np.all(np.isfinite(h)):
        raise NonFiniteError("non-finite entries in Hermitian matrix")
    try:
        return np.linalg.eigvalsh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc


def lambda_min(h) -> float:
    return float(_eigvalsh(h)[0])


def lambda_max(h) -> float:
    return float(_eigvalsh(h)[-1])


def loewner_leq(h1, h2, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Decide ``h1 <= h2`` in the Loewner order.

    The residual is the smallest eigenvalue of ``h2 - h1``; the verdict is
    true when it is no more negative than the instance-scaled threshold.
    """
    h1, h2 = as_matrix(h1), as_matrix(h2)
    if h1.shape != h2.shape:
        raise DimensionError(f"loewner_leq: shape mismatch {h1.shape} vs {h2.shape}")
    residual = lambda_min(h2 - h1)
    scale = max(norm(h1, "spectral"), norm(h2, "spectral"))
    thr = tol.threshold(scale)
    return Verdict(residual >= -thr, residual, thr)


def eig_hermitian(h) -> tuple[np.ndarray, np.ndarray]:
    """Ascending eigenvalues and orthonormal eigenvectors of a Hermitian matrix."""
    h = hermitize(as_matrix(h))
    try:
        w, u = np.linalg.eigh(h)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    return w, u


def eig_general(a, tol: TolerancePolicy = DEFAULT_TOL) -> EigGeneral:
    """Diagonalize ``a`` and certify the eigenbasis.

    Raises IllConditionedError when the eigenvector matrix has condition
    number above ``tol.eig_condition_cap`` or the reconstruction misses
    by more than ``tol.rel_tol`` relative to ``||a||``.
    """
    a = as_matrix(a)
    try:
        w, p = np.linalg.eig(a)
    except np.linalg.LinAlgError as exc:
        raise EigenConvergenceError(str(exc)) from exc
    kappa = float(np.linalg.cond(p))
    if not np.isfinite(kappa) or kappa > tol.eig_condition_cap:
        raise IllConditionedError(f"eigenvector condition {kappa:.3g} exceeds cap")
    eg = EigGeneral(w, p, kappa)
    scale = max(norm(a, "spectral"), np.finfo(float).tiny)
    if norm(eg.reconstruct() - a, "spectral") > tol.rel_tol * scale:
        raise IllConditionedError("eigendecomposition does not reconstruct its input")
    return eg


def norm(a, kind: NormKind = "spectral") -> float:
    a = np.asarray(a, dtype=complex)
    if kind == "frobenius":
        return float(np.linalg.norm(a, "fro"))
    sv = np.linalg.svd(a, compute_uv=False)
    if kind == "spectral":
        return float(sv[0]) if sv.size else 0.0
    if kind == "trace":
        return float(sv.sum())
    raise ValueError(f"unknown norm kind {kind!r}")


# -- matrix file format ------------------------------------------------------


def matrix_to_json(a) -> dict:
    a = np.asarray(a, dtype=complex)
    if a.ndim != 2:
        raise DimensionError("only 2-d matrices serialize")
    out = {"dim": int(a.shape[0]), "re": a.real.tolist(), "im": a.imag.tolist()}
    if a.shape[0] != a.shape[1]:
        out["cols"] = int(a.shape[1])
    return out


def matrix_from_json(obj: dict) -> np.ndarray:
    try:
        re = np.asarray(obj["re"], dtype=float)
        im = np.asarray(obj.get("im", np.zeros_like(re)), dtype=float)
        dim = int(obj["dim"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"malformed matrix object: {exc}") from exc
    if re.ndim != 2 or re.shape != im.shape or re.shape[0] != dim:
        raise ValueError("matrix object has inconsistent shapes")
    if "cols" not in obj and re.shape[1] != dim:
        raise ValueError("matrix object is not square")
    return as_matrix(re + 1j * im, square="cols" not in obj)


def load_matrix(path) -> np.ndarray:
    with open(path, encoding="utf-8") as fh:
        return matrix_from_json(json.load(fh))


def dump_matrix(a, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(matrix_to_json(a), fh)
        fh.write("\n")
