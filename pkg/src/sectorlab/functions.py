"""Matrix functions: principal powers, scalar-function catalog, operator means."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import NotAccretiveError, NotPositiveDefiniteError, UnknownIdError
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    as_matrix,
    eig_general,
    eig_hermitian,
    hermitize,
    lambda_min,
    re_part,
)

__all__ = [
    "ScalarFunction",
    "Mean",
    "CHECK_GRID",
    "is_hermitian",
    "principal_power",
    "apply_hermitian_function",
    "matrix_function",
    "operator_mean",
    "adjoint_mean",
    "mean_between",
    "kantorovich",
    "get_function",
    "get_mean",
    "FUNCTION_IDS",
    "MEAN_IDS",
]

POWER_RANGE = (-1.0, 2.0)

# 20-point log grid over [1e-2, 1e2]; supermultiplicativity is checked on its
# 20 x 20 products.
CHECK_GRID = np.logspace(-2, 2, 20)
_GRID_RTOL = 1e-12


def _principal(z, t):
    return np.exp(t * np.log(z))


@dataclass(frozen=True)
class ScalarFunction:
    """A scalar function on (0, inf) that also extends to the slit plane.

    ``evaluate`` must accept both positive reals and complex arrays (the
    principal branch is used off the real axis).  Flags are validated on
    ``CHECK_GRID`` at construction.
    """

    name: str
    evaluate: Callable[[np.ndarray], np.ndarray] = field(compare=False)
    parameters: tuple = ()
    operator_monotone: bool = False
    operator_concave: bool = False
    supermultiplicative: bool = False
    normalized: bool = False

    def __post_init__(self):
        vals = np.asarray(self.evaluate(CHECK_GRID), dtype=float)
        if np.any(vals <= 0) or not np.all(np.isfinite(vals)):
            raise ValueError(f"{self.name}: must map (0, inf) into (0, inf)")
        if self.normalized and abs(float(self(1.0)) - 1.0) > 1e-14:
            raise ValueError(f"{self.name}: flagged normalized but f(1) != 1")
        if self.operator_monotone and np.any(np.diff(vals) < -_GRID_RTOL * vals[1:]):
            raise ValueError(f"{self.name}: flagged monotone but decreases on grid")
        if self.supermultiplicative:
            x, y = np.meshgrid(CHECK_GRID, CHECK_GRID)
            lhs = np.asarray(self.evaluate(x * y), dtype=float)
            rhs = np.asarray(self.evaluate(x), dtype=float) * np.asarray(self.evaluate(y), dtype=float)
            if np.any(lhs < rhs * (1 - _GRID_RTOL)):
                raise ValueError(f"{self.name}: flagged supermultiplicative but fails on grid")

    def __call__(self, x):
        return self.evaluate(x)

    @property
    def in_class_m(self) -> bool:
        return self.operator_monotone and self.normalized


def power_function(t: float) -> ScalarFunction:
    t = float(t)
    in_unit = 0.0 <= t <= 1.0
    return ScalarFunction(
        name=f"power:{t:g}",
        evaluate=lambda x, t=t: _principal(np.asarray(x), t),
        parameters=(t,),
        operator_monotone=in_unit,
        operator_concave=in_unit,
        supermultiplicative=in_unit,
        normalized=True,
    )


def _arith(x):
    return (1 + np.asarray(x)) / 2


def _harm(x):
    x = np.asarray(x)
    return 2 * x / (1 + x)


_NAMED_FUNCTIONS = {
    "arithmetic": lambda: ScalarFunction("arithmetic", _arith, (), True, True, False, True),
    "harmonic": lambda: ScalarFunction("harmonic", _harm, (), True, True, False, True),
    "geometric": lambda: power_function(0.5),
    "identity": lambda: power_function(1.0),
}

FUNCTION_IDS = ("power:<t>", *_NAMED_FUNCTIONS)


def get_function(function_id: str) -> ScalarFunction:
    """Resolve a catalog token such as ``"power:0.5"`` or ``"harmonic"``."""
    if function_id in _NAMED_FUNCTIONS:
        return _NAMED_FUNCTIONS[function_id]()
    kind, _, arg = function_id.partition(":")
    if kind == "power" and arg:
        try:
            return power_function(float(arg))
        except ValueError as exc:
            raise UnknownIdError(f"bad function id {function_id!r}: {exc}") from None
    raise UnknownIdError(f"unknown function id {function_id!r}; known: {', '.join(FUNCTION_IDS)}")


# -- matrix functions ----------------------------------------------------------


def is_hermitian(a, rtol: float = 0.0) -> bool:
    a = np.asarray(a)
    gap = np.max(np.abs(a - a.conj().T)) if a.size else 0.0
    return bool(gap <= rtol * max(np.max(np.abs(a)), 1.0))


def apply_hermitian_function(h, f, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Spectral calculus f(H) for positive definite Hermitian ``h``."""
    w, u = eig_hermitian(h)
    if w[0] <= 0:
        raise NotPositiveDefiniteError(f"smallest eigenvalue {w[0]:.3g} is not positive")
    fw = np.asarray(f(w), dtype=float)
    return hermitize((u * fw) @ u.conj().T)


def _check_accretive(a, tol):
    if lambda_min(re_part(a)) <= tol.abs_tol:
        raise NotAccretiveError("Hermitian part is not positive definite")


def matrix_function(a, f, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Principal functional calculus f(A) for accretive ``a``.

    Exactly Hermitian input goes through the Hermitian eigensolver, so that
    results on positive definite matrices match ``apply_hermitian_function``.
    """
    a = as_matrix(a)
    _check_accretive(a, tol)
    if is_hermitian(a):
        return apply_hermitian_function(a, f, tol)
    eg = eig_general(a, tol)
    return eg.reconstruct(np.asarray(f(eg.values.astype(complex)), dtype=complex))


def principal_power(a, t: float, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """A^t via the principal logarithm, for accretive A and t in [-1, 2]."""
    t = float(t)
    if not POWER_RANGE[0] <= t <= POWER_RANGE[1]:
        raise ValueError(f"exponent {t} outside [{POWER_RANGE[0]}, {POWER_RANGE[1]}]")
    a = as_matrix(a)
    if t == 1.0:
        _check_accretive(a, tol)
        return a.copy()
    if t == 0.0:
        _check_accretive(a, tol)
        return np.eye(a.shape[0], dtype=complex)
    return matrix_function(a, lambda z: _principal(z, t), tol)


def hpow(h, t: float, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """Power of a positive definite Hermitian matrix."""
    return apply_hermitian_function(h, lambda x: x**t, tol)


# -- operator means ------------------------------------------------------------


@dataclass(frozen=True)
class Mean:
    name: str
    function: ScalarFunction
    weight: float | None = None

    def __post_init__(self):
        f = self.function
        vals = np.asarray(f(CHECK_GRID), dtype=float)
        if not (f.normalized and np.all(vals > 0) and np.all(np.diff(vals) >= -_GRID_RTOL * vals[1:])):
            raise ValueError(f"{self.name}: representing function must be positive, normalized, nondecreasing")


def _weighted_arith(w):
    return ScalarFunction(f"warith:{w:g}", lambda x, w=w: (1 - w) + w * np.asarray(x), (w,), True, True, False, True)


def _weighted_harm(w):
    # ((1-w) A^{-1} + w B^{-1})^{-1}
    return ScalarFunction(
        f"wharm:{w:g}", lambda x, w=w: np.asarray(x) / ((1 - w) * np.asarray(x) + w), (w,), True, True, False, True
    )


_ADJOINT_NAMES = {"arithmetic": "harmonic", "harmonic": "arithmetic", "geometric": "geometric"}


def get_mean(mean_id: str) -> Mean:
    """Resolve ``arithmetic``, ``geometric``, ``harmonic``, ``warith:w``,
    ``wgeom:w`` or ``wharm:w``."""
    if mean_id in ("arithmetic", "geometric", "harmonic"):
        return Mean(mean_id, get_function(mean_id))
    kind, _, arg = mean_id.partition(":")
    try:
        w = float(arg)
    except ValueError:
        raise UnknownIdError(
            f"unknown mean id {mean_id!r}; known: {', '.join(MEAN_IDS)}"
        ) from None
    if not 0.0 <= w <= 1.0:
        raise UnknownIdError(f"mean weight must lie in [0, 1], got {w}")
    if kind == "warith":
        return Mean(mean_id, _weighted_arith(w), w)
    if kind == "wharm":
        return Mean(mean_id, _weighted_harm(w), w)
    if kind == "wgeom":
        return Mean(mean_id, power_function(w), w)
    raise UnknownIdError(f"unknown mean id {mean_id!r}; known: {', '.join(MEAN_IDS)}")


MEAN_IDS = ("arithmetic", "geometric", "harmonic", "warith:<w>", "wgeom:<w>", "wharm:<w>")


def adjoint_mean(m: Mean) -> Mean:
    """The adjoint mean, with representing function t / f(t).

    For symmetric means (f(t) = t f(1/t)) this coincides with
    ``(A^-1 sigma B^-1)^-1``; for weighted means it swaps the weight.
    """
    if m.name in _ADJOINT_NAMES:
        return get_mean(_ADJOINT_NAMES[m.name])
    kind, _, arg = m.name.partition(":")
    if kind == "warith":
        return get_mean(f"wharm:{1 - float(arg):g}")
    if kind == "wharm":
        return get_mean(f"warith:{1 - float(arg):g}")
    if kind == "wgeom":
        return get_mean(f"wgeom:{1 - float(arg):g}")
    f = m.function
    g = ScalarFunction(
        f"adjoint({f.name})",
        lambda x, f=f: np.asarray(x) / f(x),
        f.parameters,
        operator_monotone=f.operator_monotone,
        operator_concave=f.operator_concave,
        normalized=f.normalized,
    )
    return Mean(f"adjoint({m.name})", g, m.weight)


def operator_mean(a, b, m: Mean, tol: TolerancePolicy = DEFAULT_TOL) -> np.ndarray:
    """A sigma B = A^{1/2} f(A^{-1/2} B A^{-1/2}) A^{1/2}.

    Accretive inputs use principal powers and principal calculus for f;
    Hermitian positive definite inputs reduce to the Kubo-Ando mean.
    """
    a, b = as_matrix(a), as_matrix(b)
    _check_accretive(a, tol)
    _check_accretive(b, tol)
    if is_hermitian(a) and is_hermitian(b):
        ah = hpow(a, 0.5, tol)
        aih = hpow(a, -0.5, tol)
        return hermitize(ah @ apply_hermitian_function(hermitize(aih @ b @ aih), m.function, tol) @ ah)
    ah = principal_power(a, 0.5, tol)
    aih = principal_power(a, -0.5, tol)
    x = aih @ b @ aih
    eg = eig_general(x, tol)
    if np.any((eg.values.real <= 0) & (np.abs(eg.values.imag) <= tol.abs_tol)):
        raise NotAccretiveError("inner matrix has spectrum on the branch cut")
    fx = eg.reconstruct(np.asarray(m.function(eg.values.astype(complex)), dtype=complex))
    return ah @ fx @ ah


def mean_between(candidate: Mean, m: Mean, grid=None, rtol: float = 1e-12) -> bool:
    """True iff min(f, f*) <= f_candidate <= max(f, f*) on the check grid."""
    grid = np.logspace(-2, 2, 41) if grid is None else np.asarray(grid)
    f = np.asarray(m.function(grid), dtype=float)
    fs = grid / f
    g = np.asarray(candidate.function(grid), dtype=float)
    lo, hi = np.minimum(f, fs), np.maximum(f, fs)
    return bool(np.all(g >= lo * (1 - rtol)) and np.all(g <= hi * (1 + rtol)))


def kantorovich(m: float, M: float) -> float:
    """The Kantorovich constant (M + m)^2 / (4 m M)."""
    if not m > 0 or M < m:
        raise ValueError(f"need 0 < m <= M, got m={m}, M={M}")
    return (M + m) ** 2 / (4 * m * M)
