"""A closed catalog of unital positive linear maps.

Each map is registered through :func:`_register`, which spot-checks positivity
on random Gram matrices and derives the ``unital`` flag from ``Phi(I)``.
Only identity, permutation congruence, principal submatrix and their
compositions carry the ``hadamard_multiplicative`` flag.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DimensionError, UnknownIdError
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    Verdict,
    as_matrix,
    hadamard,
    lambda_min,
    norm,
    re_part,
)

__all__ = [
    "PositiveMap",
    "MAP_KINDS",
    "identity_map",
    "unitary_congruence",
    "permutation_congruence",
    "isometry_compression",
    "principal_submatrix",
    "pinching",
    "trace_normalized",
    "schur_multiplier",
    "compose",
    "apply_map",
    "parse_map",
    "check_re_commutes",
    "check_hadamard_multiplicative",
    "random_unitary",
    "random_isometry",
    "random_correlation",
]

MAP_KINDS = (
    "identity",
    "unitary_congruence",
    "permutation_congruence",
    "isometry_compression",
    "principal_submatrix",
    "pinching",
    "trace_normalized",
    "schur_multiplier",
    "composition",
)

_MULTIPLICATIVE_KINDS = {"identity", "permutation_congruence", "principal_submatrix"}


@dataclass(frozen=True)
class PositiveMap:
    kind: str
    input_dim: int
    output_dim: int
    func: Callable[[np.ndarray], np.ndarray] = field(repr=False, compare=False)
    unital: bool = False
    hadamard_multiplicative: bool = False
    label: str = ""

    def __call__(self, x) -> np.ndarray:
        return apply_map(self, x)


def _register(kind, n_in, n_out, func, label, multiplicative=None):
    probe = np.random.default_rng(20240601)
    for _ in range(20):
        g = probe.standard_normal((n_in, n_in)) + 1j * probe.standard_normal((n_in, n_in))
        y = func(g.conj().T @ g)
        if lambda_min(re_part(y)) < -1e-10 * max(norm(y), 1.0):
            raise ValueError(f"{label}: positivity spot-check failed")
    unital = n_in >= 1 and norm(func(np.eye(n_in, dtype=complex)) - np.eye(n_out)) <= 1e-12
    if multiplicative is None:
        multiplicative = kind in _MULTIPLICATIVE_KINDS
    return PositiveMap(kind, n_in, n_out, func, bool(unital), bool(multiplicative), label)


def apply_map(phi: PositiveMap, x) -> np.ndarray:
    x = as_matrix(x)
    if x.shape[0] != phi.input_dim:
        raise DimensionError(f"{phi.label} expects {phi.input_dim}x{phi.input_dim} input, got {x.shape}")
    return np.asarray(phi.func(x), dtype=complex)


def identity_map(n: int) -> PositiveMap:
    return _register("identity", n, n, lambda x: x.copy(), "identity")


def unitary_congruence(u) -> PositiveMap:
    u = as_matrix(u)
    if norm(u.conj().T @ u - np.eye(u.shape[0])) > 1e-12:
        raise ValueError("unitary_congruence needs a unitary matrix")
    n = u.shape[0]
    return _register("unitary_congruence", n, n, lambda x: u @ x @ u.conj().T, "unitary")


def permutation_congruence(perm) -> PositiveMap:
    perm = np.asarray(perm, dtype=int)
    n = perm.size
    if sorted(perm.tolist()) != list(range(n)):
        raise ValueError(f"{perm.tolist()} is not a permutation of 0..{n - 1}")
    return _register(
        "permutation_congruence",
        n,
        n,
        lambda x: x[np.ix_(perm, perm)],
        "perm:" + ",".join(map(str, perm.tolist())),
    )


def isometry_compression(x) -> PositiveMap:
    """M -> X* M X for an isometry X (X*X = I)."""
    x = as_matrix(x, square=False)
    n, m = x.shape
    if norm(x.conj().T @ x - np.eye(m)) > 1e-12:
        raise ValueError("isometry_compression needs X*X = I")
    return _register("isometry_compression", n, m, lambda a: x.conj().T @ a @ x, f"compress:{n}->{m}")


def principal_submatrix(index_set, n: int) -> PositiveMap:
    idx = np.asarray(sorted(set(int(i) for i in index_set)), dtype=int)
    if idx.size == 0 or idx[0] < 0 or idx[-1] >= n:
        raise ValueError(f"index set {idx.tolist()} invalid for dimension {n}")
    return _register(
        "principal_submatrix",
        n,
        idx.size,
        lambda x: x[np.ix_(idx, idx)],
        "submatrix:" + ",".join(map(str, idx.tolist())),
    )


def pinching(block_sizes) -> PositiveMap:
    sizes = [int(b) for b in block_sizes]
    if not sizes or min(sizes) < 1:
        raise ValueError("pinching needs positive block sizes")
    n = sum(sizes)
    mask = np.zeros((n, n))
    start = 0
    for b in sizes:
        mask[start : start + b, start : start + b] = 1.0
        start += b
    return _register("pinching", n, n, lambda x: x * mask, "pinch:" + "+".join(map(str, sizes)))


def trace_normalized(n: int) -> PositiveMap:
    return _register("trace_normalized", n, n, lambda x: (np.trace(x) / n) * np.eye(n, dtype=complex), "trace")


def schur_multiplier(c) -> PositiveMap:
    """X -> C o X for a correlation matrix C (PSD, unit diagonal)."""
    c = as_matrix(c)
    if norm(c - c.conj().T) > 1e-12 or lambda_min(c) < -1e-12 or np.max(np.abs(np.diag(c) - 1)) > 1e-12:
        raise ValueError("schur_multiplier needs a correlation matrix")
    n = c.shape[0]
    return _register("schur_multiplier", n, n, lambda x: c * x, "schur")


def compose(outer: PositiveMap, inner: PositiveMap) -> PositiveMap:
    """x -> outer(inner(x))."""
    if inner.output_dim != outer.input_dim:
        raise DimensionError(f"cannot compose {outer.label} after {inner.label}")
    return _register(
        "composition",
        inner.input_dim,
        outer.output_dim,
        lambda x: outer.func(inner.func(x)),
        f"{inner.label}>{outer.label}",
        multiplicative=outer.hadamard_multiplicative and inner.hadamard_multiplicative,
    )


def random_unitary(rng, n: int) -> np.ndarray:
    z = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_isometry(rng, n: int, m: int) -> np.ndarray:
    return random_unitary(rng, n)[:, :m]


def random_correlation(rng, n: int) -> np.ndarray:
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    s = g @ g.conj().T
    d = 1 / np.sqrt(np.real(np.diag(s)))
    c = s * np.outer(d, d)
    c = (c + c.conj().T) / 2
    np.fill_diagonal(c, 1.0)
    return c


def _ints(arg: str, sep: str) -> list[int]:
    return [int(p) for p in arg.split(sep) if p.strip()]


def parse_map(map_id: str, n: int) -> PositiveMap:
    """Build a map from its string id for ``n x n`` inputs.

    Ids: ``identity``, ``perm:2,0,1``, ``perm:cycle``, ``submatrix:0,1``,
    ``trace``, ``pinch:2+2``, ``unitary:<seed>``, ``schur:<seed>``,
    ``compress:<m>:<seed>``; chain ids with ``>`` (applied left to right).
    """
    parts = [p.strip() for p in map_id.split(">") if p.strip()]
    if not parts:
        raise UnknownIdError("empty map id")
    phi = None
    dim = n
    for part in parts:
        try:
            step = _parse_one(part, dim)
        except (ValueError, IndexError) as exc:
            raise UnknownIdError(f"bad map id {part!r}: {exc}") from None
        phi = step if phi is None else compose(step, phi)
        dim = step.output_dim
    return dataclasses.replace(phi, label=map_id)


def _parse_one(token: str, n: int) -> PositiveMap:
    kind, _, arg = token.partition(":")
    if kind == "identity":
        return identity_map(n)
    if kind == "trace":
        return trace_normalized(n)
    if kind == "perm":
        perm = list(range(1, n)) + [0] if arg == "cycle" else _ints(arg, ",")
        if len(perm) != n:
            raise ValueError(f"permutation length {len(perm)} != {n}")
        return permutation_congruence(perm)
    if kind == "submatrix":
        return principal_submatrix(_ints(arg, ","), n)
    if kind == "pinch":
        sizes = _ints(arg, "+")
        if sum(sizes) != n:
            raise ValueError(f"block sizes sum to {sum(sizes)}, expected {n}")
        return pinching(sizes)
    if kind == "unitary":
        return unitary_congruence(random_unitary(np.random.default_rng(int(arg or 0)), n))
    if kind == "schur":
        return schur_multiplier(random_correlation(np.random.default_rng(int(arg or 0)), n))
    if kind == "compress":
        m_str, _, seed = arg.partition(":")
        return isometry_compression(random_isometry(np.random.default_rng(int(seed or 0)), n, int(m_str)))
    raise ValueError(
        "unknown map kind; known: identity, perm, submatrix, trace, pinch, unitary, schur, compress"
    )


def check_re_commutes(phi: PositiveMap, a, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Residual ||Phi(Re A) - Re(Phi(A))||_F."""
    a = as_matrix(a)
    res = norm(apply_map(phi, re_part(a)) - re_part(apply_map(phi, a)), "frobenius")
    thr = tol.threshold(norm(a, "frobenius"))
    return Verdict(res <= thr, res, thr)


def check_hadamard_multiplicative(phi: PositiveMap, a, b, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Residual ||Phi(A o B) - Phi(A) o Phi(B)||_F (a finding, not an error, when large)."""
    lhs = apply_map(phi, hadamard(a, b))
    rhs = hadamard(apply_map(phi, a), apply_map(phi, b))
    res = norm(lhs - rhs, "frobenius")
    thr = tol.threshold(max(norm(lhs, "frobenius"), norm(rhs, "frobenius")))
    return Verdict(res <= thr, res, thr)
