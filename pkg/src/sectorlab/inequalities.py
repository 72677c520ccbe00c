"""One checkable predicate per Hadamard-product inequality.

Every predicate verifies its side conditions from the inputs alone, computes
both sides, and reports a signed residual: the smallest eigenvalue of
``RHS - LHS`` for Loewner claims, ``bound - value`` for norm claims.  When
a claim is a chain, the binding link (the one closest to failing) supplies
the reported residual and all links are kept in ``links``.

Inputs that miss a side condition are not errors; the outcome comes back
with ``hypotheses_ok=False`` and a ``filter_reason``.
"""

from __future__ import annotations

import functools
import inspect
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import (
    EigenConvergenceError,
    IllConditionedError,
    NotAccretiveError,
    NotPositiveDefiniteError,
    UnknownIdError,
)
from .functions import (
    Mean,
    ScalarFunction,
    apply_hermitian_function,
    get_function,
    get_mean,
    hpow,
    is_hermitian,
    kantorovich,
    matrix_function,
    mean_between,
    operator_mean,
    principal_power,
)
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    as_matrix,
    canonical_isometry,
    commutation_matrix,
    compress,
    hadamard,
    hermitize,
    im_part,
    lambda_max,
    lambda_min,
    matrix_from_json,
    matrix_to_json,
    norm,
    re_part,
)
from .maps import PositiveMap, apply_map, parse_map
from .sector import SectorMatrix, in_sector

__all__ = [
    "CheckOutcome",
    "FILTER_REASONS",
    "THEOREM_IDS",
    "CHECKERS",
    "REMARK_A",
    "REMARK_B",
    "encode_witness",
    "decode_witness",
    "replay_witness",
]

FILTER_REASONS = (
    "not-in-sector",
    "not-accretive",
    "not-positive-definite",
    "sign-condition-miss",
    "ill-conditioned",
    "singular-product",
    "bounds-miss",
    "map-capability",
    "function-capability",
    "mean-not-between",
    "not-isometry",
)

REMARK_A = np.array([[1 - 1j, 1 + 1j], [-1 + 1j, 1 + 1j]])
REMARK_B = np.array([[1 + 1j, 1 + 1j], [-1 + 1j, 1 - 1j]])


@dataclass
class CheckOutcome:
    theorem_id: str
    hypotheses_ok: bool
    residual: float
    passed: bool
    witness: dict
    notes: list[str] = field(default_factory=list)
    threshold: float = 0.0
    filter_reason: str | None = None
    links: dict[str, float] = field(default_factory=dict)
    values: dict = field(default_factory=dict)
    difference: np.ndarray | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        def num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {
            "theorem_id": self.theorem_id,
            "hypotheses_ok": self.hypotheses_ok,
            "residual": num(self.residual),
            "threshold": num(self.threshold),
            "pass": self.passed,
            "filter_reason": self.filter_reason,
            "links": {k: num(v) for k, v in self.links.items()},
            "values": self.values,
            "notes": list(self.notes),
            "witness": self.witness,
        }


class _Filtered(Exception):
    def __init__(self, reason: str, note: str = ""):
        super().__init__(reason)
        self.reason = reason
        self.note = note


@dataclass
class _Link:
    name: str
    residual: float
    threshold: float
    difference: np.ndarray | None = None


@dataclass
class _Result:
    links: list[_Link]
    notes: list[str] = field(default_factory=list)
    values: dict = field(default_factory=dict)
    difference: np.ndarray | None = None


# -- witness (de)serialization -------------------------------------------------


def _encode_value(v):
    if isinstance(v, SectorMatrix):
        return matrix_to_json(v.matrix)
    if isinstance(v, np.ndarray):
        return matrix_to_json(v)
    if isinstance(v, PositiveMap):
        return v.label
    if isinstance(v, (ScalarFunction, Mean)):
        return v.name
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_encode_value(x) for x in v]
    return v


def encode_witness(**kwargs) -> dict:
    return {k: _encode_value(v) for k, v in kwargs.items()}


_MAP_KEYS = {"phi"}
_FUNCTION_KEYS = {"f"}
_MEAN_KEYS = {"sigma", "sigma1", "sigma2"}


def decode_witness(witness: dict) -> dict:
    """Inverse of :func:`encode_witness`; maps are rebuilt for the witness dimension."""
    out = {}
    dim = None
    for k, v in witness.items():
        if isinstance(v, dict) and "re" in v:
            out[k] = matrix_from_json(v)
            if dim is None and out[k].shape[0] == out[k].shape[1]:
                dim = out[k].shape[0]
        else:
            out[k] = v
    for k in _FUNCTION_KEYS & out.keys():
        out[k] = get_function(out[k])
    for k in _MEAN_KEYS & out.keys():
        out[k] = get_mean(out[k])
    for k in _MAP_KEYS & out.keys():
        out[k] = parse_map(out[k], dim)
    return out


# -- checker plumbing ----------------------------------------------------------

CHECKERS: dict[str, Callable[..., CheckOutcome]] = {}


def _checker(theorem_id: str):
    def deco(fn):
        sig = inspect.signature(fn)

        @functools.wraps(fn)
        def wrapper(*args, tol: TolerancePolicy = DEFAULT_TOL, **kwargs):
            bound = sig.bind(*args, **kwargs)
            bound.apply_defaults()
            params = {k: v for k, v in bound.arguments.items() if k != "tol"}
            witness = encode_witness(**params)
            try:
                res = fn(**params, tol=tol)
            except _Filtered as f:
                return _filtered(theorem_id, witness, f.reason, f.note)
            except (IllConditionedError, EigenConvergenceError) as exc:
                return _filtered(theorem_id, witness, "ill-conditioned", str(exc))
            except NotAccretiveError as exc:
                return _filtered(theorem_id, witness, "not-accretive", str(exc))
            return _assemble(theorem_id, witness, res)

        wrapper.theorem_id = theorem_id
        CHECKERS[theorem_id] = wrapper
        return wrapper

    return deco


def _filtered(theorem_id, witness, reason, note=""):
    return CheckOutcome(
        theorem_id=theorem_id,
        hypotheses_ok=False,
        residual=math.nan,
        passed=False,
        witness=witness,
        notes=[note] if note else [],
        filter_reason=reason,
    )


def _assemble(theorem_id, witness, res: _Result) -> CheckOutcome:
    binding = min(res.links, key=lambda l: l.residual + l.threshold)
    passed = binding.residual >= -binding.threshold
    diff = res.difference if res.difference is not None else binding.difference
    return CheckOutcome(
        theorem_id=theorem_id,
        hypotheses_ok=True,
        residual=float(binding.residual),
        passed=bool(passed),
        witness=witness,
        notes=list(res.notes),
        threshold=float(binding.threshold),
        links={l.name: float(l.residual) for l in res.links},
        values=res.values,
        difference=diff,
    )


def _le(name, lhs, rhs, tol) -> _Link:
    """Loewner link ``lhs <= rhs``."""
    lhs, rhs = hermitize(lhs), hermitize(rhs)
    diff = rhs - lhs
    scale = max(norm(lhs), norm(rhs))
    return _Link(name, lambda_min(diff), tol.threshold(scale), diff)


def _norm_le(name, value, bound, tol) -> _Link:
    return _Link(name, bound - value, tol.threshold(max(abs(value), abs(bound))))


def _require_pd(tol, **mats):
    out = []
    for name, x in mats.items():
        x = as_matrix(x.matrix if isinstance(x, SectorMatrix) else x)
        if not is_hermitian(x, 1e-12):
            raise NotPositiveDefiniteError(f"{name} is not Hermitian")
        x = hermitize(x)
        if lambda_min(x) <= tol.abs_tol:
            raise NotPositiveDefiniteError(f"{name} is not positive definite")
        out.append(x)
    return out


def _sectors(tol, theta, *mats):
    """Certify every input; return the matrices and the common angle."""
    out, angles = [], []
    for x in mats:
        s = x if isinstance(x, SectorMatrix) else SectorMatrix.certify(x, tol=tol)
        out.append(s.matrix)
        angles.append(s.theta)
    common = max(angles)
    if theta is not None:
        if not all(in_sector(m, theta, tol) for m in out):
            raise _Filtered("not-in-sector", f"an input lies outside S_{theta:g}")
        common = min(common, float(theta))
    if common >= math.pi / 2:
        raise _Filtered("not-in-sector", "angle reaches pi/2")
    return out, common


def _sign(s, tol) -> str:
    thr = tol.threshold(norm(s))
    lo, hi = lambda_min(s), lambda_max(s)
    if lo >= -thr and hi <= thr:
        return "zero"
    if lo >= -thr:
        return "psd"
    if hi <= thr:
        return "nsd"
    return "indefinite"


def _require_sign(s, want, tol, what):
    got = _sign(s, tol)
    if got != "zero" and got != want:
        raise _Filtered("sign-condition-miss", f"{what} is {got}, need {want}")


def _inv(x, tol, reason="singular-product"):
    if np.linalg.cond(x) > tol.eig_condition_cap:
        raise _Filtered(reason, "matrix is numerically singular")
    return np.linalg.inv(x)


def _rpart(x):
    return re_part(x)


def _check_exponent_reversed(r):
    if not (-1 < r < 0 or 1 < r < 2):
        raise ValueError(f"r must lie in (-1, 0) or (1, 2), got {r}")


# -- elementary facts ----------------------------------------------------------


@_checker("le17")
def check_le17(A, B, theta=None, *, tol=DEFAULT_TOL):
    """Re(A o B) against Re A o Re B, branch chosen by the sign of Im A o Im B."""
    (a, b), _ = _sectors(tol, theta, A, B)
    s = hadamard(im_part(a), im_part(b))
    sign = _sign(s, tol)
    ra_rb = hadamard(_rpart(a), _rpart(b))
    r_ab = _rpart(hadamard(a, b))
    ident = norm((ra_rb - r_ab) - s, "frobenius")
    notes = [f"identity residual {ident:.3e}"]
    if sign == "indefinite":
        raise _Filtered("sign-condition-miss", "Im A o Im B is indefinite")
    if sign in ("psd", "zero"):
        link = _le("0-17", r_ab, ra_rb, tol)
    else:
        link = _le("1-17", ra_rb, r_ab, tol)
    return _Result([link], notes, {"branch": link.name, "identity_residual": ident})


@_checker("neg_le17")
def check_neg_le17(A, B, *, tol=DEFAULT_TOL):
    """Negative control: Re(A o B) <= Re A o Re B with the sign hypothesis dropped."""
    a, b = as_matrix(A), as_matrix(B)
    for x in (a, b):
        if lambda_min(_rpart(x)) <= tol.abs_tol:
            raise _Filtered("not-accretive")
    return _Result([_le("claim", _rpart(hadamard(a, b)), hadamard(_rpart(a), _rpart(b)), tol)])


@_checker("e302")
def check_e302(A, t, theta=None, *, tol=DEFAULT_TOL):
    """cos^{2t} Re(A^t) <= (Re A)^t <= Re(A^t) for t in [0, 1]."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    return _power_links(A, t, theta, tol)


@_checker("e29")
def check_e29(A, t, theta=None, *, tol=DEFAULT_TOL):
    """Re(A^t) <= (Re A)^t <= cos^{2t} Re(A^t) for t in [-1, 0]."""
    if not -1 <= t <= 0:
        raise ValueError("t must lie in [-1, 0]")
    return _power_links(A, t, theta, tol)


def _power_links(A, t, theta, tol):
    (a,), th = _sectors(tol, theta, A)
    re_pow = _rpart(principal_power(a, t, tol))
    pow_re = apply_hermitian_function(_rpart(a), lambda x: x**t, tol)
    c = math.cos(th) ** (2 * t)
    if t >= 0:
        links = [_le("lower", c * re_pow, pow_re, tol), _le("upper", pow_re, re_pow, tol)]
    else:
        links = [_le("lower", re_pow, pow_re, tol), _le("upper", pow_re, c * re_pow, tol)]
    return _Result(links, values={"theta": th})


# -- convex combinations and powers --------------------------------------------


@_checker("chan301")
def check_chan301(A, B, C, D, alpha, beta, r, *, tol=DEFAULT_TOL):
    """(aA+bB)^r o (aC+bD)^s >= a(A^r o C^s) + b(B^r o D^s), r + s = 1."""
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    a, b, c, d = _require_pd(tol, A=A, B=B, C=C, D=D)
    s = 1 - r
    lhs = alpha * hadamard(hpow(a, r), hpow(c, s)) + beta * hadamard(hpow(b, r), hpow(d, s))
    rhs = hadamard(hpow(alpha * a + beta * b, r), hpow(alpha * c + beta * d, s))
    return _Result([_le("301", lhs, rhs, tol)])


@_checker("t0_303")
def check_t0_303(A, B, C, D, alpha, beta, r, theta=None, *, tol=DEFAULT_TOL):
    if not 0 < r < 1:
        raise ValueError("r must lie in (0, 1)")
    (a, b, c, d), th = _sectors(tol, theta, A, B, C, D)
    s = 1 - r
    ar, cs = principal_power(a, r, tol), principal_power(c, s, tol)
    br, ds = principal_power(b, r, tol), principal_power(d, s, tol)
    _require_sign(hadamard(im_part(ar), im_part(cs)), "psd", tol, "Im A^r o Im C^s")
    _require_sign(hadamard(im_part(br), im_part(ds)), "psd", tol, "Im B^r o Im D^s")
    lhs = _rpart(alpha * hadamard(ar, cs) + beta * hadamard(br, ds))
    rhs = hadamard(
        _rpart(principal_power(alpha * a + beta * b, r, tol)),
        _rpart(principal_power(alpha * c + beta * d, s, tol)),
    ) / math.cos(th) ** 2
    return _Result([_le("303", lhs, rhs, tol)], values={"theta": th})


def _kron_sides(a, b, c, d, alpha, beta, r, tol):
    lhs = np.kron(hpow(alpha * a + beta * b, r, tol), hpow(alpha * c + beta * d, 1 - r, tol))
    rhs = alpha * np.kron(hpow(a, r, tol), hpow(c, 1 - r, tol)) + beta * np.kron(
        hpow(b, r, tol), hpow(d, 1 - r, tol)
    )
    return lhs, rhs


@_checker("p1_321")
def check_p1_321(A, B, C, D, alpha, beta, r, via_substitution=False, *, tol=DEFAULT_TOL):
    """(aA+bB)^r (x) (aC+bD)^{1-r} <= a(A^r (x) C^{1-r}) + b(B^r (x) D^{1-r}).

    With ``via_substitution`` and r in (1, 2) the check is evaluated at
    1 - r with the roles of (A, B) and (C, D) swapped, then mapped back by
    the commutation permutation.
    """
    _check_exponent_reversed(r)
    a, b, c, d = _require_pd(tol, A=A, B=B, C=C, D=D)
    if via_substitution and r > 1:
        lhs, rhs = _kron_sides(c, d, a, b, alpha, beta, 1 - r, tol)
        n = a.shape[0]
        k = commutation_matrix(n, n)
        lhs, rhs = k @ lhs @ k.T, k @ rhs @ k.T
    else:
        lhs, rhs = _kron_sides(a, b, c, d, alpha, beta, r, tol)
    return _Result([_le("321", lhs, rhs, tol)])


@_checker("t1_308")
def check_t1_308(A, B, C, D, alpha, beta, r, *, tol=DEFAULT_TOL):
    _check_exponent_reversed(r)
    a, b, c, d = _require_pd(tol, A=A, B=B, C=C, D=D)
    lhs = hadamard(hpow(alpha * a + beta * b, r, tol), hpow(alpha * c + beta * d, 1 - r, tol))
    rhs = alpha * hadamard(hpow(a, r, tol), hpow(c, 1 - r, tol)) + beta * hadamard(
        hpow(b, r, tol), hpow(d, 1 - r, tol)
    )
    link = _le("308", lhs, rhs, tol)
    klhs, krhs = _kron_sides(a, b, c, d, alpha, beta, r, tol)
    v = canonical_isometry(a.shape[0])
    coherence = norm(compress(v, krhs - klhs) - link.difference, "frobenius")
    return _Result([link], [f"compression coherence {coherence:.3e}"], {"compression_residual": coherence})


@_checker("e305")
def check_e305(A, B, C, D, alpha, beta, r, theta=None, *, tol=DEFAULT_TOL):
    _check_exponent_reversed(r)
    (a, b, c, d), th = _sectors(tol, theta, A, B, C, D)
    s = 1 - r
    ar, cs = principal_power(a, r, tol), principal_power(c, s, tol)
    br, ds = principal_power(b, r, tol), principal_power(d, s, tol)
    _require_sign(hadamard(im_part(ar), im_part(cs)), "nsd", tol, "Im A^r o Im C^(1-r)")
    _require_sign(hadamard(im_part(br), im_part(ds)), "nsd", tol, "Im B^r o Im D^(1-r)")
    lhs = hadamard(hpow(_rpart(alpha * a + beta * b), r, tol), hpow(_rpart(alpha * c + beta * d), s, tol))
    rhs = _rpart(alpha * hadamard(ar, cs) + beta * hadamard(br, ds)) / math.cos(th) ** 2
    return _Result([_le("305", lhs, rhs, tol)], values={"theta": th})


def _jc(f, X1, Y1, X2, Y2, weight, tol):
    if not 0 < weight < 1:
        raise ValueError("weight must lie in (0, 1)")
    x1, y1, x2, y2 = _require_pd(tol, X1=X1, Y1=Y1, X2=X2, Y2=Y2)
    w = weight
    lhs = f(w * x1 + (1 - w) * x2, w * y1 + (1 - w) * y2)
    rhs = w * f(x1, y1) + (1 - w) * f(x2, y2)
    return _Result([_le("midpoint", lhs, rhs, tol)])


@_checker("jc_L1")
def check_jc_L1(X1, Y1, X2, Y2, weight=0.5, *, tol=DEFAULT_TOL):
    """Joint convexity of (A, B) -> B* A^{-1} B."""
    return _jc(lambda a, b: hermitize(b.conj().T @ np.linalg.solve(a, b)), X1, Y1, X2, Y2, weight, tol)


@_checker("jc_p1")
def check_jc_p1(X1, Y1, X2, Y2, r, weight=0.5, *, tol=DEFAULT_TOL):
    """Joint convexity of (A, B) -> A^r (x) B^{1-r}, r in (-1, 0) or (1, 2)."""
    _check_exponent_reversed(r)
    return _jc(lambda a, b: np.kron(hpow(a, r, tol), hpow(b, 1 - r, tol)), X1, Y1, X2, Y2, weight, tol)


def check_joint_convexity(kind: str, X1, Y1, X2, Y2, weight=0.5, r=None, tol=DEFAULT_TOL):
    if kind == "BAinvB":
        return check_jc_L1(X1, Y1, X2, Y2, weight, tol=tol)
    if kind == "kron_power":
        return check_jc_p1(X1, Y1, X2, Y2, r, weight, tol=tol)
    raise ValueError(f"unknown joint-convexity kind {kind!r}")


# -- positive maps and operator functions --------------------------------------


@_checker("remark")
def check_remark(*, tol=DEFAULT_TOL):
    """The fixed 2x2 pair where Re Phi(A o B) = Re Phi(A) o Re Phi(B) fails (Phi = id).

    Passes when the equality is refuted by a spectral gap above 0.5.  The
    difference is indefinite, which is recorded rather than judged.
    """
    a, b = REMARK_A, REMARK_B
    lhs = hadamard(_rpart(a), _rpart(b))
    rhs = _rpart(hadamard(a, b))
    diff = hermitize(rhs - lhs)
    eigs = np.linalg.eigvalsh(diff)
    gap = norm(diff)
    rel = "indefinite" if eigs[0] < -tol.abs_tol and eigs[-1] > tol.abs_tol else "definite"
    return _Result(
        [_Link("equality_refuted", gap - 0.5, 0.0, diff)],
        notes=[f"difference spectrum {np.round(eigs, 12).tolist()} ({rel})"],
        values={
            "re_phi_a_hadamard_re_phi_b": matrix_to_json(lhs),
            "re_phi_hadamard": matrix_to_json(rhs),
            "re_hadamard_spectrum": np.linalg.eigvalsh(rhs).tolist(),
            "difference_spectrum": eigs.tolist(),
            "difference_norm": gap,
            "relation": rel,
        },
    )


def _require_multiplicative(phi: PositiveMap):
    if not (phi.unital and phi.hadamard_multiplicative):
        raise _Filtered("map-capability", f"{phi.label} is not unital and Hadamard-multiplicative")


@_checker("e62")
def check_e62(phi, A, B, theta=None, *, tol=DEFAULT_TOL):
    """Re Phi(A o B) >= Re Phi(A) o Re Phi(B) when Im A o Im B <= 0."""
    _require_multiplicative(phi)
    (a, b), _ = _sectors(tol, theta, A, B)
    _require_sign(hadamard(im_part(a), im_part(b)), "nsd", tol, "Im A o Im B")
    lhs = hadamard(_rpart(apply_map(phi, a)), _rpart(apply_map(phi, b)))
    rhs = _rpart(apply_map(phi, hadamard(a, b)))
    return _Result([_le("62", lhs, rhs, tol)])


@_checker("e24")
def check_e24(f, A, theta=None, *, tol=DEFAULT_TOL):
    """f(Re A) <= Re f(A) <= sec^2(theta) f(Re A) for f operator monotone with f(1) = 1."""
    if not f.in_class_m:
        raise _Filtered("function-capability", f"{f.name} is not operator monotone and normalized")
    (a,), th = _sectors(tol, theta, A)
    f_re = apply_hermitian_function(_rpart(a), f, tol)
    re_f = _rpart(matrix_function(a, f, tol))
    links = [_le("lower", f_re, re_f, tol), _le("upper", re_f, f_re / math.cos(th) ** 2, tol)]
    return _Result(links, values={"theta": th})


def _require_supermultiplicative(f: ScalarFunction):
    if not (f.supermultiplicative and f.operator_concave and f.operator_monotone):
        raise _Filtered("function-capability", f"{f.name} is not a supermultiplicative operator concave function")


@_checker("e39")
def check_e39(f, phi, A, B, *, tol=DEFAULT_TOL):
    """f(Phi(A o B)) >= Phi(f(A) o f(B)) for positive definite A, B."""
    _require_supermultiplicative(f)
    _require_multiplicative(phi)
    a, b = _require_pd(tol, A=A, B=B)
    lhs = apply_map(phi, hadamard(apply_hermitian_function(a, f, tol), apply_hermitian_function(b, f, tol)))
    rhs = apply_hermitian_function(hermitize(apply_map(phi, hadamard(a, b))), f, tol)
    return _Result([_le("39", lhs, rhs, tol)])


@_checker("t4")
def check_t4(f, phi, A, B, theta=None, *, tol=DEFAULT_TOL):
    """Re Phi(f(A)) o Re Phi(f(B)) <= sec^4(theta) Re f(Phi(A o B))."""
    _require_supermultiplicative(f)
    _require_multiplicative(phi)
    (a, b), th = _sectors(tol, theta, A, B)
    _require_sign(hadamard(im_part(a), im_part(b)), "nsd", tol, "Im A o Im B")
    x = apply_map(phi, hadamard(a, b))
    if lambda_min(_rpart(x)) <= tol.abs_tol:
        raise _Filtered("not-accretive", "Phi(A o B) is not accretive")
    lhs = hadamard(
        _rpart(apply_map(phi, matrix_function(a, f, tol))),
        _rpart(apply_map(phi, matrix_function(b, f, tol))),
    )
    rhs = _rpart(matrix_function(x, f, tol)) / math.cos(th) ** 4
    return _Result([_le("t4", lhs, rhs, tol)], values={"theta": th})


def _mean_parts(phi, a, b, m, M, sigma, sigma1, sigma2, tol):
    for cand in (sigma1, sigma2):
        if not mean_between(cand, sigma):
            raise _Filtered("mean-not-between", f"{cand.name} is not between {sigma.name} and its adjoint")
    if not phi.unital:
        raise _Filtered("map-capability", f"{phi.label} is not unital")
    if not 0 < m <= M:
        raise ValueError("need 0 < m <= M")
    for x in (a, b):
        w = np.linalg.eigvalsh(_rpart(x))
        thr = tol.threshold(M)
        if w[0] < m - thr or w[-1] > M + thr:
            raise _Filtered("bounds-miss", f"Re spectrum [{w[0]:.4g}, {w[-1]:.4g}] not inside [{m}, {M}]")
    re1 = _rpart(operator_mean(a, b, sigma1, tol))
    re2 = _rpart(operator_mean(a, b, sigma2, tol))
    x = hermitize(apply_map(phi, re1))
    y = hermitize(apply_map(phi, re2))
    if lambda_min(y) <= tol.abs_tol:
        raise _Filtered("not-positive-definite", "Phi(Re(A sigma2 B)) is not positive definite")
    return x, y, re2


@_checker("m1")
def check_m1(phi, A, B, m, M, sigma, sigma1, sigma2, theta=None, *, tol=DEFAULT_TOL):
    """cos^2(theta) Phi(Re(A s1 B)) + mM Phi(Re(A s2 B))^{-1} <= (M + m) I.

    The inverse is read as inverse-after-map; the map-of-inverse reading is
    evaluated too and reported in ``values``.
    """
    (a, b), th = _sectors(tol, theta, A, B)
    x, y, re2 = _mean_parts(phi, a, b, m, M, sigma, sigma1, sigma2, tol)
    k = x.shape[0]
    c2 = math.cos(th) ** 2
    rhs = (M + m) * np.eye(k)
    link = _le("m1", c2 * x + m * M * hermitize(np.linalg.inv(y)), rhs, tol)
    notes = []
    values = {"theta": th}
    if lambda_min(re2) > tol.abs_tol:
        alt = _le("m1_map_of_inverse", c2 * x + m * M * hermitize(apply_map(phi, np.linalg.inv(re2))), rhs, tol)
        values["map_of_inverse_residual"] = alt.residual
        alt_pass = alt.residual >= -alt.threshold
        if alt_pass != (link.residual >= -link.threshold):
            notes.append(f"readings disagree: map-of-inverse residual {alt.residual:.3e}")
    return _Result([link], notes, values)


@_checker("thmK")
def check_thmK(phi, A, B, m, M, sigma, sigma1, sigma2, theta=None, *, tol=DEFAULT_TOL):
    """|| Phi(Re(A s1 B))^{1/2} o Phi(Re(A s2 B))^{-1/2} || <= K^{1/2} sec(theta), spectral norm."""
    (a, b), th = _sectors(tol, theta, A, B)
    _require_sign(hadamard(im_part(a), im_part(b)), "nsd", tol, "Im A o Im B")
    x, y, _ = _mean_parts(phi, a, b, m, M, sigma, sigma1, sigma2, tol)
    if lambda_min(x) <= tol.abs_tol:
        raise _Filtered("not-positive-definite", "Phi(Re(A s1 B)) is not positive definite")
    prod = hadamard(hpow(x, 0.5, tol), hpow(y, -0.5, tol))
    bound = math.sqrt(kantorovich(m, M)) / math.cos(th)
    value = norm(prod, "spectral")
    values = {
        "theta": th,
        "bound": bound,
        "spectral": value,
        "frobenius": norm(prod, "frobenius"),
        "trace": norm(prod, "trace"),
    }
    return _Result([_norm_le("K", value, bound, tol)], values=values)


@_checker("e25")
def check_e25(A, B, t, norm_kind=None, *, tol=DEFAULT_TOL):
    """2||A^{1/2} o B^{1/2}|| <= ||A^t o B^{1-t} + A^{1-t} o B^t|| <= ||A + B||."""
    if not 0 <= t <= 1:
        raise ValueError("t must lie in [0, 1]")
    a, b = _require_pd(tol, A=A, B=B)
    kinds = ("spectral", "frobenius", "trace") if norm_kind is None else (norm_kind,)
    left = 2 * hadamard(hpow(a, 0.5, tol), hpow(b, 0.5, tol))
    mid = hadamard(hpow(a, t, tol), hpow(b, 1 - t, tol)) + hadamard(hpow(a, 1 - t, tol), hpow(b, t, tol))
    right = a + b
    links = []
    for kind in kinds:
        nl, nm, nr = norm(left, kind), norm(mid, kind), norm(right, kind)
        links.append(_norm_le(f"{kind}:left", nl, nm, tol))
        links.append(_norm_le(f"{kind}:right", nm, nr, tol))
    return _Result(links)


# -- inverses ------------------------------------------------------------------


def _kant_factor(lam, mu):
    return (lam + mu) ** 2 / (4 * lam * mu)


@_checker("e41_0")
def check_e41_0(A, X, *, tol=DEFAULT_TOL):
    """(X*AX)^{-1} <= X* A^{-1} X <= (lam+mu)^2/(4 lam mu) (X*AX)^{-1} for an isometry X."""
    (a,) = _require_pd(tol, A=A)
    x = as_matrix(X, square=False)
    if norm(x.conj().T @ x - np.eye(x.shape[1])) > 1e-12:
        raise _Filtered("not-isometry", "X is not an isometry")
    w = np.linalg.eigvalsh(a)
    k = _kant_factor(w[-1], w[0])
    inner_inv = hermitize(np.linalg.inv(compress(x, a)))
    mid = hermitize(compress(x, np.linalg.inv(a)))
    links = [_le("left", inner_inv, mid, tol), _le("right", mid, k * inner_inv, tol)]
    return _Result(links, values={"factor": k})


@_checker("e41")
def check_e41(A, B, *, tol=DEFAULT_TOL):
    """(A o B)^{-1} <= A^{-1} o B^{-1} <= (lam+mu)^2/(4 lam mu) (A o B)^{-1}."""
    a, b = _require_pd(tol, A=A, B=B)
    lam_ab = np.linalg.eigvalsh(np.kron(a, b))
    k = _kant_factor(lam_ab[-1], lam_ab[0])
    p_inv = hermitize(np.linalg.inv(hadamard(a, b)))
    mid = hadamard(hermitize(np.linalg.inv(a)), hermitize(np.linalg.inv(b)))
    links = [_le("left", p_inv, mid, tol), _le("right", mid, k * p_inv, tol)]
    return _Result(links, values={"factor": k})


@_checker("t2")
def check_t2(A, B, theta=None, *, tol=DEFAULT_TOL):
    """cos^4(theta) Re((A o B)^{-1}) <= Re(A^{-1}) o Re(B^{-1}) when Im A o Im B <= 0."""
    (a, b), th = _sectors(tol, theta, A, B)
    _require_sign(hadamard(im_part(a), im_part(b)), "nsd", tol, "Im A o Im B")
    p_inv = _inv(hadamard(a, b), tol)
    lhs = math.cos(th) ** 4 * _rpart(p_inv)
    rhs = hadamard(_rpart(np.linalg.inv(a)), _rpart(np.linalg.inv(b)))
    return _Result([_le("t2", lhs, rhs, tol)], values={"theta": th})


@_checker("t3v1")
def check_t3v1(A, B, theta=None, *, tol=DEFAULT_TOL):
    (a, b), th = _sectors(tol, theta, A, B)
    a_inv, b_inv = np.linalg.inv(a), np.linalg.inv(b)
    _require_sign(hadamard(im_part(a_inv), im_part(b_inv)), "nsd", tol, "Im A^-1 o Im B^-1")
    p = hadamard(a, b)
    if not in_sector(p, th, tol):
        raise _Filtered("not-in-sector", f"A o B is not in S_{th:.6g}")
    w = np.linalg.eigvalsh(_rpart(np.kron(a, b)))
    if w[0] <= tol.abs_tol:
        raise _Filtered("not-accretive", "Re(A (x) B) is not positive definite")
    return _t3_link(a_inv, b_inv, p, w[-1], w[0], th, tol)


@_checker("t3v2")
def check_t3v2(A, B, theta=None, *, tol=DEFAULT_TOL):
    (a, b), th = _sectors(tol, theta, A, B)
    _require_sign(hadamard(im_part(a), im_part(b)), "psd", tol, "Im A o Im B")
    p = hadamard(a, b)
    if lambda_min(_rpart(p)) <= tol.abs_tol:
        raise _Filtered("not-accretive", "Re(A o B) is not positive definite")
    w = np.linalg.eigvalsh(np.kron(_rpart(a), _rpart(b)))
    return _t3_link(np.linalg.inv(a), np.linalg.inv(b), p, w[-1], w[0], th, tol)


def _t3_link(a_inv, b_inv, p, lam, mu, th, tol):
    k = _kant_factor(lam, mu)
    lhs = hadamard(_rpart(a_inv), _rpart(b_inv))
    rhs = k / math.cos(th) ** 2 * _rpart(_inv(p, tol))
    return _Result([_le("t3", lhs, rhs, tol)], values={"theta": th, "factor": k})


def check_t3(A, B, variant: int, theta=None, tol=DEFAULT_TOL) -> CheckOutcome:
    if variant == 1:
        return check_t3v1(A, B, theta, tol=tol)
    if variant == 2:
        return check_t3v2(A, B, theta, tol=tol)
    raise ValueError("variant must be 1 or 2")


THEOREM_IDS = (
    "le17", "chan301", "t0_303", "p1_321", "t1_308", "e305", "jc_L1", "jc_p1",
    "remark", "e62", "e24", "e39", "t4", "m1", "e25", "thmK", "e41", "e41_0",
    "t2", "t3v1", "t3v2", "e302", "e29",
)  # fmt: skip


def replay_witness(theorem_id: str, witness: dict, tol: TolerancePolicy = DEFAULT_TOL) -> CheckOutcome:
    """Re-run a predicate on a serialized witness."""
    try:
        fn = CHECKERS[theorem_id]
    except KeyError:
        raise UnknownIdError(f"unknown theorem id {theorem_id!r}") from None
    return fn(**decode_witness(witness), tol=tol)
