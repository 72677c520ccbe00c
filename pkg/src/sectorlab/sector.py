"""Sector matrices: membership, certified angles, numerical range, generators.

A matrix lies in the sector S_theta when its Hermitian part is positive
definite and ``tan(theta) Re A +/- Im A`` are both positive semidefinite.
The smallest such angle is ``arctan || (Re A)^{-1/2} Im A (Re A)^{-1/2} ||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NotAccretiveError, ResampleBudgetError
from .functions import apply_hermitian_function, hpow, principal_power
from .linalg import (
    DEFAULT_TOL,
    TolerancePolicy,
    Verdict,
    as_matrix,
    cartesian,
    eig_hermitian,
    hadamard,
    hermitize,
    lambda_max,
    lambda_min,
    loewner_leq,
    norm,
)

__all__ = [
    "SIGN_CONDITIONS",
    "SectorMatrix",
    "GeneratorConfig",
    "sector_angle",
    "in_sector",
    "numerical_range_samples",
    "random_sector",
    "random_sector_pair_signed",
    "draw_sector",
    "power_bounds",
    "RE_FLOOR",
]

SIGN_CONDITIONS = ("im_hadamard_nonneg", "im_hadamard_nonpos", "none")
RE_FLOOR = 0.1  # epsilon added to G*G so inverses stay tame


def sector_angle(a, tol: TolerancePolicy = DEFAULT_TOL) -> float:
    """Smallest theta with ``a`` in S_theta (radians)."""
    re, im = cartesian(a)
    w, u = eig_hermitian(re)
    if w[0] <= tol.abs_tol:
        raise NotAccretiveError(f"not accretive: smallest eigenvalue of Re A is {w[0]:.3g}")
    r_isqrt = (u / np.sqrt(w)) @ u.conj().T
    return float(math.atan(norm(hermitize(r_isqrt @ im @ r_isqrt), "spectral")))


def in_sector(a, theta: float, tol: TolerancePolicy = DEFAULT_TOL) -> Verdict:
    """Membership test for S_theta.

    The residual is the smaller of the two margins
    ``lambda_min(tan(theta) Re A -/+ Im A)``; it is ``-inf`` when the
    Hermitian part is not positive definite.
    """
    a = as_matrix(a)
    if not 0 <= theta < math.pi / 2:
        return Verdict(False, -math.inf)
    re, im = cartesian(a)
    if lambda_min(re) <= tol.abs_tol:
        return Verdict(False, -math.inf)
    tr = math.tan(theta) * re
    residual = min(lambda_min(tr - im), lambda_min(tr + im))
    thr = tol.threshold(max(norm(tr, "spectral"), norm(im, "spectral")))
    return Verdict(residual >= -thr, residual, thr)


def numerical_range_samples(a, k: int, seed=None) -> list[complex]:
    """``k`` points x*Ax of the numerical range.

    Structured vectors come first (standard basis, eigenvectors of Re A and
    of Im A), then random unit vectors fill the rest.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    a = as_matrix(a)
    n = a.shape[0]
    re, im = cartesian(a)
    vecs = [np.eye(n, dtype=complex)[:, j] for j in range(n)]
    for h in (re, im):
        _, u = eig_hermitian(h)
        vecs.extend(u[:, j] for j in range(n))
    rng = np.random.default_rng(seed)
    while len(vecs) < k:
        x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        vecs.append(x / np.linalg.norm(x))
    return [complex(np.vdot(x, a @ x)) for x in vecs[:k]]


@dataclass(frozen=True)
class SectorMatrix:
    """A matrix together with a certified sector angle and its Cartesian parts."""

    matrix: np.ndarray = field(repr=False)
    theta: float
    re_part: np.ndarray = field(repr=False, compare=False)
    im_part: np.ndarray = field(repr=False, compare=False)

    @classmethod
    def certify(cls, a, theta: float | None = None, tol: TolerancePolicy = DEFAULT_TOL) -> "SectorMatrix":
        """Wrap ``a``; when ``theta`` is given it must be a valid bound."""
        a = as_matrix(a)
        re, im = cartesian(a)
        angle = sector_angle(a, tol)
        if theta is None:
            theta = angle
        elif not in_sector(a, theta, tol):
            raise NotAccretiveError(f"matrix is not in S_{theta:g} (certified angle {angle:.6g})")
        return cls(a, float(theta), re, im)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def _as_sector(x, tol=DEFAULT_TOL) -> SectorMatrix:
    return x if isinstance(x, SectorMatrix) else SectorMatrix.certify(x, tol=tol)


@dataclass(frozen=True)
class GeneratorConfig:
    dim: int = 3
    theta_target: float = 0.5
    sign_condition: str = "none"
    re_bounds: tuple[float, float] | None = None
    seed: int = 0

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be >= 1")
        if not 0 <= self.theta_target < math.pi / 2:
            raise ValueError(f"theta must lie in [0, pi/2), got {self.theta_target}")
        if self.sign_condition not in SIGN_CONDITIONS:
            raise ValueError(f"sign must be one of {SIGN_CONDITIONS}")
        if self.re_bounds is not None:
            m, M = self.re_bounds
            if not 0 < m <= M:
                raise ValueError(f"need 0 < m <= M, got {self.re_bounds}")

    def to_json(self) -> dict:
        m, M = self.re_bounds if self.re_bounds is not None else (None, None)
        return {
            "dim": self.dim,
            "theta": self.theta_target,
            "sign": self.sign_condition,
            "m": m,
            "M": M,
            "seed": self.seed,
        }

    @classmethod
    def from_json(cls, data: dict) -> "GeneratorConfig":
        bounds = None
        if data.get("m") is not None and data.get("M") is not None:
            bounds = (float(data["m"]), float(data["M"]))
        return cls(
            dim=int(data["dim"]),
            theta_target=float(data["theta"]),
            sign_condition=data.get("sign", "none"),
            re_bounds=bounds,
            seed=int(data.get("seed", 0)),
        )


def _complex_gaussian(rng, n):
    return rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))


def random_pd(rng, n: int, floor: float = RE_FLOOR, bounds=None) -> np.ndarray:
    """G*G + floor*I, optionally with its spectrum mapped affinely onto [m, M]."""
    g = _complex_gaussian(rng, n)
    r = hermitize(g.conj().T @ g + floor * np.eye(n))
    if bounds is None:
        return r
    m, M = bounds
    w, u = eig_hermitian(r)
    span = w[-1] - w[0]
    w = np.full(n, (m + M) / 2) if span <= 0 or n == 1 else m + (w - w[0]) * (M - m) / span
    return hermitize((u * w) @ u.conj().T)


def draw_sector(
    rng: np.random.Generator,
    n: int,
    theta: float,
    im_sign: int = 0,
    re_bounds=None,
) -> np.ndarray:
    """One sector matrix with angle <= ``theta``.

    ``im_sign`` = +1 / -1 forces Im A to be positive / negative
    semidefinite; 0 leaves it indefinite.
    """
    r = random_pd(rng, n, bounds=re_bounds)
    t = _complex_gaussian(rng, n)
    t = t @ t.conj().T if im_sign else hermitize(t)
    rho = rng.uniform()
    if theta == 0.0 or not np.any(t):
        return r.astype(complex)
    t = hermitize(t) * (rho * math.tan(theta) / norm(t, "spectral"))
    if im_sign < 0:
        t = -t
    sq = hpow(r, 0.5)
    return r + 1j * hermitize(sq @ t @ sq)


def _rng_for(cfg: GeneratorConfig, rng):
    return np.random.default_rng(cfg.seed) if rng is None else rng


def random_sector(cfg: GeneratorConfig, rng=None) -> SectorMatrix:
    """Construct (not reject) a matrix in S_theta_target."""
    rng = _rng_for(cfg, rng)
    a = draw_sector(rng, cfg.dim, cfg.theta_target, 0, cfg.re_bounds)
    return SectorMatrix.certify(a)


def random_sector_pair_signed(cfg: GeneratorConfig, rng=None, budget: int = 100):
    """A pair (A, B) satisfying the configured sign condition on Im A o Im B.

    For ``im_hadamard_nonpos`` one imaginary part is positive and the other
    negative semidefinite (order chosen by a coin flip); for
    ``im_hadamard_nonneg`` both are positive semidefinite.  The Hadamard
    sign is rechecked by eigenvalues and the pair redrawn on failure.
    """
    if cfg.sign_condition == "none":
        raise ValueError("random_sector_pair_signed needs a sign condition")
    rng = _rng_for(cfg, rng)
    for _ in range(budget):
        if cfg.sign_condition == "im_hadamard_nonpos":
            sa = 1 if rng.uniform() < 0.5 else -1
            sb = -sa
        else:
            sa = sb = 1
        a = draw_sector(rng, cfg.dim, cfg.theta_target, sa, cfg.re_bounds)
        b = draw_sector(rng, cfg.dim, cfg.theta_target, sb, cfg.re_bounds)
        a, b = SectorMatrix.certify(a), SectorMatrix.certify(b)
        s = hadamard(a.im_part, b.im_part)
        scale = max(norm(s, "spectral"), 1.0)
        if cfg.sign_condition == "im_hadamard_nonpos" and lambda_max(s) <= 1e-10 * scale:
            return a, b
        if cfg.sign_condition == "im_hadamard_nonneg" and lambda_min(s) >= -1e-10 * scale:
            return a, b
    raise ResampleBudgetError(f"no pair met {cfg.sign_condition} in {budget} draws")


def power_bounds(a, t: float, theta: float | None = None, tol: TolerancePolicy = DEFAULT_TOL):
    """Two-sided bounds between Re(A^t) and (Re A)^t.

    For t in [0, 1]:   cos^{2t}(theta) Re(A^t) <= (Re A)^t <= Re(A^t)
    For t in [-1, 0]:  Re(A^t) <= (Re A)^t <= cos^{2t}(theta) Re(A^t)

    Returns the (lower, upper) verdicts.  ``theta`` defaults to the certified
    angle of ``a``.
    """
    sa = _as_sector(a, tol)
    theta = sa.theta if theta is None else theta
    if not -1.0 <= t <= 1.0:
        raise ValueError("t must lie in [-1, 1]")
    re_pow = hermitize(cartesian(principal_power(sa.matrix, t, tol))[0])
    pow_re = apply_hermitian_function(sa.re_part, lambda x: x**t, tol)
    c = math.cos(theta) ** (2 * t)
    if t >= 0:
        return loewner_leq(c * re_pow, pow_re, tol), loewner_leq(pow_re, re_pow, tol)
    return loewner_leq(re_pow, pow_re, tol), loewner_leq(pow_re, c * re_pow, tol)
