"""Uniform crossing boundaries for martingales with sub-Gaussian, sub-exponential
and sub-Gamma increments, plus boundary inversion for anytime p-values.

Every boundary u_alpha(k) satisfies, for the matching increment class,
P(exists k >= 1: S_k > u_alpha(k)) <= alpha, uniformly over infinite time
(the inverted-stitching family over a finite horizon).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

__all__ = [
    "Family",
    "BoundarySpec",
    "GAUSSIAN_FAMILIES",
    "FISHER_FAMILIES",
    "CHISQ_FAMILIES",
    "LINEAR_FAMILIES",
    "curve_constant",
    "eval_boundary",
    "boundary_curve",
    "discrete_mixture_boundary",
    "exp_linear_threshold",
    "invert_boundary",
]

# Bisection controls shared by all root searches in this module.
_MAX_ITER = 200
_REL_TOL = 1e-10
# Floor for inverted alphas found by bisection; closed forms may go lower.
_ALPHA_FLOOR = 1e-16


class Family(str, Enum):
    GAUSSIAN_LINEAR = "GaussianLinear"
    GAUSSIAN_STITCHED = "GaussianStitched"
    GAUSSIAN_DISCRETE_MIXTURE = "GaussianDiscreteMixture"
    GAUSSIAN_INVERTED_STITCHING = "GaussianInvertedStitching"
    EXP_LINEAR = "ExpLinear"
    GAMMA_CURVED = "GammaCurved"
    CHISQ_EXP_LINEAR = "ChiSqExpLinear"
    CHISQ_GAMMA_CURVED = "ChiSqGammaCurved"


GAUSSIAN_FAMILIES = frozenset(
    {
        Family.GAUSSIAN_LINEAR,
        Family.GAUSSIAN_STITCHED,
        Family.GAUSSIAN_DISCRETE_MIXTURE,
        Family.GAUSSIAN_INVERTED_STITCHING,
    }
)
FISHER_FAMILIES = frozenset({Family.EXP_LINEAR, Family.GAMMA_CURVED})
CHISQ_FAMILIES = frozenset({Family.CHISQ_EXP_LINEAR, Family.CHISQ_GAMMA_CURVED})
LINEAR_FAMILIES = frozenset(
    {Family.GAUSSIAN_LINEAR, Family.EXP_LINEAR, Family.CHISQ_EXP_LINEAR}
)


@dataclass(frozen=True)
class BoundarySpec:
    """Parameterized uniform boundary u_alpha(k).

    ``m`` is the tuning parameter of the linear families (the time at which
    the bound is tightest); ``horizon`` is required for the finite-time
    inverted-stitching family.
    """

    family: Family
    alpha: float
    m: float | None = None
    horizon: int | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "family", Family(self.family))
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.family in LINEAR_FAMILIES:
            if self.m is None or self.m <= 0:
                raise ValueError(f"{self.family.value} requires m > 0")
        if self.family is Family.GAUSSIAN_DISCRETE_MIXTURE and self.alpha > 0.5:
            # the mixture weights carry unit total mass, so the 1/alpha target
            # degenerates as alpha -> 1 and monotonicity in alpha is lost;
            # the family is calibrated for testing levels
            raise ValueError("GaussianDiscreteMixture supports alpha <= 0.5")
        if self.family is Family.GAUSSIAN_INVERTED_STITCHING:
            if self.horizon is None or self.horizon < 1:
                raise ValueError("GaussianInvertedStitching requires a positive horizon")

    def to_json(self) -> dict:
        out: dict = {"family": self.family.value, "alpha": self.alpha}
        if self.m is not None:
            out["m"] = self.m
        if self.horizon is not None:
            out["horizon"] = self.horizon
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "BoundarySpec":
        return cls(
            family=Family(obj["family"]),
            alpha=float(obj["alpha"]),
            m=obj.get("m"),
            horizon=obj.get("horizon"),
        )


def curve_constant(k: int, gamma: float) -> float:
    """C_k^gamma = 1.7 * sqrt(log log(2k) + 0.72 * log(5.2/gamma)).

    Equals the stitched Gaussian boundary at (gamma, k) divided by sqrt(k).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if not 0.0 < gamma < 1.0:
        raise ValueError("gamma must lie in (0, 1)")
    return 1.7 * math.sqrt(math.log(math.log(2.0 * k)) + 0.72 * math.log(5.2 / gamma))


def _check_k(spec: BoundarySpec, k: int) -> None:
    if k < 1:
        raise ValueError("k must be >= 1")
    if spec.family is Family.GAUSSIAN_INVERTED_STITCHING and k > spec.horizon:
        raise ValueError(f"k={k} exceeds horizon={spec.horizon}")


def _stitch_term(alpha: float, k: np.ndarray | float) -> np.ndarray | float:
    return np.log(np.log(2.0 * np.asarray(k, dtype=float))) + 0.72 * math.log(5.2 / alpha)


def _linear(alpha: float, m: float, k: np.ndarray | float):
    slope = math.sqrt(-math.log(alpha) / (2.0 * m))
    intercept = math.sqrt(-m * math.log(alpha) / 2.0)
    return slope * np.asarray(k, dtype=float) + intercept


# The printed inverted-stitching bound carries no explicit alpha (it is
# calibrated at 0.05); the sqrt(log(1/alpha)) scaling below generalizes it so
# that the family is strictly decreasing in alpha and invertible, and
# reproduces the printed constant 2.42 exactly at alpha = 0.05.
_INV_STITCH_BASE_ALPHA = 0.05


def _inverted_stitch(alpha: float, k: np.ndarray | float):
    scale = 2.42 * math.sqrt(math.log(1.0 / alpha) / math.log(1.0 / _INV_STITCH_BASE_ALPHA))
    kf = np.asarray(k, dtype=float)
    return scale * np.sqrt(kf * np.log(np.log(np.e * kf)) + 4.7)


@lru_cache(maxsize=64)
def _mixture_weights(alpha: float) -> tuple[np.ndarray, np.ndarray]:
    """(lambda_i, omega_i) arrays of the discrete mixture at level alpha."""
    lam_max = math.sqrt(2.0 * math.log(1.0 / alpha))
    i = np.arange(10_000, dtype=float)
    lam = 1.1 ** (-(i + 0.5)) * lam_max
    x = 1.05 * lam
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        f = 0.4 / (x * np.log(np.e * lam_max / x) ** 1.4)
    f[~np.isfinite(f) | (x <= 0) | (x > lam_max)] = 0.0
    omega = 1.1 ** (-(i + 1.0)) * lam_max * f / 10.0
    keep = omega > 0
    return lam[keep], omega[keep]


def _mixture_sum(alpha: float, s: float, k: float) -> float:
    """sum_i omega_i * exp(lambda_i * s - psi(lambda_i) * k), psi(l) = l^2/2.

    The series is truncated at 10^4 terms; lambda_i decays geometrically so
    the neglected tail is a constant far below the 1/alpha target.
    """
    lam, omega = _mixture_weights(alpha)
    expo = lam * s - 0.5 * lam * lam * k
    np.clip(expo, -745.0, 700.0, out=expo)
    return float(np.sum(omega * np.exp(expo)))


def discrete_mixture_boundary(alpha: float, k: int) -> float:
    """Smallest s with mixture-sum(s) >= 1/alpha, by monotone root search."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be >= 1")
    return _mixture_root(alpha, float(k))


def _mixture_root(alpha: float, k: float, lo: float = 0.0) -> float:
    # The mixture sum is increasing and convex in s, so Newton from above the
    # root descends monotonically; one overshooting step from below is safe.
    target = 1.0 / alpha
    lam, omega = _mixture_weights(alpha)
    decay = -0.5 * lam * lam * k

    def val_slope(s: float) -> tuple[float, float]:
        expo = np.clip(lam * s + decay, -745.0, 700.0)
        terms = omega * np.exp(expo)
        return float(terms.sum()), float((terms * lam).sum())

    s = max(lo, 1.0)
    grow = 0
    while val_slope(s)[0] < target:
        s *= 2.0
        grow += 1
        if grow > 200:
            raise RuntimeError("discrete mixture bracket failed to grow")
    for _ in range(_MAX_ITER):
        value, slope = val_slope(s)
        step = (value - target) / slope
        s -= step
        if abs(step) <= 1e-12 * max(1.0, abs(s)):
            break
    return s


@lru_cache(maxsize=256)
def _mixture_curve_cached(alpha: float, n: int) -> tuple:
    # s_k is nondecreasing in k, so each root warm-starts from the previous.
    out = np.empty(n, dtype=float)
    prev = 0.0
    for idx in range(n):
        prev = _mixture_root(alpha, float(idx + 1), lo=prev)
        out[idx] = prev
    out.setflags(write=False)
    return (out,)


@lru_cache(maxsize=256)
def exp_linear_threshold(alpha: float, m: float, family: str = "fisher") -> float:
    """x_{m,alpha} of the sub-exponential linear boundaries.

    fisher: min{x: exp(-0.71x + (m/2) log(1 + 1.41x/m)) <= alpha}
    chisq:  min{x: exp(-x/2   + (m/4) log(1 + 2x/m))    <= alpha}
    Both exponents are strictly decreasing in x > 0, so bracketed bisection
    applies after growing the bracket by doubling.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if m <= 0:
        raise ValueError("m must be > 0")
    if family == "fisher":
        def expo(x: float) -> float:
            return -0.71 * x + (m / 2.0) * math.log1p(1.41 * x / m)
    elif family == "chisq":
        def expo(x: float) -> float:
            return -x / 2.0 + (m / 4.0) * math.log1p(2.0 * x / m)
    else:
        raise ValueError(f"unknown exp-linear family {family!r}")

    log_alpha = math.log(alpha)
    hi = 1.0
    grow = 0
    while expo(hi) > log_alpha:
        hi *= 2.0
        grow += 1
        if grow > 200:
            raise RuntimeError("exp-linear bracket failed to grow")
    lo = 0.0
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if expo(mid) <= log_alpha:
            hi = mid
        else:
            lo = mid
        if hi - lo <= _REL_TOL * max(1.0, hi):
            break
    return hi


def _exp_linear(alpha: float, m: float, k, family: str):
    x = exp_linear_threshold(alpha, m, family)
    kf = np.asarray(k, dtype=float)
    if family == "fisher":
        slope = (1.41 * m / x + 2.0) * math.log1p(1.41 * x / m) - 2.0
        return slope * (kf - m) + 2.82 * x
    slope = (m / (2.0 * x) + 1.0) * math.log1p(2.0 * x / m) - 1.0
    return slope * (kf - m) + 2.0 * x


def _gamma_curved(alpha: float, k, lead: float):
    kf = np.asarray(k, dtype=float)
    term = _stitch_term(alpha, kf)
    return lead * np.sqrt(kf * term) + 9.66 * term


def eval_boundary(spec: BoundarySpec, k: int) -> float:
    """u_alpha(k) for the given family at integer step k >= 1."""
    _check_k(spec, k)
    return float(_eval_any(spec, k))


def boundary_curve(spec: BoundarySpec, n: int) -> np.ndarray:
    """Vector of u_alpha(k) for k = 1..n (engines precompute this once)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if spec.family is Family.GAUSSIAN_INVERTED_STITCHING and n > spec.horizon:
        raise ValueError(f"n={n} exceeds horizon={spec.horizon}")
    ks = np.arange(1, n + 1, dtype=float)
    if spec.family is Family.GAUSSIAN_DISCRETE_MIXTURE:
        (curve,) = _mixture_curve_cached(spec.alpha, n)
        return np.array(curve, dtype=float)
    return np.asarray(_eval_any(spec, ks), dtype=float)


def _eval_any(spec: BoundarySpec, k):
    fam = spec.family
    if fam is Family.GAUSSIAN_LINEAR:
        return _linear(spec.alpha, spec.m, k)
    if fam is Family.GAUSSIAN_STITCHED:
        kf = np.asarray(k, dtype=float)
        return 1.7 * np.sqrt(kf * _stitch_term(spec.alpha, kf))
    if fam is Family.GAUSSIAN_DISCRETE_MIXTURE:
        if np.ndim(k) == 0:
            return _mixture_root(spec.alpha, float(k))
        (curve,) = _mixture_curve_cached(spec.alpha, int(np.max(k)))
        return curve[np.asarray(k, dtype=int) - 1]
    if fam is Family.GAUSSIAN_INVERTED_STITCHING:
        return _inverted_stitch(spec.alpha, k)
    if fam is Family.EXP_LINEAR:
        return _exp_linear(spec.alpha, spec.m, k, "fisher")
    if fam is Family.GAMMA_CURVED:
        return _gamma_curved(spec.alpha, k, 4.07)
    if fam is Family.CHISQ_EXP_LINEAR:
        return _exp_linear(spec.alpha, spec.m, k, "chisq")
    if fam is Family.CHISQ_GAMMA_CURVED:
        return _gamma_curved(spec.alpha, k, 3.42)
    raise ValueError(f"unknown family {fam!r}")


def invert_boundary(spec: BoundarySpec, s: float, k: int) -> float:
    """The unique alpha with u_alpha(k) = s.

    Nonpositive s is clamped to 1.0 (the boundary is positive, so any level
    rejects a nonpositive statistic never and the anytime p-value is vacuous);
    s above the achievable range clamps to a positive floor.
    """
    _check_k(spec, k)
    if not math.isfinite(s):
        raise ValueError("s must be finite")
    if s <= 0.0:
        return 1.0
    fam = spec.family
    if fam is Family.GAUSSIAN_LINEAR:
        alpha = math.exp(-2.0 * spec.m * s * s / (k + spec.m) ** 2)
        return min(alpha, 1.0)
    if fam is Family.GAUSSIAN_STITCHED:
        term = (s / 1.7) ** 2 / k
        return _alpha_from_stitch_term(term, k)
    if fam is Family.GAMMA_CURVED or fam is Family.CHISQ_GAMMA_CURVED:
        lead = 4.07 if fam is Family.GAMMA_CURVED else 3.42
        # solve 9.66*A + lead*sqrt(k)*sqrt(A) = s for sqrt(A) > 0
        disc = lead * lead * k + 4.0 * 9.66 * s
        root = (-lead * math.sqrt(k) + math.sqrt(disc)) / (2.0 * 9.66)
        return _alpha_from_stitch_term(root * root, k)
    if fam is Family.GAUSSIAN_INVERTED_STITCHING:
        base = k * math.log(math.log(math.e * k)) + 4.7
        log_inv = math.log(1.0 / _INV_STITCH_BASE_ALPHA) * (s / 2.42) ** 2 / base
        return min(math.exp(-log_inv), 1.0)
    return _invert_by_bisection(spec, s, k)


def _alpha_from_stitch_term(term: float, k: int) -> float:
    # term = log log(2k) + 0.72 log(5.2/alpha)
    log_ratio = (term - math.log(math.log(2.0 * k))) / 0.72
    if log_ratio < math.log(5.2):
        return 1.0
    return min(5.2 * math.exp(-log_ratio), 1.0)


def _invert_by_bisection(spec: BoundarySpec, s: float, k: int) -> float:
    # u_alpha(k) is continuous and strictly decreasing in alpha, so
    # "u_alpha(k) <= s" flags alpha >= alpha* and bisection applies.
    lo, hi = _ALPHA_FLOOR, 1.0 - 1e-12
    if spec.family is Family.GAUSSIAN_DISCRETE_MIXTURE:
        hi = 0.5  # the family's alpha domain; below u_0.5(k) nothing rejects

    # 1e-12 relative slack absorbs float ties at the domain edges
    if spec.family is Family.GAUSSIAN_DISCRETE_MIXTURE:
        # u_alpha(k) <= s  iff  mixture-sum_alpha(s) >= 1/alpha; testing the
        # sum directly avoids one nested root search per probe.
        def at_or_past(alpha: float) -> bool:
            return _mixture_sum(alpha, s, float(k)) >= (1.0 / alpha) * (1.0 - 1e-12)
    else:
        def at_or_past(alpha: float) -> bool:
            probe = BoundarySpec(spec.family, alpha, spec.m, spec.horizon)
            return float(_eval_any(probe, k)) <= s * (1.0 + 1e-12)

    if at_or_past(lo):
        # s at or above every achievable boundary value
        return lo
    if not at_or_past(hi):
        # s below the infimum of the boundary range
        return 1.0
    for _ in range(_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if at_or_past(mid):
            hi = mid
        else:
            lo = mid
        if hi - lo <= 1e-13:
            break
    return 0.5 * (lo + hi)
