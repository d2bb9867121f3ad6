"""Decompositions of p-values (and symmetric statistics) into a hidden bit used
for inference and a masked value used for ordering.

Under a uniform p-value the bit and the masked value are independent (tent,
railway) or mean independent (calibrator schemes), which is what lets masked
values drive an ordering without biasing the running test statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache

import numpy as np

__all__ = [
    "SchemeKind",
    "MaskScheme",
    "MaskPair",
    "MaskingError",
    "TENT",
    "RAILWAY",
    "MIXTURE",
    "mask",
    "mask_arrays",
    "unmask",
    "unmask_arrays",
    "mask_statistic",
    "mean_independence_check",
    "masked_order_key",
    "calibrator_log_bits",
    "calibrator_density",
    "mixture_density",
    "p_star",
]

# p is clipped to this window before logs so calibrator bits saturate instead
# of diverging at the endpoints.
_P_LO = 1e-300
_P_HI = 1.0 - 1e-16


class MaskingError(ValueError):
    """Inconsistent mask pair or out-of-range input."""


class SchemeKind(str, Enum):
    TENT = "Tent"
    RAILWAY = "Railway"
    CALIBRATOR = "Calibrator"
    CALIBRATOR_MIXTURE = "CalibratorMixture"


@dataclass(frozen=True)
class MaskScheme:
    kind: SchemeKind
    c: float | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.kind is SchemeKind.CALIBRATOR:
            if self.c is None or not 0.0 < self.c < 1.0:
                raise ValueError("Calibrator scheme requires c in (0, 1)")

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind.value}
        if self.c is not None:
            out["c"] = self.c
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "MaskScheme":
        return cls(kind=SchemeKind(obj["kind"]), c=obj.get("c"))


TENT = MaskScheme(SchemeKind.TENT)
RAILWAY = MaskScheme(SchemeKind.RAILWAY)
MIXTURE = MaskScheme(SchemeKind.CALIBRATOR_MIXTURE)


@dataclass(frozen=True)
class MaskPair:
    """bit is +/-1 for tent/railway and log f(p) for calibrator schemes;
    masked lies in [0, 0.5] (tent/railway) or [0, p_*] (calibrators)."""

    bit: float
    masked: float


def calibrator_density(p, c: float):
    """f_c(p) = c * p^(c-1), a calibrator with unit integral."""
    pc = np.clip(np.asarray(p, dtype=float), _P_LO, _P_HI)
    return c * pc ** (c - 1.0)


def mixture_density(p):
    """f_m(p) = (1 - p + p log p) / (p (log p)^2), the integral of f_c over c.

    log p is taken as log1p(p - 1) so the numerator's cancellation near p = 1
    stays at full precision.
    """
    pc = np.clip(np.asarray(p, dtype=float), _P_LO, _P_HI)
    lp = np.log1p(pc - 1.0)
    q = 1.0 - pc
    direct = ((1.0 - pc) + pc * lp) / (pc * lp * lp)
    # near p = 1 the numerator cancels catastrophically; switch to its series
    # 1 - p + p log p = sum_{n>=2} q^n / (n (n-1))
    num = q * q * (
        1.0 / 2 + q * (1.0 / 6 + q * (1.0 / 12 + q * (1.0 / 20 + q * (1.0 / 30 + q * (1.0 / 42 + q / 56)))))
    )
    series = num / (pc * lp * lp)
    return np.where(q < 0.01, series, direct)


def _h_calibrator(x, c: float):
    # H_c(x) = x^c - x, increasing on [0, p_*], the ordering-equivalence map.
    xa = np.asarray(x, dtype=float)
    return xa**c - xa


def _h_mixture(x):
    # H_m(x) = (x-1)/log x - x; the removable singularity at x=1 has limit 0.
    xa = np.asarray(x, dtype=float)
    out = np.empty_like(xa)
    at_one = np.abs(xa - 1.0) < 1e-12
    safe = np.where(at_one, 0.5, xa)
    lo = np.clip(safe, _P_LO, None)
    out = (lo - 1.0) / np.log(lo) - lo
    return np.where(at_one, 0.0, out)


@lru_cache(maxsize=32)
def p_star(scheme: MaskScheme) -> float:
    """The p with f(p) = 1, the peak of H and the masked-value range cap."""
    if scheme.kind is SchemeKind.CALIBRATOR:
        c = scheme.c
        return c ** (1.0 / (1.0 - c))
    if scheme.kind is SchemeKind.CALIBRATOR_MIXTURE:
        lo, hi = 1e-12, 1.0 - 1e-12
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mixture_density(mid) >= 1.0:
                lo = mid
            else:
                hi = mid
            if hi - lo <= 1e-15:
                break
        return 0.5 * (lo + hi)
    raise ValueError(f"p_star undefined for {scheme.kind}")


def _solve_h(targets: np.ndarray, scheme: MaskScheme) -> np.ndarray:
    """Unique x in [0, p_*] with H(x) = target, by bisection on log x.

    H is extremely flat near 0 (for the mixture H_m(x) ~ 1/log(1/x)), so the
    search runs in log space; solutions below the float range saturate at the
    1e-300 clip, mirroring the bit saturation at the endpoints.
    """
    ps = p_star(scheme)
    h = (lambda x: _h_calibrator(x, scheme.c)) if scheme.kind is SchemeKind.CALIBRATOR else _h_mixture
    lo = np.full_like(targets, math.log(_P_LO))
    hi = np.full_like(targets, math.log(ps))
    for _ in range(120):
        mid = 0.5 * (lo + hi)
        below = h(np.exp(mid)) < targets
        lo = np.where(below, mid, lo)
        hi = np.where(below, hi, mid)
    return np.exp(0.5 * (lo + hi))


def mask_arrays(ps, scheme: MaskScheme) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized mask: returns (bits, masked) for an array of p-values."""
    p = np.asarray(ps, dtype=float)
    if np.any((p < 0.0) | (p > 1.0)) or not np.all(np.isfinite(p)):
        raise MaskingError("p-values must lie in [0, 1]")
    kind = scheme.kind
    if kind is SchemeKind.TENT:
        bits = np.where(p < 0.5, 1.0, -1.0)
        return bits, np.minimum(p, 1.0 - p)
    if kind is SchemeKind.RAILWAY:
        bits = np.where(p < 0.5, 1.0, -1.0)
        return bits, np.minimum(p, np.mod(p + 0.5, 1.0))
    if kind is SchemeKind.CALIBRATOR:
        c = scheme.c
        pc = np.clip(p, _P_LO, _P_HI)
        bits = math.log(c) + (c - 1.0) * np.log(pc)
        ps_ = p_star(scheme)
        masked = np.where(pc <= ps_, pc, _solve_h(_h_calibrator(np.maximum(pc, ps_), c), scheme))
        return bits, masked
    if kind is SchemeKind.CALIBRATOR_MIXTURE:
        pc = np.clip(p, _P_LO, _P_HI)
        bits = np.log(mixture_density(pc))
        ps_ = p_star(scheme)
        masked = np.where(pc <= ps_, pc, _solve_h(_h_mixture(np.maximum(pc, ps_)), scheme))
        return bits, masked
    raise ValueError(f"unknown scheme {kind}")


def mask(p: float, scheme: MaskScheme) -> MaskPair:
    """Decompose one p-value into (missing bit, masked value)."""
    bits, masked = mask_arrays(np.asarray([p], dtype=float), scheme)
    return MaskPair(bit=float(bits[0]), masked=float(masked[0]))


def _invert_mixture_bit(bit: float) -> float:
    # f_m maps (0,1) onto (1/2, inf) decreasingly; recover p by bisection.
    target = math.exp(bit)
    if target <= 0.5:
        return _P_HI
    lo, hi = _P_LO, _P_HI
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if float(mixture_density(mid)) >= target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-16 * max(1.0, hi):
            break
    return 0.5 * (lo + hi)


def unmask(pair: MaskPair, scheme: MaskScheme) -> float:
    """The unique p with mask(p, scheme) == pair."""
    kind = scheme.kind
    bit, masked = pair.bit, pair.masked
    if kind in (SchemeKind.TENT, SchemeKind.RAILWAY):
        if not 0.0 <= masked <= 0.5:
            raise MaskingError(f"masked value {masked} outside [0, 0.5]")
        if bit not in (-1.0, 1.0):
            raise MaskingError(f"bit must be +/-1, got {bit}")
        if bit > 0:
            return masked
        return 1.0 - masked if kind is SchemeKind.TENT else masked + 0.5
    if kind is SchemeKind.CALIBRATOR:
        c = scheme.c
        p = math.exp((bit - math.log(c)) / (c - 1.0))
        return _check_calibrator_pair(p, pair, scheme)
    if kind is SchemeKind.CALIBRATOR_MIXTURE:
        p = _invert_mixture_bit(bit)
        return _check_calibrator_pair(p, pair, scheme)
    raise ValueError(f"unknown scheme {kind}")


def unmask_arrays(bits: np.ndarray, masked: np.ndarray, scheme: MaskScheme) -> np.ndarray:
    """Vectorized inverse of mask_arrays (no per-pair consistency checks)."""
    b = np.asarray(bits, dtype=float)
    g = np.asarray(masked, dtype=float)
    kind = scheme.kind
    if kind is SchemeKind.TENT:
        return np.where(b > 0, g, 1.0 - g)
    if kind is SchemeKind.RAILWAY:
        return np.where(b > 0, g, g + 0.5)
    if kind is SchemeKind.CALIBRATOR:
        c = scheme.c
        return np.exp((b - math.log(c)) / (c - 1.0))
    if kind is SchemeKind.CALIBRATOR_MIXTURE:
        target = np.exp(b)
        lo = np.full_like(target, _P_LO)
        hi = np.full_like(target, _P_HI)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            ge = mixture_density(mid) >= target
            lo = np.where(ge, mid, lo)
            hi = np.where(ge, hi, mid)
        return 0.5 * (lo + hi)
    raise ValueError(f"unknown scheme {kind}")


def _check_calibrator_pair(p: float, pair: MaskPair, scheme: MaskScheme) -> float:
    if pair.masked < -1e-12 or pair.masked > p_star(scheme) + 1e-12:
        raise MaskingError(f"masked value {pair.masked} outside [0, p_*]")
    expected = mask(p, scheme).masked
    if abs(expected - pair.masked) > 1e-6:
        raise MaskingError("bit and masked value are mutually inconsistent")
    return p


def mask_statistic(t: float) -> MaskPair:
    """Sign/absolute-value split of a symmetric statistic; sign(0) = -1."""
    if not math.isfinite(t):
        raise MaskingError("statistic must be finite")
    return MaskPair(bit=1.0 if t > 0 else -1.0, masked=abs(t))


def masked_order_key(ps, scheme: MaskScheme) -> np.ndarray:
    """A cheap monotone surrogate for the masked value: H(p) equals H(g(p))
    by construction and H is increasing on [0, p_*], so sorting by H(p)
    reproduces the masked-value order without solving the branch equation."""
    p = np.clip(np.asarray(ps, dtype=float), _P_LO, _P_HI)
    if scheme.kind is SchemeKind.CALIBRATOR:
        return _h_calibrator(p, scheme.c)
    if scheme.kind is SchemeKind.CALIBRATOR_MIXTURE:
        return _h_mixture(p)
    if scheme.kind in (SchemeKind.TENT, SchemeKind.RAILWAY):
        _, masked = mask_arrays(np.asarray(ps, dtype=float), scheme)
        return masked
    raise ValueError(f"unknown scheme {scheme.kind}")


def calibrator_log_bits(ps, scheme: MaskScheme) -> np.ndarray:
    """log f(p) for calibrator schemes without the masked-value solve."""
    p = np.asarray(ps, dtype=float)
    if scheme.kind is SchemeKind.CALIBRATOR:
        pc = np.clip(p, _P_LO, _P_HI)
        return math.log(scheme.c) + (scheme.c - 1.0) * np.log(pc)
    if scheme.kind is SchemeKind.CALIBRATOR_MIXTURE:
        return np.log(mixture_density(p))
    raise ValueError("calibrator schemes only")


def mean_independence_check(scheme: MaskScheme, n_draws: int, seed: int) -> float:
    """Max over masked-value deciles of |mean increment in bin - overall mean|.

    The increment is the quantity whose conditional mean the null pins down:
    the +/-1 bit for tent/railway and the martingale factor f(p) = exp(bit)
    for calibrator schemes. The statistic is O(n_draws^{-1/2}) under
    uniformity (heavier-tailed for small calibrator c).
    """
    if n_draws < 10_000:
        raise ValueError("n_draws must be >= 10^4")
    rng = np.random.default_rng(seed)
    p = rng.random(n_draws)
    bits, masked = mask_arrays(p, scheme)
    if scheme.kind in (SchemeKind.CALIBRATOR, SchemeKind.CALIBRATOR_MIXTURE):
        bits = np.exp(bits)
    edges = np.quantile(masked, np.linspace(0.1, 0.9, 9))
    bins = np.digitize(masked, edges)
    overall = bits.mean()
    worst = 0.0
    for b in range(10):
        sel = bins == b
        if sel.any():
            worst = max(worst, abs(bits[sel].mean() - overall))
    return float(worst)
