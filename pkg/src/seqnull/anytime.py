"""Anytime-valid p-values and e-values from a running martingale trajectory.

The anytime p-value at step t is the smallest level at which the boundary
test would have rejected at or before t, computed by inverting the boundary
at every visited point and taking the running minimum.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .boundaries import BoundarySpec, Family, invert_boundary
from .engines import TestState

__all__ = ["AnytimeRecord", "track_anytime", "anytime_curve"]


class AnytimeRecord(NamedTuple):
    t: int
    p_anytime: float
    e_value: float


def _pairs_from(trajectory) -> tuple[np.ndarray, np.ndarray]:
    if isinstance(trajectory, TestState):
        stats = np.asarray(trajectory.stats, dtype=float)
        return np.arange(1, len(stats) + 1), stats
    pairs = list(trajectory)
    ks = np.asarray([int(p[0]) for p in pairs])
    stats = np.asarray([float(p[1]) for p in pairs])
    return ks, stats


def anytime_curve(trajectory, spec: BoundarySpec) -> np.ndarray:
    """The nonincreasing p-value sequence min_{k<=t} u^{-1}(S_k; k)."""
    ks, stats = _pairs_from(trajectory)
    if spec.family is Family.GAUSSIAN_LINEAR:
        # closed form, vectorized: exp(-2 m S^2 / (k+m)^2) for S > 0
        alphas = np.ones(len(ks))
        pos = stats > 0
        alphas[pos] = np.exp(
            -2.0 * spec.m * stats[pos] ** 2 / (ks[pos] + spec.m) ** 2
        )
    else:
        alphas = np.asarray(
            [invert_boundary(spec, float(s), int(k)) for k, s in zip(ks, stats)]
        )
    running = np.minimum.accumulate(np.clip(alphas, 0.0, 1.0))
    return np.clip(running, np.finfo(float).tiny, 1.0)


def track_anytime(trajectory, spec: BoundarySpec) -> list[AnytimeRecord]:
    """AnytimeRecord per step; e-value reported as the reciprocal 1/p_t."""
    ks, _ = _pairs_from(trajectory)
    curve = anytime_curve(trajectory, spec)
    return [
        AnytimeRecord(t=int(t), p_anytime=float(p), e_value=float(1.0 / p))
        for t, p in zip(ks, curve)
    ]
