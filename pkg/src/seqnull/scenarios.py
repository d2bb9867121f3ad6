"""Scenario generators reproducing the simulation layouts: a sparsity-ordered
line, clustered non-nulls on a grid, non-null sub-trees in batch and online
trees, online blocks, and conservative-null settings.

Each generator draws Z_i ~ N(mu_i, 1) and exposes p_i = 1 - Phi(Z_i) through
engine-facing Hypothesis records; truth labels ride out-of-band on the
Generated wrapper and never reach an engine.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Union

import numpy as np
from scipy import stats as _sps

from .engines import Hypothesis

__all__ = [
    "SparsityLine",
    "GridBlock",
    "BatchTree",
    "OnlineBlocks",
    "OnlineIid",
    "OnlineTree",
    "ConservativeNulls",
    "Scenario",
    "Generated",
    "generate",
    "scenario_from_json",
    "scenario_to_json",
]


@dataclass(frozen=True)
class SparsityLine:
    """Non-nulls uniformly placed among the first sparsity*n positions."""

    n: int = 10_000
    n_nonnull: int = 50
    mu: float = 3.0
    sparsity: float = 0.005
    seed: int = 0
    reps: int = 500


@dataclass(frozen=True)
class GridBlock:
    """A disc of non-nulls on a side x side grid; corner placement keeps the
    disc unclipped by centering it at (ceil(radius), ceil(radius))."""

    side: int = 100
    radius: float = 7.0
    placement: str = "center"
    mu: float = 1.5
    seed: int = 0
    reps: int = 500

    def __post_init__(self) -> None:
        if self.placement not in ("center", "corner"):
            raise ValueError("placement must be 'center' or 'corner'")


@dataclass(frozen=True)
class BatchTree:
    """Fixed tree (root_children at level 1, then fanout) with a 7-node
    non-null sub-tree rooted at a random level-1 node."""

    root_children: int = 20
    fanout: int = 3
    levels: int = 5
    n_nonnull: int = 7
    mu: float = 2.0
    seed: int = 0
    reps: int = 500


@dataclass(frozen=True)
class OnlineBlocks:
    """Blocks of block_len non-nulls with geometric gaps sized so that a
    window of `window` arrivals contains one block on average."""

    block_len: int = 500
    window: int = 10_000
    mu: float = 2.0
    horizon: int = 10_000
    seed: int = 0
    reps: int = 500


@dataclass(frozen=True)
class OnlineIid:
    """Each arrival is independently non-null with probability rate."""

    rate: float = 0.05
    mu: float = 2.0
    horizon: int = 10_000
    seed: int = 0
    reps: int = 500


@dataclass(frozen=True)
class OnlineTree:
    """Level-by-level growing tree: the first generation splits into weak and
    strong prior groups; each node's children scale its non-null probability
    by the decay proportions."""

    root_children: int = 40
    fanout: int = 3
    decay: tuple = (1.0, 0.2, 0.0)
    n_strong: int = 10
    strong_prior: float = 0.9
    weak_prior: float = 0.1
    mu: float = 2.0
    horizon: int = 10_000
    seed: int = 0
    reps: int = 500


@dataclass(frozen=True)
class ConservativeNulls:
    """Nulls drawn at a negative mean so their p-values pool near one."""

    n: int = 1000
    n_nonnull: int = 100
    mu: float = 1.5
    null_mean: float = 0.0
    seed: int = 0
    reps: int = 500


Scenario = Union[
    SparsityLine,
    GridBlock,
    BatchTree,
    OnlineBlocks,
    OnlineIid,
    OnlineTree,
    ConservativeNulls,
]

_KINDS = {
    cls.__name__: cls
    for cls in (
        SparsityLine,
        GridBlock,
        BatchTree,
        OnlineBlocks,
        OnlineIid,
        OnlineTree,
        ConservativeNulls,
    )
}


def scenario_to_json(scenario: Scenario) -> dict:
    out = {"kind": type(scenario).__name__}
    for f in fields(scenario):
        value = getattr(scenario, f.name)
        out[f.name] = list(value) if isinstance(value, tuple) else value
    return out


def scenario_from_json(obj: dict) -> Scenario:
    kind = _KINDS[obj["kind"]]
    kwargs = {f.name: obj[f.name] for f in fields(kind) if f.name in obj}
    if "decay" in kwargs:
        kwargs["decay"] = tuple(kwargs["decay"])
    return kind(**kwargs)


@dataclass
class Generated:
    """Engine-facing hypotheses plus out-of-band truth for scoring only."""

    hypotheses: list
    truth: np.ndarray
    extras: dict = field(default_factory=dict)


def _pvalues(rng: np.random.Generator, means: np.ndarray) -> np.ndarray:
    z = rng.standard_normal(len(means)) + means
    return _sps.norm.sf(z)


def generate(scenario: Scenario, seed: int | None = None) -> Generated:
    rng = np.random.default_rng(scenario.seed if seed is None else seed)
    if isinstance(scenario, SparsityLine):
        return _gen_sparsity(scenario, rng)
    if isinstance(scenario, GridBlock):
        return _gen_grid(scenario, rng)
    if isinstance(scenario, BatchTree):
        return _gen_batch_tree(scenario, rng)
    if isinstance(scenario, OnlineBlocks):
        return _gen_blocks(scenario, rng)
    if isinstance(scenario, OnlineIid):
        return _gen_iid(scenario, rng)
    if isinstance(scenario, OnlineTree):
        return _gen_online_tree(scenario, rng)
    if isinstance(scenario, ConservativeNulls):
        return _gen_conservative(scenario, rng)
    raise TypeError(f"unknown scenario {scenario!r}")


def _gen_sparsity(s: SparsityLine, rng) -> Generated:
    front = max(s.n_nonnull, int(round(s.sparsity * s.n)))
    if front > s.n:
        raise ValueError("sparsity window exceeds n")
    truth = np.zeros(s.n, dtype=bool)
    truth[rng.choice(front, size=s.n_nonnull, replace=False)] = True
    p = _pvalues(rng, np.where(truth, s.mu, 0.0))
    hyps = [Hypothesis(id=i, p=float(p[i]), arrival_time=i + 1) for i in range(s.n)]
    return Generated(hyps, truth)


def disc_cells(side: int, center: tuple, radius: float) -> list:
    r0, c0 = center
    cells = []
    for r in range(side):
        for c in range(side):
            if (r - r0) ** 2 + (c - c0) ** 2 <= radius**2:
                cells.append((r, c))
    return cells


def _gen_grid(s: GridBlock, rng) -> Generated:
    n = s.side * s.side
    edge = int(np.ceil(s.radius))
    center = (s.side // 2, s.side // 2) if s.placement == "center" else (edge, edge)
    block = disc_cells(s.side, center, s.radius)
    truth = np.zeros(n, dtype=bool)
    for r, c in block:
        truth[r * s.side + c] = True
    p = _pvalues(rng, np.where(truth, s.mu, 0.0))
    hyps = [
        Hypothesis(id=i, p=float(p[i]), covariates=(i // s.side, i % s.side))
        for i in range(n)
    ]
    return Generated(
        hyps,
        truth,
        extras={"side": s.side, "block_center": center, "realized_nonnull": len(block)},
    )


def _tree_parents(root_children: int, fanout: int, levels: int) -> list:
    """Rooted tree in BFS order: the root at node 0 has root_children
    children, every later node has fanout children; `levels` counts the root
    as level one (levels=5 with 20/3 gives the 801-node tree)."""
    parents: list = [-1]
    prev_level = []
    for _ in range(root_children):
        prev_level.append(len(parents))
        parents.append(0)
    for _ in range(levels - 2):
        level = []
        for node in prev_level:
            for _ in range(fanout):
                level.append(len(parents))
                parents.append(node)
        prev_level = level
    return parents


def _gen_batch_tree(s: BatchTree, rng) -> Generated:
    parents = _tree_parents(s.root_children, s.fanout, s.levels)
    n = len(parents)
    children: list[list[int]] = [[] for _ in range(n)]
    for child, par in enumerate(parents):
        if par >= 0:
            children[par].append(child)
    # non-null sub-tree: a random level-1 node plus its first descendants
    root = 1 + int(rng.integers(s.root_children))
    sub = [root]
    frontier = list(children[root])
    while len(sub) < s.n_nonnull and frontier:
        node = frontier.pop(0)
        sub.append(node)
        frontier.extend(children[node])
    truth = np.zeros(n, dtype=bool)
    truth[sub[: s.n_nonnull]] = True
    p = _pvalues(rng, np.where(truth, s.mu, 0.0))
    levels = np.zeros(n, dtype=int)
    for child, par in enumerate(parents):
        if par >= 0:
            levels[child] = levels[par] + 1
    hyps = [
        Hypothesis(id=i, p=float(p[i]), covariates=(int(levels[i]), i), arrival_time=i + 1)
        for i in range(n)
    ]
    return Generated(hyps, truth, extras={"parents": parents})


def _gen_blocks(s: OnlineBlocks, rng) -> Generated:
    truth = np.zeros(s.horizon, dtype=bool)
    gap_mean = max(s.window - s.block_len, 1)
    pos = int(rng.geometric(1.0 / gap_mean))
    while pos < s.horizon:
        truth[pos : pos + s.block_len] = True
        pos += s.block_len + int(rng.geometric(1.0 / gap_mean))
    p = _pvalues(rng, np.where(truth, s.mu, 0.0))
    hyps = [Hypothesis(id=i, p=float(p[i]), arrival_time=i + 1) for i in range(s.horizon)]
    return Generated(hyps, truth)


def _gen_iid(s: OnlineIid, rng) -> Generated:
    truth = rng.random(s.horizon) < s.rate
    p = _pvalues(rng, np.where(truth, s.mu, 0.0))
    hyps = [Hypothesis(id=i, p=float(p[i]), arrival_time=i + 1) for i in range(s.horizon)]
    return Generated(hyps, truth)


def _gen_online_tree(s: OnlineTree, rng) -> Generated:
    priors = list(
        rng.permutation(
            [s.strong_prior] * s.n_strong
            + [s.weak_prior] * (s.root_children - s.n_strong)
        )
    )
    parents: list = [-1] * s.root_children
    level_of: list = [1] * s.root_children
    node = 0
    while len(parents) < s.horizon:
        for j in range(s.fanout):
            if len(parents) >= s.horizon:
                break
            parents.append(node)
            priors.append(priors[node] * s.decay[j % len(s.decay)])
            level_of.append(level_of[node] + 1)
        node += 1
    priors_arr = np.asarray(priors[: s.horizon], dtype=float)
    truth = rng.random(s.horizon) < priors_arr
    p = _pvalues(rng, np.where(truth, s.mu, 0.0))
    hyps = [
        Hypothesis(id=i, p=float(p[i]), covariates=(level_of[i], parents[i]), arrival_time=i + 1)
        for i in range(s.horizon)
    ]
    return Generated(
        hyps,
        truth,
        extras={
            "parents": parents[: s.horizon],
            "first_gen_priors": priors_arr[: s.root_children].copy(),
        },
    )


def _gen_conservative(s: ConservativeNulls, rng) -> Generated:
    truth = np.zeros(s.n, dtype=bool)
    truth[rng.choice(s.n, size=s.n_nonnull, replace=False)] = True
    p = _pvalues(rng, np.where(truth, s.mu, s.null_mean))
    hyps = [Hypothesis(id=i, p=float(p[i]), arrival_time=i + 1) for i in range(s.n)]
    return Generated(hyps, truth)
