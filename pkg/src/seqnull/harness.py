"""Monte-Carlo harness: run test engines over generated scenarios in
parallel replicates, estimate power or detection time, evaluate the
adaptive-test power condition on a grid, and emit figure-ready CSV.
"""

from __future__ import annotations

import csv
import heapq
import math
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import stats as _sps
from scipy.ndimage import uniform_filter

from .boundaries import BoundarySpec, Family, boundary_curve, curve_constant
from .engines import (
    Combiner,
    ScreeningRule,
    TestState,
    batch_fisher,
    batch_stouffer,
    bonferroni_batch,
    bonferroni_online,
    run_amt_batch,
    run_amt_online,
    run_calibrator_test,
    run_preordered,
)
from .masking import MaskScheme, SchemeKind, mask_arrays
from .models import block_adaptive_threshold, masked_posterior
from .scenarios import (
    BatchTree,
    ConservativeNulls,
    Generated,
    GridBlock,
    OnlineBlocks,
    OnlineIid,
    OnlineTree,
    Scenario,
    SparsityLine,
    generate,
)

__all__ = [
    "TestConfig",
    "PowerEstimate",
    "PowerConditionInputs",
    "run_one",
    "estimate_power",
    "binomial_upper_quantile",
    "amt_sufficient_mu",
    "grid_flood_order",
    "tree_flood_order",
    "smoothed_grid_score",
    "center_growth_preorder",
    "run_figure",
    "FIGURE_IDS",
]

TENT = MaskScheme(SchemeKind.TENT)


@dataclass(frozen=True)
class TestConfig:
    """A named engine plus the knobs it needs; JSON-round-trippable."""

    __test__ = False  # keep pytest collection away despite the Test* name

    method: str
    alpha: float = 0.05
    boundary: BoundarySpec | None = None
    scheme: MaskScheme | None = None
    c: float = 0.05
    options: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out: dict = {"method": self.method, "alpha": self.alpha, "c": self.c}
        if self.boundary is not None:
            out["boundary"] = self.boundary.to_json()
        if self.scheme is not None:
            out["scheme"] = self.scheme.to_json()
        if self.options:
            out["options"] = self.options
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "TestConfig":
        return cls(
            method=obj["method"],
            alpha=obj.get("alpha", 0.05),
            boundary=BoundarySpec.from_json(obj["boundary"]) if "boundary" in obj else None,
            scheme=MaskScheme.from_json(obj["scheme"]) if "scheme" in obj else None,
            c=obj.get("c", 0.05),
            options=obj.get("options", {}),
        )


def _default_boundary(config: TestConfig, n: int, curved: bool = False) -> BoundarySpec:
    if config.boundary is not None:
        return config.boundary
    if curved:
        return BoundarySpec(Family.GAUSSIAN_STITCHED, config.alpha)
    return BoundarySpec(Family.GAUSSIAN_LINEAR, config.alpha, m=n / 4)


def _ps(generated: Generated) -> np.ndarray:
    return np.asarray([h.p for h in generated.hypotheses], dtype=float)


def run_one(config: TestConfig, generated: Generated, rng: np.random.Generator):
    """One replicate: returns (rejected, arrival index of rejection or None)."""
    method = config.method
    hyps = generated.hypotheses
    ps = _ps(generated)
    n = len(ps)
    scheme = config.scheme or TENT

    if method == "batch_stouffer":
        return batch_stouffer(ps, config.alpha), None
    if method == "batch_fisher":
        return batch_fisher(ps, config.alpha), None
    if method == "bonferroni_batch":
        return bonferroni_batch(ps, config.alpha), None
    if method == "bonferroni_online":
        state = bonferroni_online(hyps, alpha=config.alpha)
        return _verdict(state)
    if method in ("mst", "mfisher", "mchisq"):
        combiner = {
            "mst": Combiner.STOUFFER,
            "mfisher": Combiner.FISHER,
            "mchisq": Combiner.CHISQ,
        }[method]
        if config.boundary is None and combiner is not Combiner.STOUFFER:
            raise ValueError(f"{method} requires an explicit boundary")
        curved = bool(config.options.get("curved", False))
        state = run_preordered(ps, combiner, _default_boundary(config, n, curved))
        return _verdict(state)
    if method == "amt_batch":
        state = run_amt_batch(hyps, scheme, _default_boundary(config, n))
        return _verdict(state)
    if method == "amt_online":
        rule = ScreeningRule(c=config.c)
        state = run_amt_online(hyps, rule, scheme, _default_boundary(config, n, curved=True))
        return _verdict(state)
    if method == "imt_adaptive_block":
        rule = ScreeningRule(c=config.c, adaptive=block_adaptive_threshold)
        state = run_amt_online(hyps, rule, scheme, _default_boundary(config, n, curved=True))
        return _verdict(state)
    if method == "imt_smallest":
        state = run_amt_batch(hyps, scheme, _default_boundary(config, n))
        return _verdict(state)
    if method == "calibrator":
        state = run_calibrator_test(hyps, scheme, config.alpha, order="masked")
        return _verdict(state)
    if method == "mst_center":
        side = generated.extras["side"]
        order = center_growth_preorder(side, rng)
        state = run_preordered(ps[order], Combiner.STOUFFER, _default_boundary(config, n))
        return _verdict(state)
    if method == "imt_grid":
        return _run_imt_grid(config, generated)
    if method == "imt_tree":
        return _run_imt_tree(config, generated)
    if method == "imt_tree_prior":
        return _run_imt_tree_prior(config, generated)
    raise ValueError(f"unknown method {config.method!r}")


def _verdict(state: TestState):
    if state.rejected_at is None:
        return False, None
    if state.arrivals is not None:
        return True, int(state.arrivals[state.rejected_at - 1])
    return True, state.rejected_at


@dataclass(frozen=True)
class PowerEstimate:
    value: float
    stderr: float
    reps: int
    censored: int
    mode: str  # "power" | "detection"


def _is_online(scenario: Scenario) -> bool:
    return isinstance(scenario, (OnlineBlocks, OnlineIid, OnlineTree))


def _run_replicates(args) -> list:
    scenario, config, seed_list, online, cap = args
    out = []
    for entropy in seed_list:
        seed_seq = np.random.SeedSequence(entropy)
        rng = np.random.default_rng(seed_seq)
        gen = generate(scenario, seed=seed_seq.spawn(1)[0])
        rejected, when = run_one(config, gen, rng)
        if online:
            if rejected:
                out.append((float(when), False))
            else:
                out.append((float(cap if cap is not None else len(gen.hypotheses)), True))
        else:
            out.append((1.0 if rejected else 0.0, False))
    return out


def estimate_power(
    scenario: Scenario,
    config: TestConfig,
    reps: int | None = None,
    seed: int | None = None,
    horizon: int | None = None,
    workers: int = 1,
) -> PowerEstimate:
    """Replicate the scenario; batch scenarios report rejection frequency,
    online scenarios mean detection time with censored runs at the horizon.

    Per-replicate seeds come from one splittable seed sequence, so the result
    is identical for any worker count; workers > 1 shards replicates across
    processes and aggregates in replicate order."""
    reps = reps if reps is not None else scenario.reps
    master = seed if seed is not None else scenario.seed
    # one stable integer per replicate, independent of sharding
    entropy = np.random.SeedSequence(master).generate_state(reps, dtype=np.uint64).tolist()
    online = _is_online(scenario)
    cap = horizon or getattr(scenario, "horizon", None)
    if workers <= 1:
        results = _run_replicates((scenario, config, entropy, online, cap))
    else:
        import concurrent.futures

        shard = max(1, math.ceil(reps / workers))
        chunks = [entropy[i : i + shard] for i in range(0, reps, shard)]
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            parts = pool.map(
                _run_replicates,
                [(scenario, config, chunk, online, cap) for chunk in chunks],
            )
        results = [item for part in parts for item in part]
    values = np.asarray([v for v, _ in results])
    censored = sum(1 for _, c in results if c)
    mean = float(values.mean())
    stderr = float(values.std(ddof=1) / math.sqrt(reps)) if reps > 1 else 0.0
    return PowerEstimate(
        value=mean,
        stderr=stderr,
        reps=reps,
        censored=censored,
        mode="detection" if online else "power",
    )


# ---------------------------------------------------------------------------
# interactive grid / tree runs
#
# The model-free policies below score candidates from masked values only, so
# the full pick order is a deterministic function of the masked view and can
# be precomputed; the bit walk is then checked against the boundary in one
# vectorized pass. Equivalence with the step-by-step policy loop is covered
# by tests.
# ---------------------------------------------------------------------------


def smoothed_grid_score(masked: np.ndarray, side: int, mu_hint: float = 2.0, window: int = 5) -> np.ndarray:
    """Local evidence for ordering: the masked-value log likelihood ratio of
    the two-groups working model, box-averaged over a window of neighbors."""
    z = _sps.norm.isf(np.clip(masked, 1e-16, 0.5))
    # log cosh(z*mu) - mu^2/2, computed stably
    x = np.abs(z * mu_hint)
    evidence = x + np.log1p(np.exp(-2.0 * x)) - math.log(2.0) - 0.5 * mu_hint**2
    grid = evidence.reshape(side, side)
    return uniform_filter(grid, size=window, mode="nearest").ravel()


def grid_flood_order(side: int, masked: np.ndarray, score: np.ndarray) -> np.ndarray:
    """Pick order of the connected grid policy: seed at the best score, then
    repeatedly take the best frontier cell (score desc, masked asc, id asc).

    Cells are heaped by their rank in that lexicographic order, packed with
    the cell id into one integer, which keeps the hot loop cheap.
    """
    n = side * side
    ranked = np.lexsort((np.arange(n), masked, -score))
    priority = np.empty(n, dtype=np.int64)
    priority[ranked] = np.arange(n)
    packed = (priority * n + np.arange(n)).tolist()
    order = np.empty(n, dtype=int)
    seed = int(ranked[0])
    heap: list = [packed[seed]]
    queued = np.zeros(n, dtype=bool)
    queued[seed] = True
    count = 0
    while heap:
        cell = heapq.heappop(heap) % n
        order[count] = cell
        count += 1
        r, c = divmod(cell, side)
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < side and 0 <= cc < side:
                nb = rr * side + cc
                if not queued[nb]:
                    queued[nb] = True
                    heapq.heappush(heap, packed[nb])
    return order


def tree_flood_order(parents, masked: np.ndarray, score: np.ndarray | None = None) -> np.ndarray:
    """Pick order of the rooted-tree policy: roots first, then the best
    admissible child (score desc when given, else masked asc)."""
    n = len(parents)
    children: list[list[int]] = [[] for _ in range(n)]
    roots = []
    for child, par in enumerate(parents):
        if par is None or par < 0:
            roots.append(child)
        else:
            children[par].append(child)
    if score is not None:
        key = lambda i: (-score[i], masked[i], i)  # noqa: E731
    else:
        key = lambda i: (masked[i], i)  # noqa: E731
    heap = [(*key(i), i) for i in roots]
    heapq.heapify(heap)
    order = np.empty(n, dtype=int)
    count = 0
    while heap:
        *_, node = heapq.heappop(heap)
        order[count] = node
        count += 1
        for ch in children[node]:
            heapq.heappush(heap, (*key(ch), ch))
    return order


def _run_imt_grid(config: TestConfig, generated: Generated):
    side = generated.extras["side"]
    scheme = config.scheme or TENT
    ps = _ps(generated)
    bits, masked = mask_arrays(ps, scheme)
    mu_hint = config.options.get("mu_hint", 2.0)
    window = config.options.get("window", 5)
    score = smoothed_grid_score(masked, side, mu_hint=mu_hint, window=window)
    order = grid_flood_order(side, masked, score)
    if scheme.kind in (SchemeKind.CALIBRATOR, SchemeKind.CALIBRATOR_MIXTURE):
        state = run_calibrator_test(generated.hypotheses, scheme, config.alpha, order=order)
        return _verdict(state)
    stats = np.cumsum(bits[order])
    bounds = boundary_curve(_default_boundary(config, len(ps), curved=True), len(ps))
    return _first_crossing(stats, bounds)


def _first_crossing(stats: np.ndarray, bounds: np.ndarray):
    crossed = stats > bounds
    if crossed.any():
        return True, int(np.argmax(crossed)) + 1
    return False, None


def _run_imt_tree(config: TestConfig, generated: Generated):
    parents = generated.extras["parents"]
    scheme = config.scheme or TENT
    bits, masked = mask_arrays(_ps(generated), scheme)
    order = tree_flood_order(parents, masked)
    stats = np.cumsum(bits[order])
    bounds = boundary_curve(_default_boundary(config, len(bits), curved=True), len(bits))
    return _first_crossing(stats, bounds)


def _run_imt_tree_prior(config: TestConfig, generated: Generated):
    """Online tree policy: a node inherits its parent's posterior as prior,
    is screened out when its masked posterior falls below the discard
    threshold, and reveals its signed score to its children afterwards."""
    parents = generated.extras["parents"]
    first_gen = generated.extras["first_gen_priors"]
    ps = _ps(generated)
    scheme = config.scheme or TENT
    bits, masked = mask_arrays(ps, scheme)
    mu_hint = config.options.get("mu_hint", 2.0)
    discard = config.options.get("discard", 0.6)
    n = len(ps)
    z_abs = _sps.norm.isf(np.clip(masked, 1e-16, 0.5))
    z_signed = _sps.norm.isf(np.clip(ps, 1e-16, 1.0 - 1e-16))
    prior = np.empty(n)
    n_roots = len(first_gen)
    prior[:n_roots] = first_gen
    parr = np.asarray(parents)
    # posterior from the full(signed) z, revealed after each decision
    signed_post = np.empty(n)
    post = np.empty(n)
    for i in range(n):
        if i >= n_roots:
            prior[i] = signed_post[parr[i]]
        post[i] = masked_posterior(z_abs[i], prior[i], mu_hint)
        lr = math.exp(min(mu_hint * z_signed[i] - 0.5 * mu_hint**2, 700.0))
        pri = min(max(prior[i], 1e-12), 1 - 1e-12)
        signed_post[i] = pri * lr / (pri * lr + (1.0 - pri))
    include = post >= discard
    idx = np.flatnonzero(include)
    if len(idx) == 0:
        return False, None
    stats = np.cumsum(bits[idx])
    bounds = boundary_curve(_default_boundary(config, len(idx), curved=True), len(idx))
    crossed = stats > bounds
    if crossed.any():
        return True, int(idx[int(np.argmax(crossed))]) + 1
    return False, None


def center_growth_preorder(side: int, rng: np.random.Generator) -> np.ndarray:
    """Data-independent preorder: start at the grid center and grow a single
    connected cluster in uniformly random frontier directions."""
    n = side * side
    start = (side // 2) * side + side // 2
    order = np.empty(n, dtype=int)
    in_frontier = np.zeros(n, dtype=bool)
    included = np.zeros(n, dtype=bool)
    frontier = [start]
    in_frontier[start] = True
    for count in range(n):
        j = int(rng.integers(len(frontier)))
        cell = frontier[j]
        frontier[j] = frontier[-1]
        frontier.pop()
        included[cell] = True
        order[count] = cell
        r, c = divmod(cell, side)
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if 0 <= rr < side and 0 <= cc < side:
                nb = rr * side + cc
                if not included[nb] and not in_frontier[nb]:
                    in_frontier[nb] = True
                    frontier.append(nb)
    return order


# ---------------------------------------------------------------------------
# power condition of the adaptive test (batch)
# ---------------------------------------------------------------------------


def binomial_upper_quantile(delta: float, n: int, p: float) -> int:
    """Smallest t with P(Bin(n,p) >= t) <= delta."""
    if p <= 0.0:
        return 0
    if p >= 1.0:
        return n + 1
    return int(_sps.binom.isf(delta, n, p)) + 1


@dataclass(frozen=True)
class PowerConditionInputs:
    n0: int
    n1: int
    alpha: float = 0.05
    beta: float = 0.05
    mu_grid: tuple = tuple(np.round(np.arange(0.25, 8.01, 0.25), 2))
    mc_draws: int = 100_000
    seed: int = 0


def _condition_holds(inputs: PowerConditionInputs, mu: float, draws: int | None = None) -> bool:
    """Monte-Carlo check of the sufficient power condition at signal mu.

    Draws mc_draws replicates of the n1 non-null scores and orders each by
    absolute value; both the sign expectation per order statistic and q_j
    (the chance a null score beats the j-th order statistic) are
    Rao-Blackwellized through the conditional laws given |Z|, which the same
    draws determine: P(Z > 0 | |Z| = v) = sigmoid(2 mu v) and
    P(|Z0| > v) = 2 Phi(-v).
    """
    n0, n1 = inputs.n0, inputs.n1
    rng = np.random.default_rng(inputs.seed)
    reps = draws if draws is not None else inputs.mc_draws
    chunk = max(1, min(reps, 20_000_000 // max(n1, 1)))
    cum_pos = np.zeros(n1)
    q_sum = np.zeros(n1)
    done = 0
    while done < reps:
        take = min(chunk, reps - done)
        v = np.abs(rng.standard_normal((take, n1), dtype=np.float32) + np.float32(mu))
        v.sort(axis=1)
        v = v[:, ::-1]
        p_pos = 1.0 / (1.0 + np.exp(-2.0 * np.float32(mu) * v))
        cum_pos += p_pos.cumsum(axis=1, dtype=np.float64).sum(axis=0)
        q_sum += (2.0 * _sps.norm.sf(v.astype(np.float64))).sum(axis=0)
        done += take
    j = np.arange(1, n1 + 1)
    lhs = 2.0 * cum_pos / reps - j
    q = q_sum / reps
    n = n0 + n1
    c_sum = curve_constant(n, inputs.alpha) + curve_constant(n, inputs.beta / 2.0)
    delta = inputs.beta / (2.0 * n1)
    t = np.array([binomial_upper_quantile(delta, n0, float(qj)) for qj in q])
    rhs = c_sum * np.sqrt(j + t)
    return bool(np.any(lhs >= rhs))


def amt_sufficient_mu(inputs: PowerConditionInputs) -> float:
    """Smallest grid mu satisfying the sufficient power condition; +inf when
    the grid is exhausted ("above grid").

    The grid is searched with reduced-draw probes (satisfaction is monotone
    along the grid under common random numbers); the reported frontier is
    then confirmed with full-draw evaluations: the returned value satisfies
    the condition at mc_draws and its grid predecessor does not."""
    grid = list(inputs.mu_grid)
    coarse_draws = max(10_000, inputs.mc_draws // 5)
    coarse = lambda i: _condition_holds(inputs, float(grid[i]), coarse_draws)  # noqa: E731
    full = lambda i: _condition_holds(inputs, float(grid[i]))  # noqa: E731

    # doubling probe positions 0, 1, 3, 7, ... then bisection on the bracket
    found = None
    if coarse(0):
        found, last_bad = 0, -1
    else:
        last_bad, probe = 0, 1
        while probe < len(grid):
            if coarse(probe):
                found = probe
                break
            if probe == len(grid) - 1:
                break
            last_bad = probe
            probe = min(2 * probe + 1, len(grid) - 1)
    if found is None:
        hi = len(grid)  # coarse pass says "above grid"; confirm from the top
    else:
        lo, hi = last_bad, found
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if coarse(mid):
                hi = mid
            else:
                lo = mid
    # full-draw confirmation around the coarse frontier
    while hi < len(grid) and not full(hi):
        hi += 1
    while hi > 0 and full(hi - 1):
        hi -= 1
    return float(grid[hi]) if hi < len(grid) else math.inf


# ---------------------------------------------------------------------------
# figures
# ---------------------------------------------------------------------------

FIGURE_IDS = ["1a", "1b", "3", "4", "5", "6", "7", "8", "9", "10", "11", "D", "E"]


def _write_csv(path: Path, rows: list) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["x", "method", "mean", "stderr", "reps", "censored"])
        for row in rows:
            writer.writerow(row)


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def _row(x, method: str, est: PowerEstimate) -> list:
    return [_fmt(x), method, _fmt(est.value), _fmt(est.stderr), est.reps, est.censored]


def run_figure(figure: str, out_dir, seed: int = 0, reps: int = 500) -> Path:
    """Generate one figure dataset; returns the CSV path. Deterministic for a
    fixed master seed."""
    out = Path(out_dir) / f"figure_{figure}.csv"
    builders = {
        "1a": _figure_1a,
        "1b": _figure_1b,
        "3": _figure_3,
        "4": _figure_4,
        "5": _figure_5,
        "6": _figure_6,
        "7": _figure_7,
        "8": _figure_8,
        "9": _figure_9,
        "10": _figure_10,
        "11": _figure_11,
        "D": _figure_D,
        "E": _figure_E,
    }
    if figure not in builders:
        raise ValueError(f"unknown figure {figure!r}; choose from {FIGURE_IDS}")
    rows = builders[figure](seed, reps)
    _write_csv(out, rows)
    return out


def _cell_seed(master: int, *key) -> int:
    # crc32 is stable across processes, unlike str.__hash__
    digest = [zlib.crc32(repr(k).encode()) for k in key]
    return int(np.random.SeedSequence([master, *digest]).generate_state(1)[0])


def amt_online_linear(n: int, c: float, alpha: float = 0.05) -> BoundarySpec:
    """Linear boundary for the online adaptive test, tuned on its inclusion
    clock: null inclusions arrive at rate 2c, so the m = horizon/4 guidance
    maps to m = 2c*n/4 inclusions."""
    return BoundarySpec(Family.GAUSSIAN_LINEAR, alpha, m=max(2.0 * c * n / 4.0, 4.0))


def figure_1a_methods(n: int, alpha: float = 0.05) -> dict:
    linear = BoundarySpec(Family.GAUSSIAN_LINEAR, alpha, m=n / 4)
    c_online = 0.01
    return {
        "MST": TestConfig("mst", alpha=alpha, boundary=linear),
        "batch Stouffer": TestConfig("batch_stouffer", alpha=alpha),
        "AMT batch": TestConfig("amt_batch", alpha=alpha, boundary=linear),
        "AMT online": TestConfig(
            "amt_online", alpha=alpha, c=c_online,
            boundary=amt_online_linear(n, c_online, alpha),
        ),
    }


def _figure_1a(seed: int, reps: int) -> list:
    rows = []
    n = 10_000
    methods = figure_1a_methods(n)
    for sparsity in (0.005, 0.1, 0.25, 0.5, 0.75, 1.0):
        scenario = SparsityLine(n=n, n_nonnull=50, mu=3.0, sparsity=sparsity, reps=reps)
        for name, config in methods.items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "1a", sparsity, name))
            rows.append(_row(sparsity, name, est))
    return rows


def figure_1b_methods(horizon: int = 10_000, alpha: float = 0.05) -> dict:
    curved = BoundarySpec(Family.GAUSSIAN_STITCHED, alpha)
    return {
        "AMT online": TestConfig(
            "amt_online", alpha=alpha, c=0.05, boundary=amt_online_linear(horizon, 0.05, alpha)
        ),
        "MST": TestConfig("mst", alpha=alpha, boundary=curved),
        "online Bonferroni": TestConfig("bonferroni_online", alpha=alpha),
    }


def _figure_1b(seed: int, reps: int) -> list:
    rows = []
    methods = figure_1b_methods()
    for mu in (1.0, 2.0, 3.0, 4.0):
        scenario = OnlineIid(rate=0.05, mu=mu, horizon=10_000, reps=reps)
        for name, config in methods.items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "1b", mu, name))
            rows.append(_row(mu, name, est))
    return rows


def _figure_3(seed: int, reps: int) -> list:
    rows = []
    # the default 500 "reps" maps to the 10^5 order-statistic draws
    draws = max(10_000, reps * 200)
    for n0 in np.logspace(2, 5, 4):
        for n1 in np.logspace(2, 3, 4):
            inputs = PowerConditionInputs(
                n0=int(n0),
                n1=int(n1),
                mc_draws=draws,
                seed=_cell_seed(seed, "3", int(n0), int(n1)),
            )
            mu = amt_sufficient_mu(inputs)
            rows.append([_fmt(int(n0)), f"N1={int(n1)}", _fmt(mu), _fmt(0.0), draws, 0])
    return rows


def _figure_4(seed: int, reps: int) -> list:
    scenario = GridBlock(side=100, placement="center", mu=1.5)
    gen = generate(scenario, seed=seed)
    side = gen.extras["side"]
    bits, masked = mask_arrays(_ps(gen), TENT)
    score = smoothed_grid_score(masked, side)
    order = grid_flood_order(side, masked, score)
    stats = np.cumsum(bits[order])
    bounds = boundary_curve(BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05), len(order))
    stop = len(order)
    crossed = stats > bounds
    if crossed.any():
        stop = int(np.argmax(crossed)) + 1
    rows = []
    for k in range(stop):
        cell = int(order[k])
        rows.append([_fmt(k + 1), "statistic", _fmt(stats[k]), _fmt(0.0), 1, 0])
        rows.append([_fmt(k + 1), "bound", _fmt(bounds[k]), _fmt(0.0), 1, 0])
        rows.append([_fmt(k + 1), "picked_row", _fmt(cell // side), _fmt(0.0), 1, 0])
        rows.append([_fmt(k + 1), "picked_col", _fmt(cell % side), _fmt(0.0), 1, 0])
    return rows


def _figure_5(seed: int, reps: int) -> list:
    rows = []
    n = 100 * 100
    for placement in ("center", "corner"):
        for mu in (0.0, 0.3, 0.6, 0.9, 1.2, 1.5, 1.8):
            scenario = GridBlock(side=100, placement=placement, mu=mu, reps=reps)
            cfgs = {
                "IMT": TestConfig("imt_grid"),
                "MST": TestConfig("mst_center", boundary=BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=n / 4)),
                "batch Stouffer": TestConfig("batch_stouffer"),
            }
            for name, config in cfgs.items():
                est = estimate_power(
                    scenario, config, reps=reps, seed=_cell_seed(seed, "5", placement, mu, name)
                )
                rows.append(_row(mu, f"{name}/{placement}", est))
    return rows


def _figure_6(seed: int, reps: int) -> list:
    rows = []
    for mu in (0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0):
        scenario = BatchTree(mu=mu, reps=reps)
        n = 801
        cfgs = {
            # +/-1 bits with 7 non-nulls demand a boundary tight at small k:
            # a linear bound with m near the non-null sub-tree size (the
            # curved bound exceeds k itself until k ~ 17)
            "IMT": TestConfig("imt_tree", boundary=BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=8)),
            "MST": TestConfig("mst", boundary=BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=n / 4)),
            "batch Stouffer": TestConfig("batch_stouffer"),
        }
        for name, config in cfgs.items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "6", mu, name))
            rows.append(_row(mu, name, est))
    return rows


def _figure_7(seed: int, reps: int) -> list:
    rows = []
    curved = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
    for mu in (1.0, 2.0, 3.0, 4.0):
        scenario = OnlineBlocks(mu=mu, horizon=30_000, reps=reps)
        cfgs = {
            "IMT": TestConfig("imt_adaptive_block", c=0.05, boundary=curved),
            "AMT": TestConfig("amt_online", c=0.05, boundary=curved),
            "MST": TestConfig("mst", boundary=curved),
            "Bonferroni": TestConfig("bonferroni_online"),
        }
        for name, config in cfgs.items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "7", mu, name))
            rows.append(_row(mu, name, est))
    return rows


def _figure_8(seed: int, reps: int) -> list:
    rows = []
    curved = BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05)
    for mu in (0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0):
        scenario = OnlineTree(mu=mu, horizon=10_000, reps=reps)
        cfgs = {
            "IMT": TestConfig("imt_tree_prior", boundary=curved),
            "AMT": TestConfig("amt_online", c=0.05, boundary=curved),
            "MST": TestConfig("mst", boundary=curved),
            "Bonferroni": TestConfig("bonferroni_online"),
        }
        for name, config in cfgs.items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "8", mu, name))
            rows.append(_row(mu, name, est))
    return rows


def figure_9_methods(n: int, alpha: float = 0.05) -> dict:
    linear = BoundarySpec(Family.GAUSSIAN_LINEAR, alpha, m=n / 4)
    curved = BoundarySpec(Family.GAUSSIAN_STITCHED, alpha)
    return {
        "tent IMT": TestConfig("imt_smallest", scheme=MaskScheme(SchemeKind.TENT), boundary=curved),
        "railway IMT": TestConfig("imt_smallest", scheme=MaskScheme(SchemeKind.RAILWAY), boundary=curved),
        "MST": TestConfig("mst", boundary=linear),
        "batch Stouffer": TestConfig("batch_stouffer"),
    }


def _figure_9(seed: int, reps: int) -> list:
    rows = []
    methods = figure_9_methods(n=1000)
    for null_mean in (0.0, -0.5, -1.0, -1.5, -2.0, -2.5, -3.0, -3.5, -4.0):
        scenario = ConservativeNulls(null_mean=null_mean, reps=reps)
        for name, config in methods.items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "9", null_mean, name))
            rows.append(_row(null_mean, name, est))
    return rows


def _figure_10(seed: int, reps: int) -> list:
    rows = []
    grid = np.linspace(0.001, 0.999, 200)
    schemes = {"h": TENT}
    for c in (0.2, 0.4, 0.6, 0.8):
        schemes[f"f_{c}"] = MaskScheme(SchemeKind.CALIBRATOR, c=c)
    schemes["f_m"] = MaskScheme(SchemeKind.CALIBRATOR_MIXTURE)
    for name, scheme in schemes.items():
        bits, masked = mask_arrays(grid, scheme)
        for p, b, g in zip(grid, bits, masked):
            rows.append([_fmt(p), f"{name}/bit", _fmt(b), _fmt(0.0), 1, 0])
            rows.append([_fmt(p), f"{name}/masked", _fmt(g), _fmt(0.0), 1, 0])
    return rows


def figure_11_methods() -> dict:
    out = {"original bit": TestConfig("imt_grid", scheme=MaskScheme(SchemeKind.TENT))}
    for c in (0.2, 0.4, 0.6, 0.8):
        out[f"calibrator c={c}"] = TestConfig(
            "imt_grid", scheme=MaskScheme(SchemeKind.CALIBRATOR, c=c)
        )
    out["mixture"] = TestConfig("imt_grid", scheme=MaskScheme(SchemeKind.CALIBRATOR_MIXTURE))
    return out


def _figure_11(seed: int, reps: int) -> list:
    rows = []
    for mu in (0.9, 1.2, 1.5, 1.8):
        scenario = GridBlock(side=100, placement="center", mu=mu, reps=reps)
        for name, config in figure_11_methods().items():
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, "11", mu, name))
            rows.append(_row(mu, name, est))
    return rows


def _bound_sweep(seed: int, reps: int, combiner: str, bounds: dict) -> list:
    rows = []
    n = 10_000
    for frac in (0.01, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0):
        scenario = SparsityLine(n=n, n_nonnull=100, mu=1.5, sparsity=frac, reps=reps)
        for name, boundary in bounds.items():
            config = TestConfig(combiner, boundary=boundary)
            est = estimate_power(scenario, config, reps=reps, seed=_cell_seed(seed, combiner, frac, name))
            rows.append(_row(frac, name, est))
    return rows


def _figure_D(seed: int, reps: int) -> list:
    n = 10_000
    bounds = {
        "linear m=n/4": BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=n / 4),
        "linear m=n/2": BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=n / 2),
        "linear m=3n/4": BoundarySpec(Family.GAUSSIAN_LINEAR, 0.05, m=3 * n / 4),
        "stitched": BoundarySpec(Family.GAUSSIAN_STITCHED, 0.05),
        "discrete mixture": BoundarySpec(Family.GAUSSIAN_DISCRETE_MIXTURE, 0.05),
        "inverted stitching": BoundarySpec(Family.GAUSSIAN_INVERTED_STITCHING, 0.05, horizon=n),
    }
    return _bound_sweep(seed, reps, "mst", bounds)


def _figure_E(seed: int, reps: int) -> list:
    n = 10_000
    bounds = {
        "linear m=n/4": BoundarySpec(Family.EXP_LINEAR, 0.05, m=n / 4),
        "linear m=n/2": BoundarySpec(Family.EXP_LINEAR, 0.05, m=n / 2),
        "linear m=3n/4": BoundarySpec(Family.EXP_LINEAR, 0.05, m=3 * n / 4),
        "gamma curved": BoundarySpec(Family.GAMMA_CURVED, 0.05),
    }
    return _bound_sweep(seed, reps, "mfisher", bounds)
