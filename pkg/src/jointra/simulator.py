"""TTI-driven multi-cell uplink simulation.

Each drop places base stations on a regular layout and users uniformly in
an annulus around their serving station.  Channels are Rayleigh block
fading per TTI, scaled by distance path loss.  Schedulers:

``joint``
    all cells solved together as one BIP over inter-cell pairs;
``single_cell``
    every cell solves its own BIP assuming no inter-cell interference;
``round_robin``
    users take turns on equal contiguous shares of the band.

Realised throughput always uses the interference actually created by the
co-scheduled users of the other cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .bip import Allocation, BipProblem, solve_branch_and_bound, solution_to_allocation
from .config import RunConfig
from .linklevel import LinkState, SystemConfig, co_channel_sinr
from .metric import FairnessState, build_reward_vector, update_average_throughput
from .pairing import CellSizes, PairMatrix
from .patterns import Pattern, PatternMatrix
from .powerctl import PowerControlParams, subcarrier_power_table

GEOMETRY_STREAM, CHANNEL_STREAM = 0, 1


def bs_layout(cells: int, isd: float) -> np.ndarray:
    """Base station coordinates; every neighbouring pair is ``isd`` apart."""
    if cells == 1:
        pts = [(0.0, 0.0)]
    elif cells == 2:
        pts = [(0.0, 0.0), (isd, 0.0)]
    elif cells == 3:
        pts = [(0.0, 0.0), (isd, 0.0), (isd / 2, isd * math.sqrt(3) / 2)]
    elif cells <= 7:
        ring = [(isd * math.cos(a), isd * math.sin(a))
                for a in np.arange(6) * math.pi / 3]
        pts = [(0.0, 0.0)] + ring[:cells - 1]
    else:
        raise ValueError(f"no layout for {cells} cells")
    return np.array(pts)


def pathloss_db(distance_m, config: RunConfig):
    """Distance-dependent path loss; ``case1`` is ``a + b log10(d_km)``."""
    d_km = np.asarray(distance_m, dtype=float) / 1000.0
    return config.pathloss_intercept + config.pathloss_slope * np.log10(d_km)


@dataclass
class Scenario:
    bs_positions: np.ndarray
    user_positions: np.ndarray
    serving: np.ndarray
    sizes: CellSizes
    pathloss_db: np.ndarray
    cell_radius: float
    min_distance: float

    @property
    def n_users(self) -> int:
        return len(self.serving)

    def serving_distance(self) -> np.ndarray:
        return np.linalg.norm(self.user_positions - self.bs_positions[self.serving], axis=1)


def generate_scenario(seed: int, config: RunConfig) -> Scenario:
    errs = config.validate()
    if errs:
        from .errors import ConfigError
        raise ConfigError(errs)
    sizes = config.sizes
    bs = bs_layout(config.cells, config.isd)
    radius = config.isd / 2.0
    dmin = config.min_distance
    serving = np.repeat(np.arange(config.cells), sizes)
    # one stream per cell so the first k users are shared by every larger k
    r, theta, shadow = [], [], []
    for u, k in enumerate(sizes):
        rng = np.random.default_rng(np.random.SeedSequence([seed, GEOMETRY_STREAM, u]))
        draws = rng.random((k, 2))
        # inverse CDF of the uniform-in-annulus radius
        r.append(np.sqrt(dmin ** 2 + draws[:, 0] * (radius ** 2 - dmin ** 2)))
        theta.append(draws[:, 1] * 2.0 * math.pi)
        rng = np.random.default_rng(np.random.SeedSequence([seed, GEOMETRY_STREAM, u, 1]))
        shadow.append(rng.standard_normal((k, config.cells)))
    r, theta = np.concatenate(r), np.concatenate(theta)
    pos = bs[serving] + np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    dist = np.linalg.norm(pos[:, None, :] - bs[None, :, :], axis=2)
    pl = pathloss_db(np.maximum(dist, dmin), config)
    if config.shadowing_std > 0:
        pl = pl + config.shadowing_std * np.concatenate(shadow)
    return Scenario(bs, pos, serving, sizes, pl, radius, dmin)


def draw_channels(scenario: Scenario, seed: int, tti: int, config: RunConfig) -> LinkState:
    """Unit-power complex Gaussian fading scaled by ``10^(-PL/20)``.

    Every user has its own stream keyed by (seed, tti, cell, user), so
    adding users to a cell leaves the existing users' channels unchanged.
    """
    n, nb = scenario.pathloss_db.shape
    q = config.subcarriers_per_rb
    per = config.rbs if config.fading == "rb" else config.rbs * q
    shape = (nb, per, config.rx_antennas, config.tx_antennas)
    g = np.empty((n,) + shape, dtype=complex)
    i = 0
    for u, k in enumerate(scenario.sizes):
        for user in range(k):
            rng = np.random.default_rng(
                np.random.SeedSequence([seed, CHANNEL_STREAM, tti, u, user]))
            z = rng.standard_normal((2,) + shape)
            g[i] = (z[0] + 1j * z[1]) / math.sqrt(2.0)
            i += 1
    if config.fading == "rb":
        g = np.repeat(g, q, axis=2)
    amp = 10.0 ** (-scenario.pathloss_db / 20.0)
    return LinkState(g * amp[:, :, None, None, None], scenario.pathloss_db, scenario.serving)


@dataclass
class TtiResult:
    allocation: Allocation
    rates: np.ndarray
    bits: np.ndarray
    objective: float
    node_count: int
    status: str
    fairness: FairnessState
    predicted_rates: np.ndarray | None = None


class Context:
    """Structures shared by every TTI of one configuration."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.sizes = config.sizes
        self.system: SystemConfig = config.system()
        self.pc: PowerControlParams = config.power_control()
        self.patterns = PatternMatrix(config.rbs)
        self.pairs = PairMatrix(self.sizes)
        self.cell_pairs = [PairMatrix((k,)) for k in self.sizes]
        self.offsets = np.array(self.sizes.offsets)

    def initial_fairness(self) -> FairnessState:
        c = self.config
        return FairnessState.initial(self.sizes.total_users, c.delta, c.beta, c.epsilon_init)

    def cell_users(self, u: int) -> np.ndarray:
        return np.arange(self.offsets[u], self.offsets[u] + self.sizes[u])


def realized_rates(ctx: Context, links: LinkState, allocation: Allocation,
                   isolated: bool = False) -> np.ndarray:
    """Per-user throughput (bits/s) of an allocation.

    With ``isolated`` every cell is evaluated as if the others were silent,
    which is what an interference-unaware scheduler predicts.
    """
    f, q = ctx.config.rbs, ctx.system.subcarriers_per_rb
    owner = allocation.user_of_rb()
    members = np.where(owner >= 0, owner + ctx.offsets[:, None], -1).T
    counts = allocation.rb_counts()
    table = subcarrier_power_table(ctx.pc, links.serving_pathloss(), f, q)
    powers = np.where(members >= 0, table[np.maximum(members, 0), counts[np.maximum(members, 0)]],
                      0.0)
    sc = np.arange(f * q).reshape(f, q)
    rates = np.zeros(ctx.sizes.total_users)
    ncell = ctx.sizes.cells
    views = [None] if not isolated else range(ncell)
    for only in views:
        m = members
        if only is not None:
            m = np.full_like(members, -1)
            m[:, only] = members[:, only]
        sinr = co_channel_sinr(links, m, np.where(m >= 0, powers, 0.0), sc, ctx.system)
        rb_rate = ctx.system.subcarrier_bandwidth * np.log2(1.0 + sinr).sum(axis=2)
        for u in range(ncell) if only is None else (only,):
            ok = m[:, u] >= 0
            np.add.at(rates, m[ok, u], rb_rate[ok, u])
    return rates


def _finish(ctx, fairness, allocation, rates, objective, nodes, status, predicted=None):
    bits = rates * ctx.config.tti_duration
    return TtiResult(allocation, rates, bits, objective, nodes, status,
                     update_average_throughput(fairness, rates), predicted)


def run_joint_scheduler(ctx: Context, fairness: FairnessState, links: LinkState) -> TtiResult:
    rewards = build_reward_vector(ctx.sizes, ctx.patterns, links, ctx.pc, fairness, ctx.system,
                                  pairs=ctx.pairs)
    problem = BipProblem(ctx.patterns, ctx.pairs, rewards)
    sol = solve_branch_and_bound(problem, node_limit=ctx.config.node_limit)
    allocation = solution_to_allocation(sol.x, ctx.sizes, ctx.patterns)
    rates = realized_rates(ctx, links, allocation)
    return _finish(ctx, fairness, allocation, rates, sol.objective_value, sol.node_count,
                   sol.status, predicted=rates)


def _cell_links(links: LinkState, users: np.ndarray, u: int) -> LinkState:
    return LinkState(links.channels[users][:, [u]], links.pathloss_db[users][:, [u]],
                     np.zeros(len(users), dtype=np.intp))


def run_single_cell_baseline(ctx: Context, fairness: FairnessState,
                             links: LinkState) -> TtiResult:
    cells = []
    objective, nodes, status = 0.0, 0, "optimal"
    for u in range(ctx.sizes.cells):
        users = ctx.cell_users(u)
        local = _cell_links(links, users, u)
        sizes = (ctx.sizes[u],)
        rewards = build_reward_vector(sizes, ctx.patterns, local, ctx.pc, fairness.subset(users),
                                      ctx.system, pairs=ctx.cell_pairs[u])
        sol = solve_branch_and_bound(BipProblem(ctx.patterns, ctx.cell_pairs[u], rewards),
                                     node_limit=ctx.config.node_limit)
        objective += sol.objective_value
        nodes += sol.node_count
        if sol.status != "optimal":
            status = sol.status
        cells.append(solution_to_allocation(sol.x, sizes, ctx.patterns).assignments[0])
    allocation = Allocation(ctx.config.rbs, tuple(cells))
    rates = realized_rates(ctx, links, allocation)
    predicted = realized_rates(ctx, links, allocation, isolated=True)
    return _finish(ctx, fairness, allocation, rates, objective, nodes, status, predicted)


def round_robin_allocation(sizes, rb_count: int, tti: int) -> Allocation:
    """Contiguous equal shares for ``min(K, F)`` users per cell, rotating each TTI."""
    cells = []
    for k in CellSizes(sizes):
        n = min(k, rb_count)
        first = (tti * n) % k
        base, extra = divmod(rb_count, n)
        cell: list[Pattern | None] = [None] * k
        start = 1
        for slot in range(n):
            length = base + (1 if slot < extra else 0)
            cell[(first + slot) % k] = Pattern(start, length)
            start += length
        cells.append(tuple(cell))
    return Allocation(rb_count, tuple(cells))


def run_round_robin_baseline(ctx: Context, fairness: FairnessState, links: LinkState,
                             tti: int) -> TtiResult:
    allocation = round_robin_allocation(ctx.sizes, ctx.config.rbs, tti)
    rates = realized_rates(ctx, links, allocation)
    return _finish(ctx, fairness, allocation, rates, float("nan"), 0, "optimal")


def run_scheduler(name: str, ctx: Context, fairness: FairnessState, links: LinkState,
                  tti: int) -> TtiResult:
    if name == "joint":
        return run_joint_scheduler(ctx, fairness, links)
    if name == "single_cell":
        return run_single_cell_baseline(ctx, fairness, links)
    if name == "round_robin":
        return run_round_robin_baseline(ctx, fairness, links, tti)
    raise ValueError(f"unknown scheduler {name!r}")


@dataclass
class RunStatistics:
    average_spectrum_efficiency: float
    user_throughput_cdf: np.ndarray
    fifth_percentile_throughput: float
    jain_index: float
    node_limited_ttis: int = 0

    @property
    def fifth_percentile_kbps(self) -> float:
        return self.fifth_percentile_throughput / 1000.0


def jain_index(values) -> float:
    v = np.asarray(values, dtype=float)
    sq = float(np.sum(v * v))
    if sq == 0.0:
        return 1.0
    return float(np.sum(v)) ** 2 / (v.size * sq)


def compute_statistics(results, config: RunConfig) -> RunStatistics:
    """Aggregate a drop's TTI results.

    Spectrum efficiency is served bits over (elapsed time x occupied
    bandwidth x sectors); user throughputs are per-user averages over the
    drop in bits/s and the 5th percentile is linearly interpolated.
    """
    results = list(results)
    if not results:
        raise ValueError("at least one TTI result is required")
    bits = np.sum([r.bits for r in results], axis=0)
    elapsed = len(results) * config.tti_duration
    per_user = bits / elapsed
    se = float(bits.sum() / (elapsed * config.bandwidth * config.cells))
    limited = sum(r.status != "optimal" for r in results)
    return RunStatistics(se, np.sort(per_user), float(np.percentile(per_user, 5)),
                         jain_index(per_user), limited)


@dataclass
class DropResult:
    seed: int
    users_per_cell: tuple[int, ...]
    statistics: dict[str, RunStatistics] = field(default_factory=dict)


def simulate_drop(config: RunConfig, seed: int, schedulers=None, ttis: int | None = None,
                  keep_results: bool = False):
    """Run every scheduler over the same drop and channel realisations.

    Returns a :class:`DropResult`; with ``keep_results`` also the per-TTI
    results of each scheduler.
    """
    schedulers = tuple(schedulers or config.schedulers)
    ttis = ttis or config.ttis
    ctx = Context(config)
    scenario = generate_scenario(seed, config)
    state = {s: ctx.initial_fairness() for s in schedulers}
    history: dict[str, list[TtiResult]] = {s: [] for s in schedulers}
    for t in range(ttis):
        links = draw_channels(scenario, seed, t, config)
        for s in schedulers:
            res = run_scheduler(s, ctx, state[s], links, t)
            state[s] = res.fairness
            history[s].append(res)
    drop = DropResult(seed, tuple(ctx.sizes),
                      {s: compute_statistics(history[s], config) for s in schedulers})
    return (drop, history) if keep_results else drop
