"""Exact simulation of the finite-portfolio default cascade.

Firm i defaults at rate exp(beta_i * m - gamma_i) while alive, where m
is the impact-weighted defaulted fraction (1/n) * sum_j alpha_j y_j.
Defaults are absorbing. Paths are generated by the classic
next-reaction (Gillespie) scheme, aggregated per class: rates depend on
a firm only through its class, so we first pick the reacting class and
then a uniformly random alive firm inside it, which preserves exactness
by exchangeability.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import GridOutOfRange
from .model import Portfolio
from .rng import REPLICA_NS, stream

# replicas are aggregated in fixed blocks so that float reductions have
# a schedule-independent order
_CHUNK = 64
_BATCH = 1024  # RNG draws buffered per refill


@dataclass(frozen=True)
class EventLog:
    """One simulated path: strictly increasing default times in
    (0, horizon], each firm at most once."""

    times: np.ndarray
    firms: np.ndarray
    horizon: float
    portfolio: Portfolio


@dataclass(frozen=True)
class PathGrid:
    """A path evaluated on a time grid (right-continuous: the value at
    t counts defaults occurring at exactly t)."""

    t_grid: np.ndarray
    class_fraction: np.ndarray
    loss_fraction: np.ndarray


@dataclass(frozen=True)
class EnsembleStats:
    """Cross-replica summaries of the loss process on a grid.

    Attributes
    ----------
    t_grid : (G,) ndarray
    mean_loss_fraction : (G,) ndarray
        Mean over replicas of the per-firm loss.
    var_scaled_loss : (G,) ndarray
        Sample variance over replicas of sqrt(n) * (loss - mean), i.e.
        n times the sample variance of the loss fraction.
    mean_class_fractions : (G, K) ndarray
    excess_prob : dict[float, ndarray]
        Per threshold x, the fraction of replicas with loss >= x.
    replicas : int
    seed : int
    """

    t_grid: np.ndarray
    mean_loss_fraction: np.ndarray
    var_scaled_loss: np.ndarray
    mean_class_fractions: np.ndarray
    excess_prob: dict
    replicas: int
    seed: int


def intensities(portfolio: Portfolio, defaulted: np.ndarray) -> np.ndarray:
    """Per-firm default intensities in the given state.

    Defaulted firms have intensity zero; an alive firm of class k jumps
    at rate exp(beta_k * m - gamma_k) with m the impact-weighted
    defaulted fraction.
    """
    env = portfolio.environment
    cls = portfolio.class_of
    defaulted = np.asarray(defaulted, dtype=bool)
    m = float(env.alpha[cls] @ defaulted) / portfolio.n
    rates = np.exp(env.beta[cls] * m - env.gamma[cls])
    rates[defaulted] = 0.0
    return rates


def simulate_path(
    portfolio: Portfolio, horizon: float, rng: np.random.Generator
) -> EventLog:
    """Simulate one path of the default cascade up to `horizon`.

    Draw order per event is fixed (waiting time, class, firm), so the
    log is a pure function of (portfolio, horizon, generator state).
    """
    if horizon <= 0:
        raise ValueError("horizon must be positive")
    env = portfolio.environment
    n = portfolio.n
    beta = env.beta.tolist()
    gamma = env.gamma.tolist()
    impact_step = (env.alpha / n).tolist()
    alive = [
        np.nonzero(portfolio.class_of == k)[0].tolist() for k in range(env.k)
    ]
    counts = [len(group) for group in alive]
    k_range = range(env.k)
    exp = math.exp

    exp_buf = rng.standard_exponential(_BATCH).tolist()
    u_buf = rng.random(2 * _BATCH).tolist()
    ei = ui = 0

    t = 0.0
    m = 0.0
    times: list[float] = []
    firms: list[int] = []
    rates = [0.0] * env.k
    while True:
        total = 0.0
        for k in k_range:
            r = counts[k] * exp(beta[k] * m - gamma[k]) if counts[k] else 0.0
            rates[k] = r
            total += r
        if total <= 0.0:
            break
        if ei == _BATCH:
            exp_buf = rng.standard_exponential(_BATCH).tolist()
            ei = 0
        t += exp_buf[ei] / total
        ei += 1
        if t > horizon:
            break
        if ui == 2 * _BATCH:
            u_buf = rng.random(2 * _BATCH).tolist()
            ui = 0
        pick = u_buf[ui] * total
        u_firm = u_buf[ui + 1]
        ui += 2
        k = 0
        acc = rates[0]
        while pick >= acc and k + 1 < env.k:
            k += 1
            acc += rates[k]
        group = alive[k]
        j = int(u_firm * len(group))
        if j == len(group):  # u_firm is < 1 but guard the rounding edge
            j -= 1
        firm = group[j]
        group[j] = group[-1]
        group.pop()
        counts[k] -= 1
        m += impact_step[k]
        times.append(t)
        firms.append(firm)

    times_arr = np.asarray(times, dtype=float)
    firms_arr = np.asarray(firms, dtype=np.intp)
    times_arr.flags.writeable = False
    firms_arr.flags.writeable = False
    return EventLog(
        times=times_arr, firms=firms_arr, horizon=horizon, portfolio=portfolio
    )


def loss_process(log: EventLog, t_grid: np.ndarray) -> PathGrid:
    """Evaluate one path on a grid.

    Returns per-class defaulted fractions (empty classes stay 0) and
    the per-firm loss sum_i exposure_i * y_i(t) / n.

    Raises
    ------
    GridOutOfRange
        If the grid leaves [0, horizon].
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size and (t_grid[0] < 0.0 or t_grid[-1] > log.horizon):
        raise GridOutOfRange(
            f"grid must stay within [0, {log.horizon}]"
        )
    if np.any(np.diff(t_grid) < 0):
        raise ValueError("t_grid must be sorted ascending")

    portfolio = log.portfolio
    env = portfolio.environment
    event_cls = portfolio.class_of[log.firms]
    counts = portfolio.class_counts

    class_fraction = np.zeros((t_grid.size, env.k))
    for k in range(env.k):
        if counts[k] == 0:
            continue
        k_times = log.times[event_cls == k]
        hits = np.searchsorted(k_times, t_grid, side="right")
        class_fraction[:, k] = hits / counts[k]

    cum_loss = np.concatenate([[0.0], np.cumsum(env.exposure[event_cls])])
    idx = np.searchsorted(log.times, t_grid, side="right")
    loss_fraction = cum_loss[idx] / portfolio.n
    return PathGrid(
        t_grid=t_grid, class_fraction=class_fraction, loss_fraction=loss_fraction
    )


def _chunk_stats(args) -> tuple:
    """Accumulate one fixed block of replicas, in replica order."""
    portfolio, horizon, t_grid, thresholds, seed, lo, hi = args
    g = len(t_grid)
    sum_loss = np.zeros(g)
    sum_sq = np.zeros(g)
    sum_frac = np.zeros((g, portfolio.environment.k))
    exceed = np.zeros((len(thresholds), g), dtype=np.int64)
    for r in range(lo, hi):
        path = loss_process(
            simulate_path(portfolio, horizon, stream(seed, REPLICA_NS, r)), t_grid
        )
        sum_loss += path.loss_fraction
        sum_sq += path.loss_fraction * path.loss_fraction
        sum_frac += path.class_fraction
        for xi, x in enumerate(thresholds):
            exceed[xi] += path.loss_fraction >= x
    return sum_loss, sum_sq, sum_frac, exceed


def _resolve_workers(workers) -> int:
    if workers is None:
        workers = int(os.environ.get("CONTAGION_THREADS", "1"))
    if workers < 1:
        raise ValueError("worker count must be >= 1")
    return workers


def monte_carlo(
    portfolio: Portfolio,
    horizon: float,
    t_grid,
    replicas: int,
    thresholds=(),
    seed: int = 0,
    workers: int | None = None,
) -> EnsembleStats:
    """Simulate `replicas` independent paths and summarize them.

    Replica r draws from the dedicated stream (seed, r), and replicas
    are reduced in fixed blocks in index order, so the result is
    bit-identical for every worker count. `workers` defaults to the
    CONTAGION_THREADS environment variable (else 1), which caps the
    number of worker processes without affecting results.

    With a single replica the variance columns are reported as zero.
    """
    if replicas < 1:
        raise ValueError("replicas must be >= 1")
    t_grid = np.asarray(t_grid, dtype=float)
    thresholds = tuple(thresholds)
    workers = _resolve_workers(workers)

    tasks = [
        (portfolio, horizon, t_grid, thresholds, seed, lo, min(lo + _CHUNK, replicas))
        for lo in range(0, replicas, _CHUNK)
    ]
    if workers == 1 or len(tasks) == 1:
        results = map(_chunk_stats, tasks)
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
            results = list(pool.map(_chunk_stats, tasks))

    g = t_grid.size
    sum_loss = np.zeros(g)
    sum_sq = np.zeros(g)
    sum_frac = np.zeros((g, portfolio.environment.k))
    exceed = np.zeros((len(thresholds), g), dtype=np.int64)
    for part_loss, part_sq, part_frac, part_exceed in results:
        sum_loss += part_loss
        sum_sq += part_sq
        sum_frac += part_frac
        exceed += part_exceed

    mean_loss = sum_loss / replicas
    spread = np.maximum(sum_sq - sum_loss * sum_loss / replicas, 0.0)
    var_scaled = portfolio.n * spread / max(replicas - 1, 1)
    excess = {
        x: exceed[xi] / replicas for xi, x in enumerate(thresholds)
    }
    for arr in (mean_loss, var_scaled):
        arr.flags.writeable = False
    return EnsembleStats(
        t_grid=t_grid,
        mean_loss_fraction=mean_loss,
        var_scaled_loss=var_scaled,
        mean_class_fractions=sum_frac / replicas,
        excess_prob=excess,
        replicas=replicas,
        seed=seed,
    )
