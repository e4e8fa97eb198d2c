"""Quantum-jump Monte Carlo for the single-excitation cascade.

Only one excitation exists, so a trajectory has at most one jump.  Its time is
drawn by inverting the no-jump norm, ``<psi(T)|psi(T)> = u``, and the channel is
chosen in proportion to the jump rates at that time.  All trajectories share one
dense no-jump solution, so an ensemble is a vectorized bisection.

Per-trajectory randomness comes from a counter-based splitmix64 stream keyed by
``(base_seed, index)``: results do not depend on how the ensemble is chunked or
scheduled across threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .model import CascadeParams, build_jump_operators
from .ode import DenseSolution, IntegratorConfig, dense_solution

DEFAULT_HORIZON = 20.0
DEFAULT_BINS = 200
MAX_BISECTION = 200
THREADS_ENV = "CASCADE_SIM_THREADS"
_CHUNK = 16384

_MASK = np.uint64(0xFFFFFFFFFFFFFFFF)
_GOLDEN = np.uint64(0x9E3779B97F4A7C15)


def _splitmix64(x):
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = x + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))


def trajectory_seed(base_seed: int, index):
    """Seed of trajectory ``index``: a keyed hash of the counter."""
    key = _splitmix64(np.uint64(base_seed & 0xFFFFFFFFFFFFFFFF))
    with np.errstate(over="ignore"):
        return _splitmix64(key ^ _splitmix64(np.asarray(index, dtype=np.uint64)))


def _uniforms(seeds):
    """Two open-interval uniforms per seed (jump time, channel choice)."""
    seeds = np.asarray(seeds, dtype=np.uint64)
    with np.errstate(over="ignore"):
        r1 = _splitmix64(seeds)
        r2 = _splitmix64(seeds ^ _GOLDEN)
    scale = 2.0 ** -53
    u1 = ((r1 >> np.uint64(11)).astype(np.float64) + 0.5) * scale
    u2 = ((r2 >> np.uint64(11)).astype(np.float64) + 0.5) * scale
    return u1, u2


@dataclass(frozen=True)
class TrajectoryRecord:
    jump_time: float | None
    channel: int | None
    seed: int

    def __post_init__(self):
        if (self.jump_time is None) != (self.channel is None):
            raise ValueError("channel must be present exactly when a jump occurred")


@dataclass
class EnsembleSummary:
    """Aggregated ensemble.

    ``channel_counts[0]`` counts trajectories without a jump inside the horizon,
    ``channel_counts[i]`` jumps through channel i (1..5).  ``population_series``
    has shape (len(t_grid), 5) in basis order (a, b, c, d, e).
    """

    n_traj: int
    horizon: float
    channel_counts: np.ndarray
    bin_edges: np.ndarray
    click_histogram: np.ndarray
    t_grid: np.ndarray
    population_series: np.ndarray
    survivors: np.ndarray = field(repr=False)
    jump_times: np.ndarray = field(repr=False)
    channels: np.ndarray = field(repr=False)

    @property
    def p_rad_estimate(self) -> float:
        return self.channel_counts[1] / self.n_traj

    @property
    def p_rad_stderr(self) -> float:
        f = self.p_rad_estimate
        return float(np.sqrt(f * (1 - f) / self.n_traj))

    def population_stderr(self) -> np.ndarray:
        """Standard error of each population entry across trajectories."""
        p_surv = self.survivors / self.n_traj
        spread = np.sqrt(p_surv * (1 - p_surv) / self.n_traj)
        weights = np.zeros_like(self.population_series)
        mask = p_surv > 0
        weights[mask, :4] = self.population_series[mask, :4] / p_surv[mask, None]
        weights[:, 4] = 1.0
        return weights * spread[:, None]


class Sampler:
    """Jump-time and channel sampler built on one dense no-jump solution."""

    def __init__(self, p: CascadeParams, horizon: float = DEFAULT_HORIZON,
                 cfg: IntegratorConfig = IntegratorConfig()):
        if not horizon > 0:
            raise ValueError("horizon must be positive")
        self.params = p
        self.horizon = float(horizon)
        self.dense: DenseSolution = dense_solution(p, self.horizon, cfg)
        jumps = np.array(build_jump_operators(p))
        # only the (e, k) row of each J_i is non-zero; J_i psi = row_i . psi
        self._rows = jumps[:, 4, :4]

    def norm(self, t):
        return np.sum(np.abs(self.dense(t)) ** 2, axis=-1)

    def jump_rates(self, t) -> np.ndarray:
        """<psi|J_i^dag J_i|psi> for i = 1..5, shape (..., 5)."""
        psi = self.dense(t)
        return np.abs(psi @ self._rows.T) ** 2

    def jump_times(self, u: np.ndarray) -> np.ndarray:
        """Solve norm(T) = u by bisection; NaN where no jump occurs before the horizon."""
        u = np.asarray(u, dtype=float)
        out = np.full(u.shape, np.nan)
        jumped = self.norm(self.horizon) <= u
        if not np.any(jumped):
            return out
        target = u[jumped]
        lo = np.zeros(target.shape)
        hi = np.full(target.shape, self.horizon)
        tol = 4 * np.finfo(float).eps * self.horizon
        for _ in range(MAX_BISECTION):
            mid = 0.5 * (lo + hi)
            above = self.norm(mid) > target
            lo = np.where(above, mid, lo)
            hi = np.where(above, hi, mid)
            if np.all(hi - lo <= tol):
                break
        else:
            raise RuntimeError("jump-time bisection did not converge")
        out[jumped] = hi
        return out

    def channels(self, times: np.ndarray, u: np.ndarray) -> np.ndarray:
        """Channel index 1..5 chosen by rate at each jump time, 0 where no jump."""
        times = np.asarray(times, dtype=float)
        out = np.zeros(times.shape, dtype=np.int64)
        jumped = ~np.isnan(times)
        if not np.any(jumped):
            return out
        rates = self.jump_rates(times[jumped])
        cum = np.cumsum(rates, axis=-1)
        pick = (u[jumped] * cum[:, -1])[:, None] >= cum
        out[jumped] = 1 + np.minimum(pick.sum(axis=-1), 4)
        return out

    def sample(self, seeds) -> tuple[np.ndarray, np.ndarray]:
        u_time, u_channel = _uniforms(seeds)
        times = self.jump_times(u_time)
        return times, self.channels(times, u_channel)


def sample_trajectory(p: CascadeParams, horizon: float = DEFAULT_HORIZON, seed: int = 0,
                      cfg: IntegratorConfig = IntegratorConfig(),
                      sampler: Sampler | None = None) -> TrajectoryRecord:
    """One trajectory driven by the 64-bit ``seed``."""
    sampler = sampler or Sampler(p, horizon, cfg)
    times, channels = sampler.sample(np.array([seed], dtype=np.uint64))
    if np.isnan(times[0]):
        return TrajectoryRecord(None, None, int(seed))
    return TrajectoryRecord(float(times[0]), int(channels[0]), int(seed))


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV, "0").strip() or "0"
    n = int(raw)
    if n < 0:
        raise ValueError(f"{THREADS_ENV} must be >= 0")
    return n or (os.cpu_count() or 1)


def run_ensemble(p: CascadeParams, horizon: float = DEFAULT_HORIZON, n_traj: int = 1000,
                 base_seed: int = 0, t_grid=None, bins: int = DEFAULT_BINS,
                 cfg: IntegratorConfig = IntegratorConfig(),
                 workers: int | None = None) -> EnsembleSummary:
    """Sample ``n_traj`` trajectories and aggregate counts, clicks and populations."""
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    if bins < 1:
        raise ValueError("bins must be >= 1")
    sampler = Sampler(p, horizon, cfg)
    if t_grid is None:
        t_grid = np.linspace(0.0, horizon, 201)
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid < 0) or np.any(t_grid > horizon):
        raise ValueError("t_grid must lie within [0, horizon]")

    starts = range(0, n_traj, _CHUNK)

    def work(start):
        idx = np.arange(start, min(start + _CHUNK, n_traj), dtype=np.uint64)
        return sampler.sample(trajectory_seed(base_seed, idx))

    workers = workers or worker_count()
    if workers > 1 and n_traj > _CHUNK:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(work, starts))
    else:
        parts = [work(s) for s in starts]
    times = np.concatenate([t for t, _ in parts])
    channels = np.concatenate([c for _, c in parts])

    counts = np.bincount(channels, minlength=6)
    edges = np.linspace(0.0, horizon, bins + 1)
    hist, _ = np.histogram(times[channels == 1], bins=edges)

    # trajectories still in the no-jump branch at each grid time
    jumped_sorted = np.sort(times[~np.isnan(times)])
    survivors = n_traj - np.searchsorted(jumped_sorted, t_grid, side="left")
    psi = sampler.dense(t_grid)
    weight = np.abs(psi) ** 2
    weight /= weight.sum(axis=-1, keepdims=True)
    frac = survivors / n_traj
    pops = np.empty((t_grid.size, 5))
    pops[:, :4] = frac[:, None] * weight
    pops[:, 4] = 1.0 - frac
    return EnsembleSummary(n_traj, float(horizon), counts, edges, hist, t_grid, pops,
                           survivors, times, channels)
