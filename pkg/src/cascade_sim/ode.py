"""Adaptive Dormand-Prince 5(4) integration of the no-jump amplitude equations."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .model import AmplitudeState, CascadeParams, effective_hamiltonian


class IntegrationError(RuntimeError):
    """Step size collapsed before the requested end time."""

    def __init__(self, t: float, message: str = ""):
        super().__init__(message or f"step size underflow at t={t!r}")
        self.t = t


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = np.inf
    dense_output: bool = False

    def __post_init__(self):
        if not 0 < self.rel_tol <= 1e-3:
            raise ValueError(f"rel_tol must be in (0, 1e-3], got {self.rel_tol!r}")
        if not 0 < self.abs_tol <= 1e-6:
            raise ValueError(f"abs_tol must be in (0, 1e-6], got {self.abs_tol!r}")
        if not self.max_step > 0:
            raise ValueError(f"max_step must be positive, got {self.max_step!r}")


# Dormand-Prince tableau
_C = np.array([0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1, 1])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_E = _B - np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640,
                    -92097 / 339200, 187 / 2100, 1 / 40])


class DenseSolution:
    """Piecewise cubic Hermite interpolant over the accepted steps."""

    def __init__(self, ts, ys, fs):
        self.ts = np.asarray(ts, dtype=float)
        self.ys = np.asarray(ys)
        self.fs = np.asarray(fs)

    @property
    def t_min(self) -> float:
        return float(self.ts[0])

    @property
    def t_max(self) -> float:
        return float(self.ts[-1])

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if np.any(t < self.ts[0]) or np.any(t > self.ts[-1]):
            raise ValueError(f"time outside integrated span [{self.ts[0]}, {self.ts[-1]}]")
        flat = t.reshape(-1)
        i = np.clip(np.searchsorted(self.ts, flat, side="right") - 1, 0, len(self.ts) - 2)
        t0, t1 = self.ts[i], self.ts[i + 1]
        h = t1 - t0
        s = ((flat - t0) / h)[:, None]
        h = h[:, None]
        s2, s3 = s * s, s * s * s
        h00 = 2 * s3 - 3 * s2 + 1
        h10 = s3 - 2 * s2 + s
        h01 = -2 * s3 + 3 * s2
        h11 = s3 - s2
        y = (h00 * self.ys[i] + h10 * h * self.fs[i]
             + h01 * self.ys[i + 1] + h11 * h * self.fs[i + 1])
        return y.reshape(t.shape + self.ys.shape[1:])


def solve(rhs: Callable[[float, np.ndarray], np.ndarray], y0, t_grid: Sequence[float],
          cfg: IntegratorConfig = IntegratorConfig(),
          post_step: Callable[[np.ndarray], np.ndarray] | None = None):
    """Integrate ``y' = rhs(t, y)`` and return values at ``t_grid``.

    Steps are shortened to land exactly on every grid time, so grid values carry
    the full integrator accuracy.  ``post_step`` may project each accepted state.
    Returns ``(values, dense)`` where ``dense`` is ``None`` unless requested.
    """
    grid = np.asarray(t_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("t_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) < 0):
        raise ValueError("t_grid must be ascending")
    y = np.array(y0, dtype=complex)
    t = float(grid[0])
    out = np.empty((grid.size,) + y.shape, dtype=complex)
    f = rhs(t, y)
    dense_t, dense_y, dense_f = [t], [y.copy()], [f.copy()]

    span = grid[-1] - t
    h = _initial_step(rhs, t, y, f, cfg, span)
    k = np.empty((7,) + y.shape, dtype=complex)
    gi = 0
    while gi < grid.size and grid[gi] <= t:
        out[gi] = y
        gi += 1

    while gi < grid.size:
        target = grid[gi]
        h_try = min(h, cfg.max_step)
        h = min(h_try, target - t)
        clipped = h < h_try
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(t)
        k[0] = f
        for s in range(1, 7):
            ys = y + h * np.tensordot(_A[s], k[:s], axes=1)
            k[s] = rhs(t + _C[s] * h, ys)
        y_new = y + h * np.tensordot(_B[:6], k[:6], axes=1)
        err_vec = h * np.tensordot(_E, k, axes=1)
        scale = cfg.abs_tol + cfg.rel_tol * np.maximum(np.abs(y), np.abs(y_new))
        err = np.sqrt(np.mean(np.abs(err_vec / scale) ** 2)) if y.size else 0.0
        if err <= 1.0:
            t_new = target if target - (t + h) <= 1e-14 * max(1.0, abs(target)) else t + h
            if post_step is not None:
                y_new = post_step(y_new)
            y = y_new
            t = t_new
            # FSAL: last stage is the derivative at the new point, unless projected
            f = k[6].copy() if post_step is None else rhs(t, y)
            if cfg.dense_output:
                dense_t.append(t)
                dense_y.append(y.copy())
                dense_f.append(f.copy())
            while gi < grid.size and grid[gi] <= t:
                out[gi] = y
                gi += 1
            factor = 5.0 if err == 0 else min(5.0, 0.9 * err ** -0.2)
            h = max(h * factor, h_try) if clipped else h * factor
        else:
            h *= max(0.2, 0.9 * err ** -0.2)

    dense = DenseSolution(dense_t, dense_y, dense_f) if cfg.dense_output else None
    return out, dense


def _initial_step(rhs, t, y, f, cfg, span):
    if span <= 0:
        return 1.0
    scale = cfg.abs_tol + cfg.rel_tol * np.abs(y)
    d0 = np.sqrt(np.mean(np.abs(y / scale) ** 2))
    d1 = np.sqrt(np.mean(np.abs(f / scale) ** 2))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    f1 = rhs(t + h0, y + h0 * f)
    d2 = np.sqrt(np.mean(np.abs((f1 - f) / scale) ** 2)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, span)


def amplitude_rhs(p: CascadeParams):
    """Right-hand side psi' = -i H_eff psi restricted to (a, b, c, d)."""
    gen = -1j * effective_hamiltonian(p)[:4, :4]
    return lambda t, psi: gen @ psi


def integrate(p: CascadeParams, t_grid, init: AmplitudeState | None = None,
              cfg: IntegratorConfig = IntegratorConfig()) -> list[AmplitudeState]:
    """Amplitudes at each time of ``t_grid`` starting from ``init``."""
    init = AmplitudeState.initial() if init is None else init
    grid = np.asarray(t_grid, dtype=float)
    if grid.size and grid[0] < init.t:
        raise ValueError("t_grid starts before the initial state time")
    full = np.concatenate([[float(init.t)], grid])
    values, _ = solve(amplitude_rhs(p), init.vector(), full, cfg)
    return [AmplitudeState.from_vector(t, v) for t, v in zip(grid, values[1:])]


def integrate_array(p: CascadeParams, t_grid, init: AmplitudeState | None = None,
                    cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Like :func:`integrate` but returns an array of shape (len(t_grid), 4)."""
    init = AmplitudeState.initial() if init is None else init
    full = np.concatenate([[float(init.t)], np.asarray(t_grid, dtype=float)])
    values, _ = solve(amplitude_rhs(p), init.vector(), full, cfg)
    return values[1:]


def dense_solution(p: CascadeParams, horizon: float,
                   cfg: IntegratorConfig = IntegratorConfig(), t0: float = 0.0,
                   init: AmplitudeState | None = None) -> DenseSolution:
    """Dense amplitude solution on ``[t0, horizon]``."""
    cfg = IntegratorConfig(cfg.rel_tol, cfg.abs_tol, cfg.max_step, True)
    init = AmplitudeState.initial(t0) if init is None else init
    _, dense = solve(amplitude_rhs(p), init.vector(), [t0, horizon], cfg)
    return dense


def norm_squared_at(dense: DenseSolution, t):
    """No-jump norm <psi|psi> at ``t`` from a dense solution, clipped to [0, 1]."""
    psi = dense(t)
    return np.clip(np.sum(np.abs(psi) ** 2, axis=-1), 0.0, 1.0)
