"""Derived quantities: cavity-cavity concurrence, emitted-photon mode and detector response."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .model import AmplitudeState, CascadeParams, SubsystemParams, big_k
from .ode import IntegratorConfig

NOISE_FLOOR = 1e-12
TAIL_THRESHOLD = 1e-10

FLAG_OK = "ok"
FLAG_BELOW_FLOOR = "below_floor"
FLAG_REGIME = "regime_violation"

# 20-point Gauss-Legendre nodes on [-1, 1]
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


class DivergenceError(ValueError):
    """The excitation never leaves the system, so infinite-time quantities diverge."""


class UndefinedModeError(ValueError):
    """No photon is ever emitted into the detected channel."""


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class DetectorConfig:
    eta: float = 1.0
    t_bin: float = 0.01

    def __post_init__(self):
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError(f"eta must be in [0, 1], got {self.eta!r}")
        if not self.t_bin > 0:
            raise ValueError(f"t_bin must be positive, got {self.t_bin!r}")


@dataclass(frozen=True)
class ModeFunction:
    t_grid: np.ndarray
    zeta_sq: np.ndarray
    p_rad_inf: float

    @property
    def zeta(self) -> np.ndarray:
        return np.sqrt(self.zeta_sq)

    def integral(self) -> float:
        return float(np.trapezoid(self.zeta_sq, self.t_grid))


@dataclass(frozen=True)
class EmissionTotal:
    """Photon probability in the detected channel, truncated at ``t_cut``.

    ``tail_bound`` is the no-jump norm left at ``t_cut``, an upper bound on
    the probability still to be emitted.
    """

    value: float
    t_cut: float
    tail_bound: float


@dataclass(frozen=True)
class Reconstruction:
    t: np.ndarray
    beta_abs: np.ndarray
    delta_abs: np.ndarray
    concurrence: np.ndarray
    flags: np.ndarray


def concurrence(state: AmplitudeState):
    return 2 * np.abs(state.beta) * np.abs(state.delta_amp)


def concurrence_approx(p: SubsystemParams, t):
    """Strong-coupling envelope kappa t sin^2(g t) exp(-(K + gamma) t / 2)."""
    t = np.asarray(t, dtype=float)
    return p.kappa * t * np.sin(p.g * t) ** 2 * np.exp(-(big_k(p) + p.gamma) * t / 2)


def interference_term(state: AmplitudeState, phi: float):
    """2 Re[beta* delta e^{-i phi}], the cross term of the detected intensity."""
    return 2 * np.real(np.conj(state.beta) * state.delta_amp * np.exp(-1j * phi))


def interference_from_phases(state: AmplitudeState, phi: float):
    """Same quantity written as C cos(phase_delta - phase_beta)."""
    phase_beta = np.angle(state.beta)
    phase_delta = np.angle(state.delta_amp * np.exp(-1j * phi))
    return concurrence(state) * np.cos(phase_delta - phase_beta)


def emission_rate(p: CascadeParams, state: AmplitudeState):
    """<J1^dag J1>: ka|beta|^2 + kb|delta|^2 + 2 sqrt(ka kb) Re[beta* delta e^{-i phi}].

    Evaluated as |sqrt(ka) beta + sqrt(kb) e^{-i phi} delta|^2, which is the same
    expression but never rounds below zero.
    """
    field = (math.sqrt(p.a.kappa) * np.asarray(state.beta)
             + math.sqrt(p.b.kappa) * np.exp(-1j * p.phi) * np.asarray(state.delta_amp))
    return np.abs(field) ** 2


def _rate_at(p: CascadeParams, t):
    return emission_rate(p, analytic.amplitudes(p, t))


def _panel_width(p: CascadeParams) -> float:
    fastest = 0.0
    for sub in (p.a, p.b):
        w = analytic.omega(sub)
        fastest = max(fastest, abs(sub.delta) + abs(w) + big_k(sub) + sub.gamma)
    return min(1.0, 2.0 / (1.0 + fastest))


def _gauss_panels(p: CascadeParams, edges: np.ndarray) -> np.ndarray:
    """Integral of the emission rate over each panel [edges[i], edges[i+1]]."""
    lo, hi = edges[:-1], edges[1:]
    half = 0.5 * (hi - lo)
    nodes = (0.5 * (hi + lo))[:, None] + half[:, None] * _GL_X[None, :]
    vals = _rate_at(p, nodes)
    return half * (vals @ _GL_W)


def _integrate_rate(p: CascadeParams, t0: float, t1: float, tol: float) -> float:
    if t1 <= t0:
        return 0.0
    n = max(1, int(math.ceil((t1 - t0) / _panel_width(p))))
    prev = None
    for _ in range(12):
        edges = np.linspace(t0, t1, n + 1)
        total = math.fsum(_gauss_panels(p, edges))
        if prev is not None and abs(total - prev) <= tol:
            return total
        prev = total
        n *= 2
    return total


def p_rad(p: CascadeParams, t, cfg: IntegratorConfig = IntegratorConfig()):
    """Probability that the photon has left through the detected channel by time ``t``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    tol = max(cfg.abs_tol, 1e-14)
    flat = t_arr.reshape(-1)
    order = np.argsort(flat, kind="stable")
    out = np.empty_like(flat)
    acc, last = 0.0, 0.0
    for idx in order:
        acc += _integrate_rate(p, last, flat[idx], tol)
        last = flat[idx]
        out[idx] = acc
    out = np.clip(out, 0.0, 1.0)
    return float(out[0]) if t_arr.ndim == 0 else out.reshape(t_arr.shape)


def p_rad_total(p: CascadeParams, cfg: IntegratorConfig = IntegratorConfig(),
                threshold: float = TAIL_THRESHOLD) -> EmissionTotal:
    try:
        t_cut = analytic.decay_time(p, threshold)
    except ValueError as exc:
        raise DivergenceError(str(exc)) from None
    tail = float(analytic.norm_squared(p, t_cut))
    return EmissionTotal(float(p_rad(p, t_cut, cfg)), t_cut, tail)


def p_rad_infty(p: CascadeParams, cfg: IntegratorConfig = IntegratorConfig()) -> float:
    return p_rad_total(p, cfg).value


def mode_envelope(p: CascadeParams, t_grid, cfg: IntegratorConfig = IntegratorConfig(),
                  p_rad_inf: float | None = None) -> ModeFunction:
    """Squared amplitude envelope of the emitted photon's mode on ``t_grid``.

    Normalized to unit area over [0, inf); the grid should reach the point where
    the no-jump norm is negligible for the trapezoid integral to be 1.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if p_rad_inf is None:
        p_rad_inf = p_rad_infty(p, cfg)
    if p_rad_inf <= 0:
        raise UndefinedModeError("no probability of emission into the detected channel")
    zeta_sq = _rate_at(p, t_grid) / p_rad_inf
    return ModeFunction(t_grid, zeta_sq, p_rad_inf)


def detection_probability(p: CascadeParams, t, det: DetectorConfig,
                          cfg: IntegratorConfig = IntegratorConfig()):
    """Click probability in a window of width ``det.t_bin`` centred on ``t``."""
    return det.eta * det.t_bin * _rate_at(p, t)


def detection_probability_from_mode(mode: ModeFunction, det: DetectorConfig):
    """eta p_rad(inf) zeta^2(t) T, the same click probability via the mode function."""
    return det.eta * mode.p_rad_inf * mode.zeta_sq * det.t_bin


def single_cavity_detection(p: CascadeParams, t, det: DetectorConfig):
    """Click probability with only cavity A present: eta kappa_a T |beta|^2."""
    beta = analytic.amplitudes(p.replace(b_kappa=0.0, b_kappa_loss=0.0), t).beta
    return det.eta * p.a.kappa * det.t_bin * np.abs(beta) ** 2


def reconstruct_concurrence(pd_two_cavity, pd_single_cavity, det: DetectorConfig, kappa: float,
                            t=None, noise_floor: float = NOISE_FLOOR) -> Reconstruction:
    """Recover the concurrence from the two-cavity and cavity-A-only click series.

    Assumes the strong-coupling relation in which the interference term equals
    minus the concurrence, so that P_D / P_D' = (1 - |delta|/|beta|)^2.  Points
    where P_D' is below ``noise_floor`` are NaN with flag ``below_floor``.  A
    negative root 1 - sqrt(r) is kept in ``delta_abs`` (concurrence clamps to 0)
    and flagged ``regime_violation``.
    """
    pd = np.asarray(pd_two_cavity, dtype=float)
    pd1 = np.asarray(pd_single_cavity, dtype=float)
    if pd.shape != pd1.shape or pd.ndim != 1:
        raise GridMismatchError(f"series shapes differ: {pd.shape} vs {pd1.shape}")
    if t is None:
        t = np.arange(pd.size, dtype=float)
    t = np.asarray(t, dtype=float)
    if t.shape != pd.shape:
        raise GridMismatchError("time grid does not match the series")
    if not kappa > 0:
        raise ValueError("kappa must be positive")

    beta_abs = np.full(pd.shape, np.nan)
    delta_abs = np.full(pd.shape, np.nan)
    conc = np.full(pd.shape, np.nan)
    flags = np.full(pd.shape, FLAG_BELOW_FLOOR, dtype=object)

    ok = pd1 > noise_floor
    b = np.sqrt(pd1[ok] / (det.eta * kappa * det.t_bin))
    x = 1.0 - np.sqrt(np.maximum(pd[ok], 0.0) / pd1[ok])
    beta_abs[ok] = b
    delta_abs[ok] = b * x
    conc[ok] = np.clip(2 * b * b * x, 0.0, 1.0)
    flags[ok] = np.where(x < 0, FLAG_REGIME, FLAG_OK)
    return Reconstruction(t, beta_abs, delta_abs, conc, flags)
