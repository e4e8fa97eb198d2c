"""Closed-form no-jump amplitudes.

Each subsystem on its own is a damped two-level (atom, cavity) problem with
eigenvalues ``lam_k(+/-) = c_k +/- omega_k / 2`` where
``c_k = -(K_k + gamma_k)/4 - i delta_k / 2``.  The target amplitudes are
convolutions of the source cavity amplitude with the target propagator, so every
term reduces to a divided difference ``(exp(p t) - exp(q t)) / (p - q)`` of two
eigenvalues.  Evaluating those differences directly (instead of products of
``sinh`` with decaying exponentials) keeps every exponent non-positive in real
part, so nothing overflows at large ``t``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .model import AmplitudeState, CascadeParams, SubsystemParams, big_k, effective_hamiltonian

# relative size below which a denominator is treated as degenerate
DEGENERATE_RTOL = 1e-8
# |omega| relative to the rate scale below which the closed forms lose accuracy
# (they divide by omega); a direct matrix exponential is used instead
EXCEPTIONAL_RTOL = 1e-3
# the equal-parameter form divides by omega**3 and needs a wider margin
EQUAL_EXCEPTIONAL_RTOL = 5e-2
_TAYLOR_ORDER = 24


@dataclass(frozen=True)
class OmegaValues:
    omega_a: complex
    omega_b: complex
    upsilon: float
    lambda_: float


def _complex_detuning(p: SubsystemParams) -> complex:
    return p.delta - 0.5j * p.gamma


def omega_squared(p: SubsystemParams) -> complex:
    k = big_k(p)
    dc = _complex_detuning(p)
    return k * k / 4 - 4 * p.g * p.g - 1j * k * dc - dc * dc


def omega(p: SubsystemParams) -> complex:
    """Principal square root of the subsystem's characteristic radicand."""
    return cmath.sqrt(omega_squared(p))


def omega_values(p: CascadeParams) -> OmegaValues:
    upsilon = (big_k(p.a) - big_k(p.b) + p.a.gamma - p.b.gamma) / 4
    return OmegaValues(omega(p.a), omega(p.b), upsilon, (p.a.delta - p.b.delta) / 2)


def _centre(p: SubsystemParams) -> complex:
    return -(big_k(p) + p.gamma) / 4 - 0.5j * p.delta


def _expm1(z):
    """Complex expm1 without cancellation in the real part."""
    z = np.asarray(z, dtype=complex)
    x, y = z.real, z.imag
    re = np.expm1(x) * np.cos(y) - 2 * np.sin(y / 2) ** 2
    im = np.exp(x) * np.sin(y)
    return re + 1j * im


def _exp_diff(p: complex, q: complex, t, scale: float):
    """(exp(p t) - exp(q t)) / (p - q), continuous as p -> q.

    The exponential with the larger real part is factored out so the remaining
    ``expm1`` argument never has positive real part.
    """
    t = np.asarray(t, dtype=float)
    if q.real > p.real:
        p, q = q, p
    y = q - p
    lead = np.exp(p * t)
    if abs(y) < DEGENERATE_RTOL * scale:
        yt = y * t
        return lead * t * (1 + yt / 2 + yt * yt / 6)
    # (e^{pt} - e^{qt})/(p - q) = e^{pt} expm1(y t) / y
    return lead * _expm1(y * t) / y


def _scale(*omegas: complex) -> float:
    return max([1.0] + [abs(w) for w in omegas])


def _rate_scale(p: SubsystemParams) -> float:
    return max(1.0, big_k(p) + p.gamma, 4 * p.g, 2 * abs(p.delta))


def _near_exceptional(sub: SubsystemParams, w: complex, rtol: float = EXCEPTIONAL_RTOL) -> bool:
    return abs(w) < rtol * _rate_scale(sub)


def _propagate(p: CascadeParams, t):
    """exp(-i H_eff t) applied to |a>, by scaling and squaring; shape (..., 4)."""
    m = -1j * effective_hamiltonian(p)[:4, :4]
    t = np.asarray(t, dtype=float)
    flat = t.reshape(-1)
    norm = np.abs(m).sum(axis=0).max() * flat
    squarings = np.maximum(0, np.ceil(np.log2(np.maximum(norm, 1e-300) / 0.5))).astype(int)
    scaled = m[None] * (flat / 2.0 ** squarings)[:, None, None]
    term = np.broadcast_to(np.eye(4, dtype=complex), scaled.shape).copy()
    total = term.copy()
    for k in range(1, _TAYLOR_ORDER + 1):
        term = term @ scaled / k
        total += term
    for s in range(squarings.max(initial=0)):
        more = squarings > s
        total[more] = total[more] @ total[more]
    return total[:, :, 0].reshape(t.shape + (4,))


def _source_amplitudes(p: SubsystemParams, w: complex, t):
    """alpha(t), beta(t) for the source with the given branch of omega."""
    c = _centre(p)
    lp, lm = c + w / 2, c - w / 2
    t = np.asarray(t, dtype=float)
    # sinh(w t/2)/w * e^{ct} = exp_diff(lp, lm)/2 ; cosh(w t/2) e^{ct}
    sinh_over_w = 0.5 * _exp_diff(lp, lm, t, _scale(w))
    cosh_e = 0.5 * (np.exp(lp * t) + np.exp(lm * t))
    k = big_k(p)
    alpha = (k / 2 - 1j * _complex_detuning(p)) * sinh_over_w + cosh_e
    beta = -2j * p.g * sinh_over_w
    return alpha, beta


def amplitudes_general(p: CascadeParams, t, omegas: tuple[complex, complex] | None = None) -> AmplitudeState:
    """No-jump amplitudes for arbitrary subsystem parameters.

    ``t`` may be a scalar or an array.  ``omegas`` overrides the square-root
    branches (used to check that the result does not depend on them).
    """
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    wa, wb = omegas if omegas is not None else (omega(p.a), omega(p.b))
    alpha, beta = _source_amplitudes(p.a, wa, t_arr)
    zero = np.zeros_like(alpha)
    if p.coupling == 0.0 or p.a.g == 0.0:
        return _state(t, alpha, beta, zero, zero.copy())

    if _near_exceptional(p.a, wa) or _near_exceptional(p.b, wb):
        psi = _propagate(p, t_arr)
        return _state(t, *np.moveaxis(psi, -1, 0))

    scale = _scale(wa, wb)
    ca, cb = _centre(p.a), _centre(p.b)
    ap, am = ca + wa / 2, ca - wa / 2
    bp, bm = cb + wb / 2, cb - wb / 2
    pref = p.a.g * p.coupling * np.exp(1j * p.phi) / (wa * wb)
    # f+ (g- + h+) and f- (g+ + h-) as divided differences of eigen-exponentials
    plus = pref * (_exp_diff(ap, bp, t_arr, scale) - _exp_diff(am, bp, t_arr, scale))
    minus = pref * (_exp_diff(ap, bm, t_arr, scale) - _exp_diff(am, bm, t_arr, scale))
    gamma_amp = p.b.g * (plus - minus)
    q = (big_k(p.b) - p.b.gamma) / 4 - 0.5j * p.b.delta
    delta_amp = 1j * (q + wb / 2) * minus - 1j * (q - wb / 2) * plus
    return _state(t, alpha, beta, gamma_amp, delta_amp)


def amplitudes_equal(p: SubsystemParams, phi: float, t) -> AmplitudeState:
    """No-jump amplitudes when both subsystems share the parameters ``p``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0):
        raise ValueError("t must be non-negative")
    w = omega(p)
    if _near_exceptional(p, w, EQUAL_EXCEPTIONAL_RTOL):
        return amplitudes_general(CascadeParams.equal(p, phi), t)
    alpha, beta = _source_amplitudes(p, w, t_arr)
    c = _centre(p)
    ep, em = np.exp((c + w / 2) * t_arr), np.exp((c - w / 2) * t_arr)
    # Omega t cosh(Omega t/2) e^{ct} and 2 sinh(Omega t/2) e^{ct}
    wt_cosh = 0.5 * w * t_arr * (ep + em)
    two_sinh = ep - em
    k, kappa, g = big_k(p), p.kappa, p.g
    phase = np.exp(1j * phi)
    gamma_amp = 2 * kappa * g * g * phase / w**3 * (wt_cosh - two_sinh)
    delta_amp = 1j * kappa * g * phase / w**3 * (
        ((k - p.gamma) / 2 - 1j * p.delta) * (two_sinh - wt_cosh)
        + w * w * t_arr * 0.5 * two_sinh)
    return _state(t, alpha, beta, gamma_amp, delta_amp)


def amplitudes(p: CascadeParams, t) -> AmplitudeState:
    """General closed form; kept as the default entry point for observables."""
    return amplitudes_general(p, t)


def _state(t, *amps) -> AmplitudeState:
    if np.ndim(t) == 0:
        amps = tuple(complex(x) for x in amps)
    return AmplitudeState(t, *amps)


def norm_squared(p: CascadeParams, t):
    return amplitudes(p, t).norm_squared


def decay_time(p: CascadeParams, threshold: float = 1e-10, t_max: float = 1e6) -> float:
    """Time at which the no-jump norm first drops below ``threshold`` (to 0.1% relative)."""
    rates = []
    for sub in (p.a, p.b):
        c, w = _centre(sub), omega(sub)
        rates += [-(c + w / 2).real, -(c - w / 2).real]
    t = 1.0
    while t <= t_max:
        if norm_squared(p, t) < threshold:
            return _refine_decay(p, threshold, t / 2, t)
        t *= 2
    raise ValueError(
        f"no-jump norm stays above {threshold:g} up to t={t_max:g} "
        f"(slowest eigen-decay rate {min(rates):.3g}); the system is not dissipative")


def _refine_decay(p, threshold, lo, hi):
    # norm is non-increasing, but may plateau; a coarse bisection is enough
    for _ in range(40):
        mid = 0.5 * (lo + hi)
        if norm_squared(p, mid) < threshold:
            hi = mid
        else:
            lo = mid
        if hi - lo < 1e-3 * hi:
            break
    return hi


__all__ = [
    "OmegaValues", "omega", "omega_squared", "omega_values",
    "amplitudes_general", "amplitudes_equal", "amplitudes", "norm_squared", "decay_time",
]
