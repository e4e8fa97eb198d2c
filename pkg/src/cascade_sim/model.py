"""Parameters, states and operators of the cascaded two atom-cavity system.

Everything lives on the one-excitation basis, in the fixed order

    a = |1,0,0,0>   atom A excited
    b = |0,1,0,0>   photon in cavity A
    c = |0,0,1,0>   atom B excited
    d = |0,0,0,1>   photon in cavity B
    e = |0,0,0,0>   excitation lost

Rates are in units of a reference rate (the figures use K = 1), times in the
inverse of that rate, and hbar = 1.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from os import PathLike
from typing import Any, Mapping

import numpy as np

A, B, C, D, E = range(5)
BASIS = ("a", "b", "c", "d", "e")
CHANNELS = (1, 2, 3, 4, 5)

_SUBSYSTEM_KEYS = ("g", "kappa", "kappa_loss", "gamma", "delta")
_CASCADE_KEYS = ("a", "b", "phi")


class ConfigError(ValueError):
    """Invalid parameter document. ``path`` names the offending key."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


@dataclass(frozen=True)
class SubsystemParams:
    """One atom-cavity subsystem.

    g is the atom-cavity coupling, kappa the output-mirror rate, kappa_loss the
    absorption/scattering rate of the mirrors, gamma the spontaneous emission
    rate and delta the atom-cavity detuning.
    """

    g: float = 0.0
    kappa: float = 0.0
    kappa_loss: float = 0.0
    gamma: float = 0.0
    delta: float = 0.0

    def __post_init__(self):
        for name in _SUBSYSTEM_KEYS:
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
            if name != "delta" and value < 0:
                raise ValueError(f"{name} must be non-negative, got {value!r}")
            object.__setattr__(self, name, value)

    @property
    def big_k(self) -> float:
        return big_k(self)


def big_k(p: SubsystemParams) -> float:
    """Total cavity damping K = kappa + kappa_loss."""
    return p.kappa + p.kappa_loss


@dataclass(frozen=True)
class CascadeParams:
    """Source subsystem ``a`` cascaded into target ``b``; ``phi`` is the propagation phase."""

    a: SubsystemParams
    b: SubsystemParams
    phi: float = 0.0

    def __post_init__(self):
        phi = float(self.phi)
        if not math.isfinite(phi):
            raise ValueError(f"phi must be finite, got {phi!r}")
        phi = math.fmod(phi, 2 * math.pi)
        if phi < 0:
            phi += 2 * math.pi
        if phi >= 2 * math.pi:
            phi = 0.0
        object.__setattr__(self, "phi", phi)

    @classmethod
    def equal(cls, sub: SubsystemParams, phi: float = 0.0) -> "CascadeParams":
        return cls(sub, sub, phi)

    def replace(self, **changes) -> "CascadeParams":
        """Copy with top-level fields or ``a_<field>``/``b_<field>`` overrides."""
        a = dict(vars(self.a))
        b = dict(vars(self.b))
        phi = changes.pop("phi", self.phi)
        for key, value in changes.items():
            side, _, field = key.partition("_")
            target = {"a": a, "b": b}.get(side)
            if target is None or field not in target:
                raise TypeError(f"unknown parameter override {key!r}")
            target[field] = value
        return CascadeParams(SubsystemParams(**a), SubsystemParams(**b), phi)

    @property
    def coupling(self) -> float:
        """sqrt(kappa_a * kappa_b), the strength of the cascade link."""
        return math.sqrt(self.a.kappa * self.b.kappa)

    def to_dict(self) -> dict:
        return {"a": dict(vars(self.a)), "b": dict(vars(self.b)), "phi": self.phi}


@dataclass(frozen=True)
class AmplitudeState:
    """Unnormalized no-jump amplitudes of |a>, |b>, |c>, |d> at time(s) ``t``.

    Fields may be scalars or equally shaped arrays.
    """

    t: Any
    alpha: Any
    beta: Any
    gamma_amp: Any
    delta_amp: Any

    @classmethod
    def initial(cls, t: float = 0.0) -> "AmplitudeState":
        return cls(t, 1.0 + 0j, 0j, 0j, 0j)

    @classmethod
    def from_vector(cls, t, psi) -> "AmplitudeState":
        psi = np.asarray(psi)
        return cls(t, psi[..., 0], psi[..., 1], psi[..., 2], psi[..., 3])

    def vector(self) -> np.ndarray:
        """Amplitudes stacked along the last axis, shape (..., 4)."""
        return np.stack(np.broadcast_arrays(
            *(np.asarray(x, dtype=complex) for x in
              (self.alpha, self.beta, self.gamma_amp, self.delta_amp))), axis=-1)

    @property
    def norm_squared(self):
        return np.sum(np.abs(self.vector()) ** 2, axis=-1)

    def populations(self) -> np.ndarray:
        """Occupations of (a, b, c, d, e), shape (..., 5); e takes the lost norm."""
        p = np.abs(self.vector()) ** 2
        lost = 1.0 - p.sum(axis=-1, keepdims=True)
        return np.concatenate([p, lost], axis=-1)


def _ket_bra(i: int, j: int) -> np.ndarray:
    m = np.zeros((5, 5), dtype=complex)
    m[i, j] = 1.0
    return m


def build_hamiltonian(p: CascadeParams) -> np.ndarray:
    """Hermitian Hamiltonian on the one-excitation basis (hbar = 1)."""
    h = np.zeros((5, 5), dtype=complex)
    h[A, B] = h[B, A] = p.a.g
    h[C, D] = h[D, C] = p.b.g
    h[A, A] = p.a.delta
    h[C, C] = p.b.delta
    # i sqrt(ka kb)/2 (e^{-i phi} b a^dag - e^{i phi} b^dag a): |d> -> |b> and back
    h[B, D] = 0.5j * p.coupling * np.exp(-1j * p.phi)
    h[D, B] = np.conj(h[B, D])
    return h


def build_jump_operators(p: CascadeParams) -> list[np.ndarray]:
    """The five collapse operators, in channel order 1..5.

    1: joint cavity output seen by the detector, 2/3: mirror losses of A/B,
    4/5: spontaneous emission of atoms A/B.
    """
    j1 = (math.sqrt(p.a.kappa) * _ket_bra(E, B)
          + math.sqrt(p.b.kappa) * np.exp(-1j * p.phi) * _ket_bra(E, D))
    return [
        j1,
        math.sqrt(p.a.kappa_loss) * _ket_bra(E, B),
        math.sqrt(p.b.kappa_loss) * _ket_bra(E, D),
        math.sqrt(p.a.gamma) * _ket_bra(E, A),
        math.sqrt(p.b.gamma) * _ket_bra(E, C),
    ]


def effective_hamiltonian(p: CascadeParams) -> np.ndarray:
    """Non-Hermitian no-jump generator H - (i/2) sum_i J_i^dag J_i."""
    h = build_hamiltonian(p)
    h[A, A] -= 0.5j * p.a.gamma
    h[B, B] -= 0.5j * big_k(p.a)
    h[C, C] -= 0.5j * p.b.gamma
    h[D, D] -= 0.5j * big_k(p.b)
    h[B, D] = 0.0
    h[D, B] = -1j * p.coupling * np.exp(1j * p.phi)
    return h


def effective_hamiltonian_sum(p: CascadeParams) -> np.ndarray:
    """Same generator assembled directly from the jump-operator sum."""
    h = build_hamiltonian(p)
    for j in build_jump_operators(p):
        h = h - 0.5j * (j.conj().T @ j)
    return h


def params_from_dict(doc: Mapping[str, Any]) -> CascadeParams:
    """Build parameters from a JSON-style mapping, rejecting unknown keys."""
    if not isinstance(doc, Mapping):
        raise ConfigError("", "configuration must be a JSON object")
    for key in doc:
        if key not in _CASCADE_KEYS:
            raise ConfigError(str(key), "unknown key")
    subs = {}
    for side in ("a", "b"):
        if side not in doc:
            raise ConfigError(side, "missing key")
        sub = doc[side]
        if not isinstance(sub, Mapping):
            raise ConfigError(side, "must be an object")
        for key in sub:
            if key not in _SUBSYSTEM_KEYS:
                raise ConfigError(f"{side}.{key}", "unknown key")
        values = {}
        for key in _SUBSYSTEM_KEYS:
            path = f"{side}.{key}"
            if key not in sub:
                raise ConfigError(path, "missing key")
            values[key] = _number(sub[key], path)
        try:
            subs[side] = SubsystemParams(**values)
        except ValueError as exc:
            raise ConfigError(side, str(exc)) from None
    phi = _number(doc.get("phi", 0.0), "phi")
    try:
        return CascadeParams(subs["a"], subs["b"], phi)
    except ValueError as exc:
        raise ConfigError("phi", str(exc)) from None


def _number(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    return float(value)


def load_params(path: str | PathLike) -> CascadeParams:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON: {exc}") from None
    return params_from_dict(doc)
