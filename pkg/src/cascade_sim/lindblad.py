"""Density-matrix evolution of the full master equation on the 5-state basis."""
from __future__ import annotations

import numpy as np

from .model import CascadeParams, E, build_hamiltonian, build_jump_operators
from .ode import IntegratorConfig, solve


def _operators(p: CascadeParams):
    h = build_hamiltonian(p)
    jumps = np.array(build_jump_operators(p))
    jd = jumps.conj().transpose(0, 2, 1)
    jdj = (jd @ jumps).sum(axis=0)
    return h, jumps, jd, jdj


def lindblad_rhs(p: CascadeParams, rho: np.ndarray) -> np.ndarray:
    """-i[H, rho] + sum_i (J_i rho J_i^dag - {J_i^dag J_i, rho}/2)."""
    return _rhs_from(*_operators(p))(np.asarray(rho, dtype=complex))


def _rhs_from(h, jumps, jd, jdj):
    def rhs(rho):
        out = -1j * (h @ rho - rho @ h)
        out += (jumps @ rho @ jd).sum(axis=0)
        out -= 0.5 * (jdj @ rho + rho @ jdj)
        return out
    return rhs


def pure_state(index: int) -> np.ndarray:
    rho = np.zeros((5, 5), dtype=complex)
    rho[index, index] = 1.0
    return rho


def _hermitize(v: np.ndarray) -> np.ndarray:
    rho = v[:25].reshape(5, 5)
    sym = 0.5 * (rho + rho.conj().T)
    out = v.copy()
    out[:25] = sym.reshape(-1)
    return out


def evolve_master(p: CascadeParams, t_grid, rho0: np.ndarray | None = None,
                  cfg: IntegratorConfig = IntegratorConfig()) -> np.ndarray:
    """Density matrices at ``t_grid``, shape (len(t_grid), 5, 5).

    Starts from ``|a><a|`` unless ``rho0`` is given, at ``t_grid[0]``.
    """
    rho, _ = _evolve(p, t_grid, rho0, cfg, with_yields=False)
    return rho


def channel_yields(p: CascadeParams, t_grid, rho0: np.ndarray | None = None,
                   cfg: IntegratorConfig = IntegratorConfig()) -> tuple[np.ndarray, np.ndarray]:
    """Density matrices and cumulative jump probability per channel.

    The second array has shape (len(t_grid), 5): column i is the integral of
    Tr[J_{i+1} rho J_{i+1}^dag] from ``t_grid[0]``.
    """
    return _evolve(p, t_grid, rho0, cfg, with_yields=True)


def _evolve(p, t_grid, rho0, cfg, with_yields):
    rho0 = pure_state(0) if rho0 is None else np.asarray(rho0, dtype=complex)
    if rho0.shape != (5, 5):
        raise ValueError("rho0 must be 5x5")
    h, jumps, jd, jdj = _operators(p)
    rhs_rho = _rhs_from(h, jumps, jd, jdj)

    def rhs(t, v):
        rho = v[:25].reshape(5, 5)
        drho = rhs_rho(rho).reshape(-1)
        if not with_yields:
            return drho
        # jump rates Tr[J rho J^dag]: the |e><e| entry of each J rho J^dag
        rates = (jumps @ rho @ jd)[:, E, E]
        return np.concatenate([drho, rates])

    n_extra = 5 if with_yields else 0
    y0 = np.concatenate([rho0.reshape(-1), np.zeros(n_extra, dtype=complex)])
    values, _ = solve(rhs, y0, t_grid, cfg, post_step=_hermitize)
    rho = values[:, :25].reshape(-1, 5, 5)
    yields = values[:, 25:].real if with_yields else None
    return rho, yields
