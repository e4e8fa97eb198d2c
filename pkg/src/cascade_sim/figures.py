"""Curve data for the interference-term and mode-envelope figures."""
from __future__ import annotations

import numpy as np

from . import analytic
from .model import CascadeParams, SubsystemParams
from .observables import interference_term, mode_envelope

# g/K = 5, kappa/K = 0.9, Delta/K = 0.1, Gamma/K = 0.2 with K = 1
FIGURE_SUBSYSTEM = SubsystemParams(g=5.0, kappa=0.9, kappa_loss=0.1, gamma=0.2, delta=0.1)
FIGURE_PARAMS = CascadeParams.equal(FIGURE_SUBSYSTEM, phi=0.0)

FIG2_VARIANTS = ("full", "no_atom_b")
FIG3_VARIANTS = ("full", "no_atom_b", "no_cavity_b")


def variant_params(p: CascadeParams, variant: str) -> CascadeParams:
    if variant == "full":
        return p
    if variant == "no_atom_b":
        return p.replace(b_g=0.0)
    if variant == "no_cavity_b":
        return p.replace(b_kappa=0.0, b_kappa_loss=0.0)
    raise ValueError(f"unknown variant {variant!r}")


def fig2_curves(t_grid, p: CascadeParams = FIGURE_PARAMS) -> dict[str, np.ndarray]:
    """Interference term 2 Re[beta* delta e^{-i phi}] per variant."""
    out = {}
    for name in FIG2_VARIANTS:
        q = variant_params(p, name)
        out[name] = interference_term(analytic.amplitudes(q, t_grid), q.phi)
    return out


def fig3_curves(t_grid, p: CascadeParams = FIGURE_PARAMS) -> dict[str, np.ndarray]:
    """Mode amplitude zeta(t) sqrt(p_rad(inf) / kappa) per variant, kappa = kappa_a."""
    out = {}
    for name in FIG3_VARIANTS:
        mode = mode_envelope(variant_params(p, name), t_grid)
        out[name] = np.sqrt(mode.zeta_sq * mode.p_rad_inf / p.a.kappa)
    return out


FIGURES = {"fig2": fig2_curves, "fig3": fig3_curves}
