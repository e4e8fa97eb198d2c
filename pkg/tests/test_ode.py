import numpy as np
import pytest

from cascade_sim import analytic
from cascade_sim.model import AmplitudeState, CascadeParams, SubsystemParams, build_jump_operators
from cascade_sim.ode import (IntegrationError, amplitude_rhs, IntegratorConfig, dense_solution, integrate,
                             integrate_array, norm_squared_at, solve)

NORM_T2 = 0.5440860877586782  # matrix-exponential oracle, figure parameters


def test_zero_rhs_keeps_initial_state():
    p = CascadeParams(SubsystemParams(), SubsystemParams())
    out = integrate(p, [0.0, 1.0, 5.0])
    for s in out:
        np.testing.assert_array_equal(s.vector(), [1, 0, 0, 0])


def test_scalar_decay():
    p = CascadeParams(SubsystemParams(gamma=1.0), SubsystemParams())
    t = np.linspace(0, 10, 21)
    v = integrate_array(p, t)
    np.testing.assert_allclose(v[:, 0], np.exp(-t / 2), rtol=1e-9, atol=1e-14)
    assert not v[:, 1:].any()


def test_figure_series_matches_closed_form(fig2):
    t = np.linspace(0, 10, 2000)
    v = integrate_array(fig2, t)
    assert np.abs(v - analytic.amplitudes_general(fig2, t).vector()).max() < 1e-8


def test_integrate_returns_states(fig2):
    states = integrate(fig2, [0.5, 1.0])
    assert [s.t for s in states] == [0.5, 1.0]
    assert isinstance(states[0], AmplitudeState)


def test_norm_at_from_dense(fig2):
    dense = dense_solution(fig2, 10.0)
    assert norm_squared_at(dense, 0.0) == pytest.approx(1.0, abs=1e-15)
    assert norm_squared_at(dense, 2.0) == pytest.approx(NORM_T2, abs=1e-8)
    with pytest.raises(ValueError):
        norm_squared_at(dense, 10.5)


def test_norm_unitary_limit():
    p = CascadeParams(SubsystemParams(g=2.0, delta=0.5), SubsystemParams(g=1.0))
    dense = dense_solution(p, 10.0)
    np.testing.assert_allclose(norm_squared_at(dense, np.linspace(0, 10, 101)), 1.0, atol=1e-9)


def test_norm_derivative_equals_jump_rates(fig2):
    t = np.array([0.3, 1.1, 2.7, 6.0])
    psi = integrate_array(fig2, t)
    rhs = amplitude_rhs(fig2)
    jumps = build_jump_operators(fig2)
    for row in psi:
        slope = 2 * np.real(np.vdot(row, rhs(0.0, row)))
        full = np.append(row, 0)
        rate = sum(np.linalg.norm(j @ full) ** 2 for j in jumps)
        assert slope == pytest.approx(-rate, abs=1e-8)
        assert slope <= 1e-8


def test_grid_independence(fig2):
    t = np.linspace(0, 10, 11)
    cfg = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.02)
    fine = IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_step=0.01)
    diff = integrate_array(fig2, t, cfg=cfg) - integrate_array(fig2, t, cfg=fine)
    assert np.abs(diff).max() < 10 * cfg.rel_tol


def test_linearity(fig2):
    t = np.linspace(0, 5, 6)
    c = 0.3 - 0.4j
    start = AmplitudeState(0.0, 0.6, 0.2j, -0.1, 0.3)
    scaled = AmplitudeState(0.0, *(c * x for x in (0.6, 0.2j, -0.1, 0.3)))
    np.testing.assert_allclose(integrate_array(fig2, t, scaled), c * integrate_array(fig2, t, start),
                               atol=1e-10)


@pytest.mark.parametrize("kwargs", [dict(rel_tol=0), dict(rel_tol=1e-2), dict(abs_tol=1e-5),
                                    dict(max_step=0)])
def test_config_validation(kwargs):
    with pytest.raises(ValueError):
        IntegratorConfig(**kwargs)


def test_step_underflow_reports_time():
    # finite-time blow-up y' = y^2 from y(0) = 1 at t = 1
    with pytest.raises(IntegrationError) as info:
        solve(lambda t, y: y * y, np.array([1.0 + 0j]), [0.0, 2.0])
    assert 0.9 < info.value.t <= 1.0


def test_descending_grid_rejected(fig2):
    with pytest.raises(ValueError):
        solve(lambda t, y: y, np.array([1.0 + 0j]), [1.0, 0.0])
