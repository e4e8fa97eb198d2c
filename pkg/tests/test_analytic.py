import cmath

import numpy as np
import pytest

from cascade_sim import analytic
from cascade_sim.model import CascadeParams, SubsystemParams
from cascade_sim.ode import integrate_array
from conftest import random_params
from oracles import FIG2_ARGS, expm_amplitudes

# matrix-exponential oracle values (tests/oracles.py) for the figure parameters
FIG2_GOLDEN = {
    0.5: [-0.6678554060098492 + 0.010977523729405329j, -0.013814760558295176 - 0.5166057897470214j,
          0.2016787391836919 - 0.005169063748287603j, 0.0008847711838479915 + 0.10822084376321503j],
    1.0: [0.17921964291849013 - 0.00038922655780133936j, 0.03627032920852903 + 0.7107824193331155j,
          -0.1574804023275848 + 0.007427994706452499j, -0.014449724332304115 - 0.3136271525538631j],
    2.0: [-0.4717765819416239 + 0.05142111060028655j, 0.027756793879641112 + 0.29402458439484414j,
          0.3883517594065735 - 0.040506863955327765j, -0.03048490664395584 - 0.27975112769206933j],
    5.0: [0.2126322606278896 - 0.05350654440495707j, 0.01049108998348678 + 0.03210276764940581j,
          -0.48459306588942214 + 0.1235734680350568j, -0.013816083082548756 - 0.054083239255936714j],
}


def test_omega_no_coupling_reduces():
    assert analytic.omega(SubsystemParams(kappa=1.0)) == pytest.approx(0.5)


@pytest.mark.parametrize("delta, gamma, k", [(0.3, 0.2, 1.0), (-2.0, 1.5, 0.4), (0.0, 3.0, 0.0)])
def test_omega_perfect_square_without_coupling(delta, gamma, k):
    w = analytic.omega(SubsystemParams(kappa=k, gamma=gamma, delta=delta))
    root = k / 2 - 1j * (delta - 0.5j * gamma)
    assert min(abs(w - root), abs(w + root)) < 1e-12


def test_omega_figure_parameters(fig2_sub):
    # radicand -99.85 - 0.08i evaluated by hand
    assert analytic.omega_squared(fig2_sub) == pytest.approx(-99.85 - 0.08j, abs=1e-12)
    w = analytic.omega(fig2_sub)
    assert w == pytest.approx(cmath.sqrt(-99.85 - 0.08j), abs=1e-14)
    assert w == pytest.approx(0.0040 - 9.9925j, abs=5e-5)


def test_omega_values_invariant():
    rng = np.random.default_rng(3)
    for _ in range(20):
        p = random_params(rng)
        ov = analytic.omega_values(p)
        for sub, w in ((p.a, ov.omega_a), (p.b, ov.omega_b)):
            k = sub.kappa + sub.kappa_loss
            dc = sub.delta - 0.5j * sub.gamma
            radicand = k * k / 4 - 4 * sub.g ** 2 - 1j * k * dc - dc * dc
            assert abs(w * w - radicand) <= 1e-12 * max(1.0, abs(radicand))


def test_initial_conditions():
    rng = np.random.default_rng(4)
    for _ in range(10):
        s = analytic.amplitudes_general(random_params(rng), 0.0)
        np.testing.assert_allclose(s.vector(), [1, 0, 0, 0], atol=1e-15)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 17.0])
def test_decoupled_atom(t):
    p = CascadeParams(SubsystemParams(kappa=0.7, kappa_loss=0.2, gamma=0.6, delta=1.3),
                      SubsystemParams(g=2.0, kappa=0.5, gamma=0.1))
    s = analytic.amplitudes_general(p, t)
    assert s.alpha == pytest.approx(np.exp(-(0.3 + 1.3j) * t), abs=1e-14)
    assert s.beta == s.gamma_amp == s.delta_amp == 0


@pytest.mark.parametrize("t", sorted(FIG2_GOLDEN))
def test_general_against_golden(fig2, t):
    np.testing.assert_allclose(analytic.amplitudes_general(fig2, t).vector(), FIG2_GOLDEN[t], atol=1e-12)
    np.testing.assert_allclose(expm_amplitudes(FIG2_ARGS, t), FIG2_GOLDEN[t], atol=1e-13)


def test_equal_form_initial_and_no_cascade(fig2_sub):
    np.testing.assert_allclose(analytic.amplitudes_equal(fig2_sub, 0.0, 0.0).vector(), [1, 0, 0, 0], atol=1e-15)
    lossy = SubsystemParams(g=3.0, kappa=0.0, kappa_loss=1.0, gamma=0.3, delta=0.2)
    s = analytic.amplitudes_equal(lossy, 0.4, np.linspace(0, 5, 11))
    assert not np.any(s.gamma_amp) and not np.any(s.delta_amp)


def test_equal_form_matches_general(fig2, fig2_sub):
    t = np.linspace(0, 20, 401)
    eq = analytic.amplitudes_equal(fig2_sub, fig2.phi, t).vector()
    gen = analytic.amplitudes_general(fig2, t).vector()
    assert np.abs(eq - gen).max() < 1e-9


def test_equal_parameter_limit(fig2_sub):
    eps = 1e-6
    b = SubsystemParams(*(x * (1 + eps) for x in vars(fig2_sub).values()))
    t = np.linspace(0, 10, 201)
    gen = analytic.amplitudes_general(CascadeParams(fig2_sub, b), t).vector()
    eq = analytic.amplitudes_equal(fig2_sub, 0.0, t).vector()
    assert np.abs(gen - eq).max() < 1e-4


def test_branch_invariance():
    rng = np.random.default_rng(5)
    t = np.linspace(0, 8, 33)
    for _ in range(100):
        p = random_params(rng)
        wa, wb = analytic.omega(p.a), analytic.omega(p.b)
        ref = analytic.amplitudes_general(p, t).vector()
        scale = max(1.0, np.abs(ref).max())
        for flips in ((-wa, wb), (wa, -wb), (-wa, -wb)):
            alt = analytic.amplitudes_general(p, t, omegas=flips).vector()
            assert np.abs(alt - ref).max() <= 1e-10 * scale


def test_norm_non_increasing():
    rng = np.random.default_rng(6)
    t = np.linspace(0, 20, 4001)
    for _ in range(30):
        n = analytic.norm_squared(random_params(rng), t)
        assert n[0] == pytest.approx(1.0)
        assert np.all(np.diff(n) <= 1e-13)


def test_matches_ode_random():
    rng = np.random.default_rng(7)
    t = np.linspace(0, 20, 81)
    for _ in range(25):
        p = random_params(rng)
        diff = integrate_array(p, t) - analytic.amplitudes_general(p, t).vector()
        assert np.abs(diff).max() < 1e-8


def test_phi_covariance(fig2):
    t = np.linspace(0, 10, 51)
    base = analytic.amplitudes_general(fig2, t)
    for phi in (0.7, 2.0, 4.5):
        s = analytic.amplitudes_general(fig2.replace(phi=phi), t)
        rot = np.exp(1j * phi)
        np.testing.assert_allclose(s.alpha, base.alpha, rtol=0, atol=1e-15)
        np.testing.assert_allclose(s.beta, base.beta, rtol=0, atol=1e-15)
        np.testing.assert_allclose(s.gamma_amp, base.gamma_amp * rot, rtol=0, atol=1e-15)
        np.testing.assert_allclose(s.delta_amp, base.delta_amp * rot, rtol=0, atol=1e-15)


def test_no_overflow_at_long_times(fig2):
    s = analytic.amplitudes_general(fig2, np.array([1e3, 1e5, 1e7]))
    v = s.vector()
    assert np.all(np.isfinite(v)) and np.abs(v).max() < 1e-100


def test_negative_time_rejected(fig2):
    with pytest.raises(ValueError):
        analytic.amplitudes_general(fig2, -1.0)


@pytest.mark.parametrize("offset", [0.0, 1e-9, 1e-5])
def test_exceptional_point(offset):
    # Delta = Gamma = 0 and g = K/4 puts Omega at zero
    g = 0.5 + offset
    sub = SubsystemParams(g=g, kappa=2.0)
    assert abs(analytic.omega(SubsystemParams(g=0.5, kappa=2.0))) == 0
    for p, args in [(CascadeParams.equal(sub), (g, 2.0, 0, 0, 0, g, 2.0, 0, 0, 0, 0.0)),
                    (CascadeParams(sub, SubsystemParams(g=3.0, kappa=1.0, gamma=0.4), 0.3),
                     (g, 2.0, 0, 0, 0, 3.0, 1.0, 0, 0.4, 0, 0.3))]:
        for t in (0.1, 1.0, 4.0):
            got = analytic.amplitudes_general(p, t).vector()
            assert np.abs(got - expm_amplitudes(args, t)).max() < 1e-10
    for t in (0.1, 1.0, 4.0):
        got = analytic.amplitudes_equal(sub, 0.0, t).vector()
        assert np.abs(got - expm_amplitudes((g, 2.0, 0, 0, 0, g, 2.0, 0, 0, 0, 0.0), t)).max() < 1e-10
