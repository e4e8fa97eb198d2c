import numpy as np
import pytest

from cascade_sim import analytic
from cascade_sim.lindblad import channel_yields, evolve_master, lindblad_rhs, pure_state
from cascade_sim.model import A, B, E, CascadeParams, SubsystemParams
from cascade_sim.observables import p_rad_total
from conftest import random_params
from oracles import FIG2_ARGS, tensor_operators


def _reference_rhs(args, rho):
    h, jumps, _ = tensor_operators(*args)
    out = -1j * (h @ rho - rho @ h)
    for j in jumps:
        jd = j.conj().T
        out += j @ rho @ jd - 0.5 * (jd @ j @ rho + rho @ jd @ j)
    return out


def test_dark_state_is_stationary(fig2):
    assert not lindblad_rhs(fig2, pure_state(E)).any()


def test_no_couplings_no_motion():
    p = CascadeParams(SubsystemParams(), SubsystemParams())
    rho = np.full((5, 5), 0.2, dtype=complex)
    assert not lindblad_rhs(p, rho).any()


def test_rhs_from_excited_atom(fig2):
    # worked by hand: -i[H, |a><a|] = i g (|a><b| - |b><a|); atom decay moves gamma from a to e
    expected = np.zeros((5, 5), dtype=complex)
    expected[A, A] = -0.2
    expected[A, B] = 5j
    expected[B, A] = -5j
    expected[E, E] = 0.2
    got = lindblad_rhs(fig2, pure_state(A))
    np.testing.assert_allclose(got, expected, atol=1e-14)
    np.testing.assert_allclose(got, _reference_rhs(FIG2_ARGS, pure_state(A)), atol=1e-14)


def test_rhs_hermitian_traceless():
    rng = np.random.default_rng(11)
    for _ in range(20):
        p = random_params(rng)
        m = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
        rho = m @ m.conj().T
        rho /= np.trace(rho)
        out = lindblad_rhs(p, rho)
        np.testing.assert_allclose(out, out.conj().T, atol=1e-12)
        assert abs(np.trace(out)) < 1e-12


def test_absorbing_state_constant(fig2):
    out = evolve_master(fig2, [0.0, 1.0, 10.0], pure_state(E))
    for rho in out:
        np.testing.assert_allclose(rho, pure_state(E), atol=1e-15)


def test_trace_positivity_mixture(fig2):
    t = np.linspace(0, 10, 201)
    rho = evolve_master(fig2, t)
    assert np.abs(np.trace(rho, axis1=1, axis2=2) - 1).max() < 1e-9
    assert np.abs(rho - rho.conj().transpose(0, 2, 1)).max() < 1e-10
    assert min(np.linalg.eigvalsh(r).min() for r in rho) > -1e-8
    assert np.abs(rho[:, E, :E]).max() < 1e-10


def test_pure_branch_structure(fig2):
    t = np.linspace(0, 10, 101)
    rho = evolve_master(fig2, t)
    psi = analytic.amplitudes_general(fig2, t).vector()
    np.testing.assert_allclose(rho[:, :4, :4], np.einsum("ti,tj->tij", psi, psi.conj()), atol=1e-8)
    np.testing.assert_allclose(rho[:, E, E].real, 1 - np.sum(np.abs(psi) ** 2, axis=1), atol=1e-8)


def test_cavity_population_t1(fig2):
    rho = evolve_master(fig2, [0.0, 1.0])
    beta = analytic.amplitudes_general(fig2, 1.0).beta
    assert rho[1, B, B].real == pytest.approx(abs(beta) ** 2, abs=1e-8)


def test_channel_yields_account_for_all_loss(fig2):
    tot = p_rad_total(fig2)
    rho, yields = channel_yields(fig2, [0.0, tot.t_cut])
    assert yields[-1].sum() == pytest.approx(rho[-1, E, E].real, abs=1e-9)
    assert yields[-1, 0] == pytest.approx(tot.value, abs=1e-8)
