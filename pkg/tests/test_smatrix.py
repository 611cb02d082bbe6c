"""Differential data from frozen scattering matrices.

Every analytic reference here is derived by hand from the two-channel
parameterization; nothing is compared against the code's own stencils.
"""
from __future__ import annotations

import math
from dataclasses import replace

import numpy as np
import pytest

import qpump as qp

TWO_PI = 2.0 * math.pi
Q = qp.QuadratureSpec()


def test_build_two_channel_is_unitary():
    rng = np.random.default_rng(0)
    for _ in range(50):
        p = qp.TwoChannelParams(theta=rng.uniform(0.0, math.pi / 2),
                                alpha=rng.uniform(-4.0, 4.0),
                                phi=rng.uniform(-4.0, 4.0),
                                gamma=rng.uniform(-4.0, 4.0))
        s = qp.build_two_channel(p)
        assert np.max(np.abs(s @ s.conj().T - np.eye(2))) < 1e-14


def test_decompose_round_trip():
    rng = np.random.default_rng(1)
    for _ in range(200):
        p = qp.TwoChannelParams(theta=rng.uniform(0.05, math.pi / 2 - 0.05),
                                alpha=rng.uniform(-math.pi, math.pi),
                                phi=rng.uniform(-math.pi, math.pi),
                                gamma=rng.uniform(0.0, math.pi))
        s = qp.build_two_channel(p)
        back = qp.build_two_channel(qp.decompose_two_channel(s))
        assert np.max(np.abs(back - s)) < 1e-10


def test_decompose_degenerate_corners():
    # theta = 0 leaves phi undefined, theta = pi/2 leaves alpha undefined;
    # the reconstruction must still reproduce the matrix.
    # arccos near 1 costs half the digits, so the gate is looser here
    for theta in (0.0, math.pi / 2):
        p = qp.TwoChannelParams(theta=theta, alpha=0.3, phi=-0.8, gamma=1.1)
        s = qp.build_two_channel(p)
        back = qp.build_two_channel(qp.decompose_two_channel(s))
        assert np.max(np.abs(back - s)) < 1e-7


def test_battery_energy_shift_analytic():
    """Linear phase ramp on the transmission amplitudes.

    With t, t' carrying exp(-i phi) and exp(+i phi), the shift matrix is
    phi_dot * [[sin^2 th, i sc e^{i(alpha-phi)}], [-i sc e^{-i(alpha-phi)},
    -sin^2 th]] with sc = sin th cos th.
    """
    theta, alpha, rate = 0.7, 0.4, TWO_PI
    cyc = qp.make_battery_cycle(qp.TwoChannelParams(theta=theta, alpha=alpha),
                                phi=lambda t: rate * t, period=1.0)
    t0 = 0.37
    d = qp.differential_data(cyc, 2.0, t0, Q)
    sc = math.sin(theta) * math.cos(theta)
    off = 1j * sc * np.exp(1j * (alpha - rate * t0))
    want = rate * np.array([[math.sin(theta) ** 2, off],
                            [np.conj(off), -math.sin(theta) ** 2]])
    assert np.max(np.abs(d.energy_shift - want)) < 1e-8
    # the shift is Hermitian by construction
    assert np.max(np.abs(d.energy_shift - d.energy_shift.conj().T)) < 1e-12


def test_uturn_time_delay_is_optical():
    # diag(e^{i(k ell + Phi)}, e^{i(k ell - Phi)}) with k = sqrt(2E):
    # the Wigner delay is ell / sqrt(2E) times the identity.
    ell = 1.7
    cyc = qp.make_uturn_cycle(ell, flux=lambda t: TWO_PI * t, period=1.0)
    e0 = 1.9
    d = qp.differential_data(cyc, e0, 0.21, Q)
    want = ell / math.sqrt(2.0 * e0) * np.eye(2)
    assert np.max(np.abs(d.time_delay - want)) < 1e-7
    # flux sweep moves the channels in opposite directions
    assert np.max(np.abs(d.energy_shift
                         - np.diag([-TWO_PI, TWO_PI]))) < 1e-7


def test_curvature_three_routes_agree():
    rng = np.random.default_rng(7)
    for n in (2, 3):
        cyc = qp.make_random_analytic_cycle(n, rng)
        ident = qp.curvature_identity(cyc, 1.3, 0.4, Q)
        assert ident.residual < 1e-6
        assert ident.residual_mixed < 1e-6


def test_curvature_identity_second_order():
    # halving the steps must cut the divergence-form residual by about 4;
    # run above the roundoff floor so the truncation term dominates.
    rng = np.random.default_rng(11)
    cyc = qp.make_random_analytic_cycle(2, rng)
    coarse = replace(Q, h_e_rel=8e-3, h_t_rel=8e-3)
    fine = replace(Q, h_e_rel=4e-3, h_t_rel=4e-3)
    r_coarse = qp.curvature_identity(cyc, 1.1, 0.3, coarse).residual
    r_fine = qp.curvature_identity(cyc, 1.1, 0.3, fine).residual
    assert 3.0 < r_coarse / r_fine < 5.5


def test_nonunitary_cycle_is_rejected():
    def bad(e, t):
        return 1.02 * np.eye(2, dtype=complex)

    cyc = qp.PumpCycle(n_channels=2, evaluate=bad, period=1.0)
    with pytest.raises(qp.NonUnitary):
        qp.differential_data(cyc, 1.0, 0.0, Q)


def test_stencil_needs_room_above_band_bottom():
    rng = np.random.default_rng(3)
    cyc = qp.make_random_analytic_cycle(2, rng)
    with pytest.raises(qp.StencilOutOfDomain):
        qp.curvature_identity(cyc, 1e-9, 0.2, Q)


def test_gauge_and_fiducial_leave_charges_alone():
    rng = np.random.default_rng(5)
    cyc = qp.make_random_analytic_cycle(3, rng)
    state = qp.ThermalState(mu=1.2, temperature=0.0)
    base = qp.cycle_charge(cyc, state, Q)
    moved = qp.apply_gauge_and_fiducial(cyc, shifts=np.array([0.3, -0.1, 0.7]),
                                        phases=np.array([1.0, -2.0, 0.4]))
    assert np.max(np.abs(qp.cycle_charge(moved, state, Q) - base)) < 1e-9
    with pytest.raises(ValueError):
        qp.apply_gauge_and_fiducial(cyc, shifts=np.zeros(2), phases=np.zeros(3))


def test_verify_cycle_on_analytic_family():
    rng = np.random.default_rng(9)
    cyc = qp.make_random_analytic_cycle(2, rng)
    report = qp.verify_cycle(cyc, np.array([0.5, 1.0, 2.0]),
                             np.linspace(0.0, 1.0, 7), Q)
    assert report["unitarity"] < 1e-12
    assert report["periodicity"] < 1e-12


def test_hermitization_budget_scales_with_step():
    # a coarse step on a smooth cycle produces an O(h^2) anti-Hermitian
    # defect; that must be absorbed, not flagged as a broken matrix.
    rng = np.random.default_rng(13)
    cyc = qp.make_random_analytic_cycle(2, rng)
    coarse = replace(Q, h_e_rel=8e-3, h_t_rel=8e-3)
    d = qp.differential_data(cyc, 1.0, 0.3, coarse)
    assert d.hermitization_residual > 10.0 * coarse.hermiticity_tol
