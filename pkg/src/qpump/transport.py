"""Transport from the frozen scattering matrix.

All observables here are built from the energy-shift matrix of a pump
cycle.  The charge current into channel j is the thermal average of its
diagonal element over minus the derivative of the Fermi function; the
dissipation current averages the squared matrix instead, and the excess
over the charge bound comes from the off-diagonal row weight, which also
feeds the entropy and noise currents at finite temperature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy.special import expit

from .errors import ZeroTemperature
from .quadrature import QuadratureSpec, gauss_legendre, midpoint_grid
from .smatrix import PumpCycle, _energy_shift, _steps

TWO_PI = 2.0 * math.pi

# 1 / integral_0^1 of the window shape over filling factors:
# -x ln x - (1-x) ln(1-x) integrates to 1/2, x (1-x) to 1/6.
ENTROPY_NORM = 2.0
NOISE_NORM = 6.0


def entropy_weight(x: float) -> float:
    """Binary entropy -x ln x - (1-x) ln(1-x); integral over [0, 1] is 1/2."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError("filling factor must lie in [0, 1]")
    out = 0.0
    if x > 0.0:
        out -= x * math.log(x)
    if x < 1.0:
        out -= (1.0 - x) * math.log(1.0 - x)
    return out


def noise_weight(x: float) -> float:
    """Partition noise factor x (1 - x); integral over [0, 1] is 1/6."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise ValueError("filling factor must lie in [0, 1]")
    return x * (1.0 - x)


@dataclass(frozen=True)
class ThermalState:
    """Reservoir filling: common chemical potential mu and temperature."""

    mu: float
    temperature: float = 0.0

    def __post_init__(self):
        if self.mu <= 0.0:
            raise ValueError("chemical potential must be positive")
        if self.temperature < 0.0:
            raise ValueError("temperature must be non-negative")

    @property
    def beta(self) -> float:
        if self.temperature == 0.0:
            raise ZeroTemperature("beta undefined at zero temperature")
        return 1.0 / self.temperature


def fermi_weight(energy, state: ThermalState):
    """Occupation of the reservoirs at the given energy."""
    e = np.asarray(energy, dtype=float)
    if state.temperature == 0.0:
        return np.where(e < state.mu, 1.0, np.where(e > state.mu, 0.0, 0.5))
    return expit(-(e - state.mu) * state.beta)


def fermi_derivative(energy, state: ThermalState):
    """d rho / dE = -beta rho (1 - rho); delta-like at zero temperature."""
    if state.temperature == 0.0:
        raise ZeroTemperature(
            "the zero-temperature occupation derivative is a point measure; "
            "use the mu-evaluated formulas instead")
    rho = fermi_weight(energy, state)
    return -state.beta * rho * (1.0 - rho)


def thermal_energy_nodes(state: ThermalState,
                         q: QuadratureSpec) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes straddling mu for integrands localized by -drho/dE.

    Two Gauss-Legendre panels meeting at mu, each reaching out
    `energy_window` temperatures (clipped below so stencils stay inside
    the physical band E > 0).
    """
    if state.temperature == 0.0:
        raise ZeroTemperature("no thermal window at zero temperature")
    half = max(q.n_energy // 2, 8)
    reach = q.energy_window * state.temperature
    floor = max(1e-8, 10.0 * q.h_e_rel * max(state.mu, 1.0))
    lo = max(state.mu - reach, floor)
    x1, w1 = gauss_legendre(lo, state.mu, half)
    x2, w2 = gauss_legendre(state.mu, state.mu + reach, half)
    return np.concatenate([x1, x2]), np.concatenate([w1, w2])


def _row_weights(shift: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(diagonal, squared row norm) of a Hermitian energy-shift matrix."""
    diag = np.real(np.diag(shift))
    rows = np.sum(np.abs(shift) ** 2, axis=1)
    return diag, rows


def bpt_current(cycle: PumpCycle, time: float, state: ThermalState,
                q: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Charge current into each channel, scatterer to lead positive.

    At zero temperature this is the diagonal of the energy shift at mu
    over 2 pi; at finite temperature the diagonal is averaged against
    -drho/dE.
    """
    if state.temperature == 0.0:
        shift = _energy_shift(cycle, state.mu, time, q)
        return np.real(np.diag(shift)) / TWO_PI
    nodes, weights = thermal_energy_nodes(state, q)
    mass = -fermi_derivative(nodes, state) * weights
    total = np.zeros(cycle.n_channels)
    for e, w in zip(nodes, mass):
        total += w * np.real(np.diag(_energy_shift(cycle, e, time, q)))
    return total / TWO_PI


def dissipation_current(cycle: PumpCycle, time: float, state: ThermalState,
                        q: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Heat deposited per unit time into each channel, >= pi * current^2.

    The squared energy shift replaces the diagonal in the thermal
    average; Cauchy-Schwarz in both the energy average and the channel
    index gives the charge bound, saturated exactly when the shift is
    diagonal and energy-independent across the thermal window.
    """
    if state.temperature == 0.0:
        shift = _energy_shift(cycle, state.mu, time, q)
        _, rows = _row_weights(shift)
        return rows / (2.0 * TWO_PI)
    nodes, weights = thermal_energy_nodes(state, q)
    mass = -fermi_derivative(nodes, state) * weights
    total = np.zeros(cycle.n_channels)
    for e, w in zip(nodes, mass):
        _, rows = _row_weights(_energy_shift(cycle, e, time, q))
        total += w * rows
    return total / (2.0 * TWO_PI)


def _offdiag_row_weight(cycle: PumpCycle, time: float, state: ThermalState,
                        q: QuadratureSpec) -> np.ndarray:
    shift = _energy_shift(cycle, state.mu, time, q)
    diag, rows = _row_weights(shift)
    return rows - diag ** 2


def entropy_current(cycle: PumpCycle, time: float, state: ThermalState,
                    q: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Entropy carried into each channel per unit time.

    Equals beta / (2 pi * 2) times the off-diagonal row weight of the
    energy shift at mu; the 2 is the inverse integral of the binary
    entropy window.  Finite temperature only, and the shift is taken
    energy-independent across the thermal window.
    """
    beta = state.beta
    return beta / (TWO_PI * ENTROPY_NORM) * _offdiag_row_weight(
        cycle, time, state, q)


def noise_current(cycle: PumpCycle, time: float, state: ThermalState,
                  q: QuadratureSpec = QuadratureSpec()) -> np.ndarray:
    """Thermally smeared partition-noise rate for each channel.

    Same structure as the entropy current with the x (1 - x) window, so
    the normalization is 6 instead of 2.
    """
    beta = state.beta
    return beta / (TWO_PI * NOISE_NORM) * _offdiag_row_weight(
        cycle, time, state, q)


def _integration_interval(cycle: PumpCycle) -> tuple[float, float]:
    if cycle.period is not None:
        return 0.0, cycle.period
    if cycle.window is not None:
        return cycle.window
    raise ValueError("cycle has neither a period nor a window to integrate over")


def cycle_charge(cycle: PumpCycle, state: ThermalState,
                 q: QuadratureSpec = QuadratureSpec(),
                 n_time: int | None = None) -> np.ndarray:
    """Charge pumped into each channel over one period (or pulse window).

    Midpoint rule in time; for smooth periodic cycles this converges
    spectrally, and the nodes dodge path corners of piecewise drives.
    """
    t0, t1 = _integration_interval(cycle)
    times, dt = midpoint_grid(t0, t1, n_time or q.n_time)
    total = np.zeros(cycle.n_channels)
    for t in times:
        total += bpt_current(cycle, t, state, q)
    return total * dt


def dissipated_heat(cycle: PumpCycle, state: ThermalState,
                    q: QuadratureSpec = QuadratureSpec(),
                    n_time: int | None = None) -> np.ndarray:
    """Heat per cycle into each channel (time integral of dissipation)."""
    t0, t1 = _integration_interval(cycle)
    times, dt = midpoint_grid(t0, t1, n_time or q.n_time)
    total = np.zeros(cycle.n_channels)
    for t in times:
        total += dissipation_current(cycle, t, state, q)
    return total * dt


def _wrap_angle(x: float) -> float:
    return (x + math.pi) % TWO_PI - math.pi


def det_phase_rate(cycle: PumpCycle, energy: float, time: float,
                   q: QuadratureSpec = QuadratureSpec()) -> float:
    """d/dt of arg det S(E, t) by Richardson-extrapolated differences.

    Local phase increments are wrapped to (-pi, pi], which is safe for
    the small stencil steps used here.
    """
    _, h = _steps(cycle, energy, q)

    def phase(t: float) -> float:
        return float(np.angle(np.linalg.det(cycle.sample(energy, t))))

    def diff(step: float) -> float:
        return _wrap_angle(phase(time + step) - phase(time - step)) / (2.0 * step)

    d1 = diff(h)
    d2 = diff(h / 2.0)
    return (4.0 * d2 - d1) / 3.0


def birman_krein_residual(cycle: PumpCycle, state: ThermalState,
                          q: QuadratureSpec = QuadratureSpec(),
                          times: np.ndarray | None = None) -> float:
    """Worst mismatch between total current and the spectral-flow rate.

    The summed channel currents must equal -1/(2 pi) d/dt arg det S,
    thermally averaged; both sides use fourth-order differencing so the
    residual probes the identity rather than the stencil.
    """
    qr = replace(q, richardson=True)
    if times is None:
        t0, t1 = _integration_interval(cycle)
        times, _ = midpoint_grid(t0, t1, 16)
    worst = 0.0
    for t in times:
        total = float(np.sum(bpt_current(cycle, t, state, qr)))
        if state.temperature == 0.0:
            rate = det_phase_rate(cycle, state.mu, t, qr)
        else:
            nodes, weights = thermal_energy_nodes(state, qr)
            mass = -fermi_derivative(nodes, state) * weights
            rate = sum(w * det_phase_rate(cycle, e, t, qr)
                       for e, w in zip(nodes, mass))
        worst = max(worst, abs(total + rate / TWO_PI))
    return worst


@dataclass(frozen=True)
class TransportReport:
    """Sampled currents over one cycle plus their integrals."""

    times: np.ndarray
    charge_rate: np.ndarray          # (n_time, n_channels)
    dissipation_rate: np.ndarray     # (n_time, n_channels)
    entropy_rate: np.ndarray | None  # None at zero temperature
    noise_rate: np.ndarray | None
    charges: np.ndarray
    heat: np.ndarray
    entropy: np.ndarray | None
    noise: np.ndarray | None
    bk_residual: float


def transport_report(cycle: PumpCycle, state: ThermalState,
                     q: QuadratureSpec = QuadratureSpec(),
                     n_time: int | None = None) -> TransportReport:
    """One-stop cycle summary used by the command-line front end."""
    t0, t1 = _integration_interval(cycle)
    times, dt = midpoint_grid(t0, t1, n_time or q.n_time)
    n_ch = cycle.n_channels
    finite_t = state.temperature > 0.0

    charge = np.empty((times.size, n_ch))
    diss = np.empty((times.size, n_ch))
    ent = np.empty((times.size, n_ch)) if finite_t else None
    noi = np.empty((times.size, n_ch)) if finite_t else None
    for i, t in enumerate(times):
        charge[i] = bpt_current(cycle, t, state, q)
        diss[i] = dissipation_current(cycle, t, state, q)
        if finite_t:
            off = _offdiag_row_weight(cycle, t, state, q)
            ent[i] = state.beta / (TWO_PI * ENTROPY_NORM) * off
            noi[i] = state.beta / (TWO_PI * NOISE_NORM) * off
    bk = birman_krein_residual(cycle, state, q,
                               times=times[:: max(times.size // 8, 1)])
    return TransportReport(
        times=times,
        charge_rate=charge,
        dissipation_rate=diss,
        entropy_rate=ent,
        noise_rate=noi,
        charges=charge.sum(axis=0) * dt,
        heat=diss.sum(axis=0) * dt,
        entropy=ent.sum(axis=0) * dt if finite_t else None,
        noise=noi.sum(axis=0) * dt if finite_t else None,
        bk_residual=bk,
    )
