"""Frozen scattering matrices S(E, t) and their differential data.

A pump cycle is a two-parameter family of n x n unitary scattering
matrices: E is the energy of the incoming particle, t the (slow) time at
which the scatterer is frozen.  All transport quantities derive from two
Hermitian matrices built from first derivatives,

    energy shift   = i dS/dt S^dagger
    time delay     = -i dS/dE S^dagger   (Wigner delay)

and from the time-energy curvature, their commutator

    curvature = i [time_delay, energy_shift].

Derivatives are second-order central differences; optional Richardson
extrapolation upgrades them to fourth order.  The anti-Hermitian residue
of the difference quotients is discarded and its norm reported as a
quality metric.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import NonUnitary, StencilOutOfDomain
from .quadrature import QuadratureSpec

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class PumpCycle:
    """A family S(E, t) of frozen scattering matrices.

    `evaluate(E, t)` must return an (n_channels, n_channels) complex
    unitary matrix.  Periodic cycles carry a finite `period`; pulse
    cycles instead carry a `window` outside which the scatterer is
    static.  Families with neither (open protocols) support differential
    operations only.
    """

    n_channels: int
    evaluate: Callable[[float, float], np.ndarray]
    period: float | None = None
    window: tuple[float, float] | None = None
    label: str = ""

    def __post_init__(self):
        if self.n_channels < 1:
            raise ValueError("n_channels must be positive")
        if self.period is not None and self.period <= 0:
            raise ValueError("period must be positive")
        if self.window is not None and self.window[1] <= self.window[0]:
            raise ValueError("window must have positive length")

    @property
    def time_scale(self) -> float:
        if self.period is not None:
            return self.period
        if self.window is not None:
            return self.window[1] - self.window[0]
        return 1.0

    def sample(self, energy: float, time: float) -> np.ndarray:
        s = np.asarray(self.evaluate(energy, time), dtype=np.complex128)
        if s.shape != (self.n_channels, self.n_channels):
            raise ValueError(f"evaluate returned shape {s.shape}, "
                             f"expected ({self.n_channels}, {self.n_channels})")
        return s


@dataclass(frozen=True)
class TwoChannelParams:
    """Angles of the generic two-channel unitary

        S = e^{i gamma} [[e^{i alpha} cos theta, i e^{-i phi} sin theta],
                         [i e^{i phi} sin theta, e^{-i alpha} cos theta]]

    with theta in [0, pi/2], alpha and phi in [0, 2 pi), gamma in [0, pi).
    cos theta is the reflection magnitude, sin theta the transmission
    magnitude; gamma is half the phase of det S.
    """

    theta: float
    alpha: float = 0.0
    phi: float = 0.0
    gamma: float = 0.0

    def __post_init__(self):
        if not -1e-12 <= self.theta <= np.pi / 2 + 1e-12:
            raise ValueError("theta must lie in [0, pi/2]")


@dataclass(frozen=True)
class DifferentialData:
    """First-derivative data of a cycle at one (E, t) point."""

    energy: float
    time: float
    energy_shift: np.ndarray
    time_delay: np.ndarray
    curvature: np.ndarray
    h_e: float
    h_t: float
    hermitization_residual: float


def build_two_channel(params: TwoChannelParams) -> np.ndarray:
    c, s = np.cos(params.theta), np.sin(params.theta)
    ea, ep = np.exp(1j * params.alpha), np.exp(1j * params.phi)
    m = np.array([[ea * c, 1j * s / ep],
                  [1j * s * ep, c / ea]], dtype=np.complex128)
    return np.exp(1j * params.gamma) * m


def decompose_two_channel(s: np.ndarray, tol: float = 1e-10) -> TwoChannelParams:
    """Recover the canonical angles of a 2x2 unitary.

    Inverts `build_two_channel` with gamma reduced to [0, pi) and the
    degenerate points fixed by convention: theta = 0 takes phi = 0,
    theta = pi/2 takes alpha = 0.
    """
    s = np.asarray(s, dtype=np.complex128)
    if s.shape != (2, 2):
        raise ValueError("expected a 2x2 matrix")
    _check_unitary(s, tol)
    det = s[0, 0] * s[1, 1] - s[0, 1] * s[1, 0]
    gamma = (0.5 * np.angle(det)) % np.pi
    su = np.exp(-1j * gamma) * s
    theta = float(np.arccos(np.clip(np.abs(su[0, 0]), 0.0, 1.0)))
    alpha = float(np.angle(su[0, 0])) % TWO_PI if np.abs(su[0, 0]) > 1e-12 else 0.0
    phi = (float(np.angle(su[1, 0])) - np.pi / 2) % TWO_PI \
        if np.abs(su[1, 0]) > 1e-12 else 0.0
    return TwoChannelParams(theta=theta, alpha=alpha, phi=phi, gamma=gamma)


def _check_unitary(s: np.ndarray, tol: float) -> None:
    n = s.shape[0]
    defect = np.max(np.abs(s @ s.conj().T - np.eye(n)))
    if defect > tol:
        raise NonUnitary(f"unitarity defect {defect:.3e} exceeds {tol:.1e}")


def _central(cycle: PumpCycle, e: float, t: float, he: float, ht: float,
             tol: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Central-difference dS/dt and dS/dE, and the centre sample."""
    s0 = cycle.sample(e, t)
    sp_t = cycle.sample(e, t + ht)
    sm_t = cycle.sample(e, t - ht)
    sp_e = cycle.sample(e + he, t)
    sm_e = cycle.sample(e - he, t)
    for s in (s0, sp_t, sm_t, sp_e, sm_e):
        _check_unitary(s, tol)
    ds_dt = (sp_t - sm_t) / (2.0 * ht)
    ds_de = (sp_e - sm_e) / (2.0 * he)
    return ds_dt, ds_de, s0


def _hermitize(a: np.ndarray) -> tuple[np.ndarray, float]:
    h = 0.5 * (a + a.conj().T)
    return h, float(np.max(np.abs(a - h)))


def _shift_and_delay(cycle: PumpCycle, e: float, t: float, he: float,
                     ht: float, q: QuadratureSpec
                     ) -> tuple[np.ndarray, np.ndarray, float]:
    ds_dt, ds_de, s0 = _central(cycle, e, t, he, ht, q.unitarity_tol)
    if q.richardson:
        ds_dt2, ds_de2, _ = _central(cycle, e, t, he / 2, ht / 2,
                                     q.unitarity_tol)
        ds_dt = (4.0 * ds_dt2 - ds_dt) / 3.0
        ds_de = (4.0 * ds_de2 - ds_de) / 3.0
    sh = s0.conj().T
    shift, r1 = _hermitize(1j * ds_dt @ sh)
    delay, r2 = _hermitize(-1j * ds_de @ sh)
    return shift, delay, max(r1, r2)


def _steps(cycle: PumpCycle, e: float, q: QuadratureSpec) -> tuple[float, float]:
    he = q.h_e_rel * max(e, 1.0)
    ht = q.h_t_rel * cycle.time_scale
    return he, ht


def differential_data(cycle: PumpCycle, energy: float, time: float,
                      q: QuadratureSpec = QuadratureSpec()) -> DifferentialData:
    """Energy shift, time delay and curvature at one (E, t) point.

    The five-point stencil needs E - h_e > 0; below that the band bottom
    is in the way and StencilOutOfDomain is raised.  Both derivative
    matrices are Hermitized; the correction norm must stay below
    10 x hermiticity_tol plus the second-order truncation budget of the
    stencil, otherwise the family is not behaving like a smooth unitary
    cycle at the requested steps (a kink under the stencil, say).
    """
    he, ht = _steps(cycle, energy, q)
    if energy <= he:
        raise StencilOutOfDomain(
            f"energy {energy:.3e} within one step {he:.3e} of the band bottom")
    shift, delay, resid = _shift_and_delay(cycle, energy, time, he, ht, q)
    scale = max(1.0, float(np.max(np.abs(shift))), float(np.max(np.abs(delay))))
    h_rel = max(ht / cycle.time_scale, he / max(energy, 1.0))
    budget = 10.0 * q.hermiticity_tol + 100.0 * h_rel ** 2 * scale ** 3
    if resid > budget:
        raise NonUnitary(
            f"Hermitization correction {resid:.3e} exceeds the smooth-cycle "
            f"budget {budget:.1e}; steps unsuitable for this cycle")
    curvature = 1j * (delay @ shift - shift @ delay)
    return DifferentialData(energy=energy, time=time, energy_shift=shift,
                            time_delay=delay, curvature=curvature,
                            h_e=he, h_t=ht, hermitization_residual=resid)


def _energy_shift(cycle: PumpCycle, e: float, t: float,
                  q: QuadratureSpec) -> np.ndarray:
    """Fast path: Hermitized i dS/dt S^dagger only (two stencil samples)."""
    _, ht = _steps(cycle, e, q)
    sp = cycle.sample(e, t + ht)
    sm = cycle.sample(e, t - ht)
    s0 = cycle.sample(e, t)
    _check_unitary(s0, q.unitarity_tol)
    ds_dt = (sp - sm) / (2.0 * ht)
    if q.richardson:
        sp2 = cycle.sample(e, t + ht / 2)
        sm2 = cycle.sample(e, t - ht / 2)
        ds_dt = (4.0 * (sp2 - sm2) / ht - ds_dt) / 3.0
    shift, _ = _hermitize(1j * ds_dt @ s0.conj().T)
    return shift


@dataclass(frozen=True)
class CurvatureIdentity:
    """Three discretizations of the time-energy curvature at one point."""

    commutator: np.ndarray      # i [time_delay, energy_shift]
    mixed: np.ndarray           # i (dS/dt dS^dagger/dE - dS/dE dS^dagger/dt)
    divergence: np.ndarray      # d(energy_shift)/dE + d(time_delay)/dt
    residual: float             # max-norm of commutator - divergence
    residual_mixed: float       # max-norm of mixed - divergence


def curvature_identity(cycle: PumpCycle, energy: float, time: float,
                       q: QuadratureSpec = QuadratureSpec()) -> CurvatureIdentity:
    """Check i[T, E] = i(dS/dt dS*/dE - dS/dE dS*/dt) = dE/dE' + dT/dt.

    All three agree exactly for smooth unitary families; the returned
    residuals measure finite-difference error and shrink approximately
    fourfold when the steps in `q` are halved (truncation-dominated
    regime; at very small steps rounding noise takes over).
    """
    he, ht = _steps(cycle, energy, q)
    if energy <= 3.0 * he:
        raise StencilOutOfDomain("nested stencil needs energy > 3 h_e")
    dd = differential_data(cycle, energy, time, q)
    commutator = dd.curvature

    ds_dt, ds_de, _ = _central(cycle, energy, time, he, ht, q.unitarity_tol)
    mixed, _ = _hermitize(1j * (ds_dt @ ds_de.conj().T - ds_de @ ds_dt.conj().T))

    shift_p = _shift_and_delay(cycle, energy + he, time, he, ht, q)[0]
    shift_m = _shift_and_delay(cycle, energy - he, time, he, ht, q)[0]
    delay_p = _shift_and_delay(cycle, energy, time + ht, he, ht, q)[1]
    delay_m = _shift_and_delay(cycle, energy, time - ht, he, ht, q)[1]
    divergence = (shift_p - shift_m) / (2.0 * he) + (delay_p - delay_m) / (2.0 * ht)

    return CurvatureIdentity(
        commutator=commutator, mixed=mixed, divergence=divergence,
        residual=float(np.max(np.abs(commutator - divergence))),
        residual_mixed=float(np.max(np.abs(mixed - divergence))))


def apply_gauge_and_fiducial(cycle: PumpCycle, shifts: np.ndarray,
                             phases: np.ndarray,
                             k_of_e: Callable[[float], float] | None = None
                             ) -> PumpCycle:
    """Move fiducial points and re-gauge the channels.

    Shifting the fiducial point of channel i by xi_i and its gauge phase
    by phi_i maps S_ij -> S_ij exp(i k(E)(xi_i + xi_j)) exp(i(phi_i - phi_j)).
    Diagonal differential data, hence every transport current, is
    unchanged.  The default dispersion is k(E) = sqrt(2 E).
    """
    shifts = np.asarray(shifts, dtype=float)
    phases = np.asarray(phases, dtype=float)
    if shifts.shape != (cycle.n_channels,) or phases.shape != (cycle.n_channels,):
        raise ValueError("need one shift and one phase per channel")
    disp = k_of_e if k_of_e is not None else (lambda e: np.sqrt(2.0 * max(e, 0.0)))

    def gauged(e: float, t: float) -> np.ndarray:
        k = disp(e)
        u = np.exp(1j * (k * shifts + phases))
        w = np.exp(1j * (k * shifts - phases))
        return np.outer(u, w) * cycle.evaluate(e, t)

    return PumpCycle(n_channels=cycle.n_channels, evaluate=gauged,
                     period=cycle.period, window=cycle.window,
                     label=cycle.label + "+gauge")


def verify_cycle(cycle: PumpCycle, energies: np.ndarray, times: np.ndarray,
                 q: QuadratureSpec = QuadratureSpec()) -> dict[str, float]:
    """Worst unitarity and periodicity defects over a sample grid."""
    worst_u = 0.0
    worst_p = 0.0
    for e in energies:
        for t in times:
            s = cycle.sample(e, t)
            worst_u = max(worst_u, float(np.max(np.abs(
                s @ s.conj().T - np.eye(cycle.n_channels)))))
            if cycle.period is not None:
                sp = cycle.sample(e, t + cycle.period)
                worst_p = max(worst_p, float(np.max(np.abs(sp - s))))
    return {"unitarity": worst_u, "periodicity": worst_p}
