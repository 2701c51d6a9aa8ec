"""Reference solvers used to cross-validate the closed-form response.

Two independent routes to the signal sideband b_plus:

* ``linearized_response`` solves the first-order 3x3 frequency-domain system
  obtained from the three-component ansatz b(t) = b0 + b_+ e^{-i delta t}
  + b_- e^{+i delta t}.
* ``integrate_dynamics`` + ``demodulate`` integrate the semiclassical
  equations of motion in the time domain and extract the same component by
  least-squares lock-in demodulation.

``jacobian_eigenvalues`` provides the linear-stability verdict for steady
states; it is built from the same right-hand sides as the integrator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import DivergenceError, SingularResponseError, WindowTooShortError
from .model import (
    SINGULAR_FLOOR_REL,
    TWO_PI,
    DriveConfig,
    OptomechParams,
    SteadyState,
    f_denominator,
    steady_effective_detuning,
)


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the semiclassical equations of motion.

    ``b`` is the complex cavity field, ``q`` the dimensionless displacement,
    ``v`` its time derivative; times in us.
    """

    times: np.ndarray
    b: np.ndarray
    q: np.ndarray
    v: np.ndarray
    tolerance: float
    method: str = "DOP853"
    order: int = 8
    n_steps: int = 0


@dataclass(frozen=True)
class DemodulationResult:
    """Three-component lock-in fit of the late-time cavity field."""

    b0_est: complex
    b_plus_est: complex
    b_minus_est: complex
    residual: float
    window: tuple
    converged: bool


def linearized_response(
    delta: float,
    params: OptomechParams,
    steady: SteadyState,
    e_signal: float,
    floor: float = SINGULAR_FLOOR_REL,
):
    """Solve the first-order sideband system about a pumped steady state.

    Unknowns are (b_plus, conj(b_minus), q_plus); returns that triple.
    Raises SingularResponseError at parametric-divergence points (the 3x3
    determinant and f(delta) vanish together, so the same floor applies).
    """
    k, wm, gm, g0 = params.kappa, params.omega_m, params.gamma_m, params.g0
    dtil = steady_effective_detuning(params, steady)
    b0 = steady.b0

    if abs(f_denominator(delta, params, steady.w0)) < floor * wm ** 2 * k ** 2:
        raise SingularResponseError(delta)

    mat = np.array(
        [
            [k + 1j * (dtil - delta), 0.0, -1j * g0 * b0],
            [0.0, k - 1j * (dtil + delta), 1j * g0 * np.conj(b0)],
            [-wm * g0 * np.conj(b0), -wm * g0 * b0, wm * wm - delta * delta - 1j * gm * delta],
        ],
        dtype=complex,
    )
    rhs = np.array([e_signal, 0.0, 0.0], dtype=complex)
    b_plus, b_minus_conj, q_plus = np.linalg.solve(mat, rhs)
    return complex(b_plus), complex(b_minus_conj), complex(q_plus)


def integrate_dynamics(
    params: OptomechParams,
    drive: DriveConfig,
    initial=(0.0 + 0.0j, 0.0, 0.0),
    t_end: float = 100.0,
    tolerance: float = 1e-9,
    n_samples: int | None = None,
    ceiling: float = 1e8,
) -> Trajectory:
    """Integrate the semiclassical equations of motion.

    db/dt = -(i delta_p + kappa) b + i g0 b q + E_p + E_s e^{-i delta t}
    d2q/dt2 + gamma_m dq/dt + omega_m^2 q = omega_m g0 |b|^2

    Adaptive embedded-pair Runge-Kutta (DOP853) with local error per unit
    time bounded by ``tolerance``.  Raises DivergenceError when |b| crosses
    ``ceiling``; reports the escape time.
    """
    if t_end <= 0:
        raise ValueError(f"t_end must be > 0, got {t_end!r}")
    if tolerance <= 0:
        raise ValueError(f"tolerance must be > 0, got {tolerance!r}")

    dp, k, g0 = params.delta_p, params.kappa, params.g0
    wm, gm = params.omega_m, params.gamma_m
    ep, es, delta = drive.e_pump, drive.e_signal, drive.delta

    def rhs(t, y):
        b, q, v = y
        db = -(1j * dp + k) * b + 1j * g0 * b * q.real + ep + es * np.exp(-1j * delta * t)
        dv = -gm * v.real - wm * wm * q.real + wm * g0 * (b.real ** 2 + b.imag ** 2)
        return [db, v, dv]

    def escape(t, y):
        return abs(y[0]) - ceiling

    escape.terminal = True
    escape.direction = 1.0

    amp = max(1.0, abs(initial[0]), ep / k)
    y0 = np.array([initial[0], initial[1], initial[2]], dtype=complex)
    t_eval = None if n_samples is None else np.linspace(0.0, t_end, n_samples)
    sol = solve_ivp(
        rhs,
        (0.0, t_end),
        y0,
        method="DOP853",
        rtol=tolerance,
        atol=tolerance * amp,
        t_eval=t_eval,
        events=[escape],
    )
    if sol.status == 1:
        raise DivergenceError(escape_time=float(sol.t_events[0][0]), ceiling=ceiling)
    if not sol.success:
        raise RuntimeError(f"integration failed: {sol.message}")
    return Trajectory(
        times=sol.t,
        b=sol.y[0],
        q=sol.y[1].real,
        v=sol.y[2].real,
        tolerance=tolerance,
        n_steps=int(sol.nfev),
    )


def demodulate(
    traj: Trajectory,
    delta: float,
    window_periods: int = 20,
    residual_threshold: float = 0.01,
) -> DemodulationResult:
    """Least-squares fit of the late-time field to b0 + b_+ e^{-i d t} + b_- e^{+i d t}.

    The fit window is the final ``window_periods`` beat periods 2*pi/|delta|
    of the trajectory; the residual is the rms misfit, and the result is
    flagged not-converged when it exceeds ``residual_threshold``*|b0_est|.
    """
    if delta == 0:
        raise ValueError("delta must be nonzero for demodulation")
    window = window_periods * TWO_PI / abs(delta)
    t_end = float(traj.times[-1])
    t_start = t_end - window
    if t_start <= float(traj.times[0]):
        raise WindowTooShortError(
            f"window of {window:.3g} us does not leave room for a transient "
            f"in a trajectory of {t_end - float(traj.times[0]):.3g} us"
        )
    i0 = int(np.searchsorted(traj.times, t_start))
    t = traj.times[i0:]
    b = traj.b[i0:]
    if t.size < 9:
        raise WindowTooShortError(f"only {t.size} samples in the fit window")

    basis = np.column_stack(
        [np.ones_like(t, dtype=complex), np.exp(-1j * delta * t), np.exp(1j * delta * t)]
    )
    coef, *_ = np.linalg.lstsq(basis, b, rcond=None)
    resid = b - basis @ coef
    rms = float(np.sqrt(np.mean(np.abs(resid) ** 2)))
    scale = max(abs(coef[0]), abs(coef[1]), abs(coef[2]))
    return DemodulationResult(
        b0_est=complex(coef[0]),
        b_plus_est=complex(coef[1]),
        b_minus_est=complex(coef[2]),
        residual=rms,
        window=(t_start, t_end),
        converged=bool(rms <= residual_threshold * scale),
    )


def default_transient(params: OptomechParams) -> float:
    """Transient-skip heuristic: ten times the slowest bare decay time."""
    rates = [params.kappa]
    if params.gamma_m > 0:
        rates.append(params.gamma_m / 2.0)
    return 10.0 / min(rates)


def time_domain_response(
    delta: float,
    params: OptomechParams,
    steady: SteadyState,
    e_signal: float,
    tolerance: float = 1e-10,
    transient: float | None = None,
    window_periods: int = 24,
    samples_per_period: int = 32,
) -> complex:
    """b_plus via time-domain integration plus lock-in demodulation.

    Integration starts at the pumped steady state so the only transient is
    the switch-on of the signal drive.
    """
    if transient is None:
        transient = default_transient(params)
    period = TWO_PI / abs(delta)
    t_end = transient + window_periods * period
    n = int(math.ceil(t_end / period * samples_per_period))
    drive = DriveConfig(e_pump=steady.e_pump, e_signal=e_signal, delta=delta)
    traj = integrate_dynamics(
        params,
        drive,
        initial=(steady.b0, steady.q0, 0.0),
        t_end=t_end,
        tolerance=tolerance,
        n_samples=n,
    )
    return demodulate(traj, delta, window_periods).b_plus_est


def jacobian(params: OptomechParams, steady: SteadyState) -> np.ndarray:
    """Real 4x4 Jacobian of drive-free fluctuations in (Re b, Im b, q, v)."""
    k, g0, wm, gm = params.kappa, params.g0, params.omega_m, params.gamma_m
    dtil = steady_effective_detuning(params, steady)
    br, bi = steady.b0.real, steady.b0.imag
    return np.array(
        [
            [-k, dtil, -g0 * bi, 0.0],
            [-dtil, -k, g0 * br, 0.0],
            [0.0, 0.0, 0.0, 1.0],
            [2.0 * wm * g0 * br, 2.0 * wm * g0 * bi, -wm * wm, -gm],
        ]
    )


def jacobian_eigenvalues(params: OptomechParams, steady: SteadyState) -> np.ndarray:
    """Eigenvalues of the fluctuation Jacobian, sorted by descending real part."""
    eigs = np.linalg.eigvals(jacobian(params, steady))
    return eigs[np.lexsort((eigs.imag, -eigs.real))]
