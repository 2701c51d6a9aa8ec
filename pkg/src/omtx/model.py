"""Core model of the pump-controlled optomechanical cavity.

All model rates are angular frequencies in rad/us; drive amplitudes are in
photon^(1/2) rad/us.  Sign conventions: delta_p = omega_c - omega_p (pump
detuning from the cavity), delta = omega_s - omega_p (signal detuning from
the pump), delta_s = omega_s - omega_c = delta - delta_p.

This module holds the closed-form fast path: the steady-state photon-number
cubic, the signal-sideband response b_plus, and the input-output relation.
Independently derived reference solvers live in :mod:`omtx.oracles`.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.constants as const

from .errors import SingularResponseError

TWO_PI = 2.0 * math.pi

# |f(delta)| below SINGULAR_FLOOR_REL * omega_m^2 * kappa^2 is treated as a
# parametric-divergence point: the linearized response is unphysical there.
SINGULAR_FLOOR_REL = 1e-18

# e_signal above this fraction of e_pump voids the linear-response assumption;
# construction of DriveConfig only warns, it does not refuse.
LINEARITY_RATIO = 0.1


@dataclass(frozen=True)
class OptomechParams:
    """The five model rates, all in rad/us.

    g0       optomechanical coupling rate (>= 0)
    omega_m  mechanical angular frequency (> 0)
    kappa    cavity amplitude decay rate (> 0)
    gamma_m  mechanical damping rate (>= 0)
    delta_p  pump-cavity detuning omega_c - omega_p (signed)
    """

    g0: float
    omega_m: float
    kappa: float
    gamma_m: float
    delta_p: float

    def __post_init__(self):
        for name in ("g0", "omega_m", "kappa", "gamma_m", "delta_p"):
            v = getattr(self, name)
            if not math.isfinite(v):
                raise ValueError(f"{name} must be finite, got {v!r}")
        if self.omega_m <= 0:
            raise ValueError(f"omega_m must be > 0, got {self.omega_m!r}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be > 0, got {self.kappa!r}")
        if self.gamma_m < 0:
            raise ValueError(f"gamma_m must be >= 0, got {self.gamma_m!r}")
        if self.g0 < 0:
            raise ValueError(f"g0 must be >= 0, got {self.g0!r}")

    @property
    def resolved_sideband(self) -> bool:
        """True when the mechanical frequency exceeds the cavity linewidth."""
        return self.omega_m > self.kappa


@dataclass(frozen=True)
class DriveConfig:
    """Pump and signal drive amplitudes plus the signal-pump detuning.

    Amplitudes are real and non-negative by phase convention.
    """

    e_pump: float
    e_signal: float
    delta: float

    def __post_init__(self):
        if self.e_pump < 0:
            raise ValueError(f"e_pump must be >= 0, got {self.e_pump!r}")
        if self.e_signal < 0:
            raise ValueError(f"e_signal must be >= 0, got {self.e_signal!r}")
        if not math.isfinite(self.delta):
            raise ValueError(f"delta must be finite, got {self.delta!r}")
        if 0 < LINEARITY_RATIO * self.e_pump < self.e_signal:
            warnings.warn(
                "e_signal/e_pump = %.3g exceeds the linear-response ratio %.3g"
                % (self.e_signal / self.e_pump, LINEARITY_RATIO),
                stacklevel=2,
            )


@dataclass(frozen=True)
class SteadyState:
    """One root of the steady-state photon-number cubic.

    w0 is the mean intracavity photon number |b0|^2, q0 the static
    displacement g0*w0/omega_m.  ``branch`` is lower/middle/upper,
    ``stable`` the Jacobian-eigenvalue verdict, ``degenerate`` marks a
    merged double root.  ``e_pump`` records the drive that produced it.
    """

    w0: float
    b0: complex
    q0: float
    branch: str
    stable: bool
    e_pump: float
    degenerate: bool = False


def steady_effective_detuning(params: OptomechParams, steady: SteadyState) -> float:
    """delta_p shifted by the static radiation-pressure displacement."""
    return params.delta_p - params.g0 ** 2 * steady.w0 / params.omega_m


@dataclass(frozen=True)
class ResponsePoint:
    """Signal-beam linear response at a single detuning.

    eps_t = 2*kappa*b_plus/e_signal is the dimensionless transmission
    observable; power_response = |eps_t|^2.  ``singular`` flags points
    where the response denominator underflowed the floor.
    """

    delta: float
    delta_s: float
    b_plus: complex
    b_out_plus: complex
    eps_t: complex
    power_response: float
    singular: bool = False


@dataclass(frozen=True)
class Spectrum:
    """An ordered grid of response points sharing one steady-state branch."""

    params: OptomechParams
    drive: DriveConfig
    method: str
    points: tuple
    steady: SteadyState

    def __post_init__(self):
        ds = [p.delta_s for p in self.points]
        if any(b <= a for a, b in zip(ds, ds[1:])):
            raise ValueError("points must be strictly ordered by delta_s")

    @property
    def delta_s(self) -> np.ndarray:
        return np.array([p.delta_s for p in self.points])

    @property
    def power_response(self) -> np.ndarray:
        return np.array([p.power_response for p in self.points])


def eta(delta: float, params: OptomechParams) -> complex:
    """Mechanical susceptibility factor omega_m^2/(omega_m^2 - i*gamma_m*delta - delta^2)."""
    wm2 = params.omega_m ** 2
    den = wm2 - 1j * params.gamma_m * delta - delta * delta
    if den == 0:
        raise ZeroDivisionError(
            "mechanical susceptibility pole: gamma_m = 0 and |delta| = omega_m"
        )
    return wm2 / den


def drive_amplitude(power: float, kappa: float, carrier_angular_freq: float) -> float:
    """Convert optical power to a drive amplitude.

    power in W, kappa in rad/us, carrier_angular_freq in rad/s; the result
    is sqrt(2*P*kappa/(hbar*omega)) expressed in photon^(1/2) rad/us.
    """
    if power < 0:
        raise ValueError(f"power must be >= 0, got {power!r}")
    if carrier_angular_freq <= 0:
        raise ValueError(
            f"carrier_angular_freq must be > 0, got {carrier_angular_freq!r}"
        )
    kappa_si = kappa * 1e6  # rad/us -> rad/s
    rate_si = math.sqrt(2.0 * power * kappa_si / (const.hbar * carrier_angular_freq))
    return rate_si * 1e-6  # 1/s -> 1/us


def coupling_rate(
    cavity_angular_freq: float,
    cavity_length: float,
    effective_mass: float,
    omega_m: float,
) -> float:
    """Optomechanical coupling rate (omega_c/L)*sqrt(hbar/(m*omega_m)), all SI, in rad/s."""
    for name, v in (
        ("cavity_angular_freq", cavity_angular_freq),
        ("cavity_length", cavity_length),
        ("effective_mass", effective_mass),
        ("omega_m", omega_m),
    ):
        if v <= 0:
            raise ValueError(f"{name} must be > 0, got {v!r}")
    return (cavity_angular_freq / cavity_length) * math.sqrt(
        const.hbar / (effective_mass * omega_m)
    )


def _cubic_coeffs(params: OptomechParams, e_pump: float):
    """Coefficients of the photon-number cubic, highest power first."""
    g2 = params.g0 ** 2 / params.omega_m
    return (
        g2 * g2,
        -2.0 * g2 * params.delta_p,
        params.kappa ** 2 + params.delta_p ** 2,
        -e_pump * e_pump,
    )


def _field_at(params: OptomechParams, e_pump: float, w0: float) -> complex:
    dtil = params.delta_p - params.g0 ** 2 * w0 / params.omega_m
    return e_pump / (params.kappa + 1j * dtil)


def steady_state_roots(params: OptomechParams, e_pump: float) -> list:
    """All non-negative real roots of the photon-number cubic, ascending.

    Each root carries the complex field b0, the static displacement q0, a
    branch label and a stability verdict from the fluctuation Jacobian.
    Merged double roots are reported once with ``degenerate`` set.
    """
    from .oracles import jacobian_eigenvalues  # deferred: oracles imports this module

    if e_pump < 0:
        raise ValueError(f"e_pump must be >= 0, got {e_pump!r}")

    if e_pump == 0.0:
        w0s = [0.0]
        degen = [False]
    elif params.g0 == 0.0:
        w0s = [e_pump ** 2 / (params.kappa ** 2 + params.delta_p ** 2)]
        degen = [False]
    else:
        a, b, c, d = _cubic_coeffs(params, e_pump)
        raw = np.roots([a, b, c, d])
        scale = max(abs(raw).max(), 1.0)
        reals = sorted(r.real for r in raw if abs(r.imag) <= 1e-7 * scale)
        # one Newton polish step per root; raw companion-matrix roots lose
        # accuracy near double roots
        polished = []
        for w in reals:
            for _ in range(2):
                p = ((a * w + b) * w + c) * w + d
                dp = (3.0 * a * w + 2.0 * b) * w + c
                if dp != 0.0:
                    w -= p / dp
            if w >= -1e-9 * scale:
                polished.append(max(w, 0.0))
        w0s, degen = [], []
        for w in sorted(polished):
            if w0s and abs(w - w0s[-1]) <= 1e-6 * max(w, 1e-300):
                degen[-1] = True
            else:
                w0s.append(w)
                degen.append(False)

    labels = {1: ("lower",), 2: ("lower", "upper"), 3: ("lower", "middle", "upper")}
    out = []
    for w0, flag, label in zip(w0s, degen, labels[len(w0s)]):
        w0 = float(w0)
        probe = SteadyState(
            w0=w0,
            b0=_field_at(params, e_pump, w0),
            q0=params.g0 * w0 / params.omega_m,
            branch=label,
            stable=False,
            e_pump=e_pump,
            degenerate=flag,
        )
        eigs = jacobian_eigenvalues(params, probe)
        out.append(
            SteadyState(
                w0=w0,
                b0=probe.b0,
                q0=probe.q0,
                branch=label,
                stable=bool(max(e.real for e in eigs) < 0.0),
                e_pump=e_pump,
                degenerate=flag,
            )
        )
    return out


def select_branch(roots, policy: str = "lowest", previous: float | None = None) -> SteadyState:
    """Pick one root: 'lowest', 'highest', or 'continuation' (nearest previous w0)."""
    if not roots:
        raise ValueError("empty root list")
    if policy == "lowest":
        return min(roots, key=lambda s: s.w0)
    if policy == "highest":
        return max(roots, key=lambda s: s.w0)
    if policy == "continuation":
        if previous is None:
            raise ValueError("continuation policy needs the previous w0")
        return min(roots, key=lambda s: abs(s.w0 - previous))
    raise ValueError(f"unknown branch policy {policy!r}")


def f_denominator(delta: float, params: OptomechParams, w0: float) -> complex:
    """Response denominator f(delta).

    f = (kappa - i*delta)^2 omega_m^2 + [omega_m*delta_p - g0^2 w0 (eta+1)]^2
        - g0^4 eta^2 w0^2
    """
    if w0 < 0:
        raise ValueError(f"w0 must be >= 0, got {w0!r}")
    et = eta(delta, params)
    wm2 = params.omega_m ** 2
    g = params.g0 ** 2 * w0
    return (
        (params.kappa - 1j * delta) ** 2 * wm2
        + (params.omega_m * params.delta_p - g * (et + 1.0)) ** 2
        - (g * et) ** 2
    )


def b_plus_closed_form(
    delta: float,
    params: OptomechParams,
    w0: float,
    e_signal: float,
    floor: float = SINGULAR_FLOOR_REL,
) -> complex:
    """Closed-form signal-sideband amplitude.

    b_plus = E_s [(kappa - i*delta - i*delta_p) omega_m^2 + i g0^2 w0 (eta+1)] / f(delta)

    Note: the coupling term in this numerator carries one power of omega_m
    fewer than the numerator obtained from the linearized equations of
    motion; ``validate`` quantifies the discrepancy against the oracle.
    """
    if e_signal < 0:
        raise ValueError(f"e_signal must be >= 0, got {e_signal!r}")
    fval = f_denominator(delta, params, w0)
    if abs(fval) < floor * params.omega_m ** 2 * params.kappa ** 2:
        raise SingularResponseError(delta)
    et = eta(delta, params)
    num = (params.kappa - 1j * delta - 1j * params.delta_p) * params.omega_m ** 2
    num += 1j * params.g0 ** 2 * w0 * (et + 1.0)
    return e_signal * num / fval


def output_field(b_plus: complex, kappa: float) -> complex:
    """Input-output relation for the sideband: b_out_plus = sqrt(2*kappa)*b_plus."""
    if kappa <= 0:
        raise ValueError(f"kappa must be > 0, got {kappa!r}")
    return math.sqrt(2.0 * kappa) * b_plus


def response_eps(
    delta: float,
    params: OptomechParams,
    steady: SteadyState,
    e_signal: float,
    method: str = "closed_form",
    floor: float = SINGULAR_FLOOR_REL,
) -> ResponsePoint:
    """Assemble a ResponsePoint at one detuning with the requested method."""
    if e_signal <= 0:
        raise ValueError(f"e_signal must be > 0, got {e_signal!r}")
    if method == "closed_form":
        bp = b_plus_closed_form(delta, params, steady.w0, e_signal, floor=floor)
    elif method == "linearized":
        from .oracles import linearized_response

        bp, _, _ = linearized_response(delta, params, steady, e_signal, floor=floor)
    elif method == "time_domain":
        from .oracles import time_domain_response

        bp = time_domain_response(delta, params, steady, e_signal)
    else:
        raise ValueError(f"unknown method {method!r}")
    eps = 2.0 * params.kappa * bp / e_signal
    return ResponsePoint(
        delta=delta,
        delta_s=delta - params.delta_p,
        b_plus=bp,
        b_out_plus=output_field(bp, params.kappa),
        eps_t=eps,
        power_response=abs(eps) ** 2,
    )
