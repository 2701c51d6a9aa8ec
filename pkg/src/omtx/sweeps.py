"""Grid engines: response spectra, the transistor characteristic curve,
instability thresholds, and bistability maps."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import BracketError, SingularResponseError
from .model import (
    DriveConfig,
    OptomechParams,
    ResponsePoint,
    Spectrum,
    response_eps,
    select_branch,
    steady_state_roots,
)
from .oracles import jacobian_eigenvalues

_AXES = ("delta_s", "pump_amplitude", "pump_power")
_SCALES = ("linear", "logarithmic")
_METHODS = ("closed_form", "linearized", "time_domain")


@dataclass(frozen=True)
class SweepSpec:
    """One sweep axis: endpoints, point count, scale, evaluation method."""

    axis: str
    start: float
    stop: float
    count: int
    scale: str = "linear"
    method: str = "closed_form"
    branch_policy: str = "lowest"

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError(f"unknown axis {self.axis!r}")
        if self.scale not in _SCALES:
            raise ValueError(f"unknown scale {self.scale!r}")
        if self.method not in _METHODS:
            raise ValueError(f"unknown method {self.method!r}")
        if self.count < 2:
            raise ValueError(f"count must be >= 2, got {self.count!r}")
        if not self.start < self.stop:
            raise ValueError("start must be < stop")
        if self.scale == "logarithmic" and self.start <= 0:
            raise ValueError("logarithmic scale requires start > 0")

    def values(self) -> np.ndarray:
        if self.scale == "logarithmic":
            return np.geomspace(self.start, self.stop, self.count)
        return np.linspace(self.start, self.stop, self.count)


@dataclass(frozen=True)
class CharacteristicCurve:
    """Transistor curve: normalized signal gain vs. pump amplitude.

    gain[i] = |eps_T(delta_s=probe; pump[i])|^2 / |eps_T(delta_s=probe; pump[0])|^2,
    so the first (zero-pump) point is exactly 1.  Unstable points are
    flagged, never dropped.  ``threshold_estimate`` is the bisected pump
    amplitude where the leading eigenvalue crosses zero, when bracketed.
    """

    pump: np.ndarray
    w0: np.ndarray
    gain: np.ndarray
    stable: np.ndarray
    leading_eig_re: np.ndarray
    threshold_estimate: float | None
    probe_delta_s: float = 0.0


def _singular_point(delta: float, delta_p: float) -> ResponsePoint:
    nan = float("nan")
    return ResponsePoint(
        delta=delta,
        delta_s=delta - delta_p,
        b_plus=complex(nan, nan),
        b_out_plus=complex(nan, nan),
        eps_t=complex(nan, nan),
        power_response=nan,
        singular=True,
    )


def spectrum(
    params: OptomechParams,
    pump: float,
    e_signal: float,
    grid: SweepSpec,
    method: str | None = None,
    workers: int = 1,
) -> Spectrum:
    """Signal-response spectrum over a delta_s grid at fixed pump.

    The steady state is resolved once per the grid's branch policy; each
    delta_s maps to delta = delta_s + delta_p.  Singular points are flagged
    in place; the call fails only if every point is singular.  Output order
    matches the grid regardless of the worker count.
    """
    if grid.axis != "delta_s":
        raise ValueError(f"spectrum needs a delta_s grid, got axis {grid.axis!r}")
    method = method or grid.method
    steady = select_branch(steady_state_roots(params, pump), grid.branch_policy)

    def one(ds: float) -> ResponsePoint:
        delta = ds + params.delta_p
        try:
            return response_eps(delta, params, steady, e_signal, method)
        except SingularResponseError:
            return _singular_point(delta, params.delta_p)

    values = grid.values()
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            points = tuple(pool.map(one, values))
    else:
        points = tuple(one(ds) for ds in values)

    if all(p.singular for p in points):
        raise SingularResponseError(None, "all spectrum points are singular")
    drive = DriveConfig(e_pump=pump, e_signal=e_signal, delta=0.0)
    return Spectrum(params=params, drive=drive, method=method, points=points, steady=steady)


def _leading_real(params: OptomechParams, steady) -> float:
    return float(jacobian_eigenvalues(params, steady)[0].real)


def _peak_power_response(params, steady, e_signal, method) -> float:
    """Maximum of |eps_T|^2 over delta for one pumped steady state.

    Candidate peak centers come from the fluctuation eigenvalues: a mode
    lambda contributes a response pole at delta = -Im(lambda), so the peak
    sits there up to the slow numerator variation.  Each candidate gets a
    narrow bounded refinement.
    """
    from scipy.optimize import minimize_scalar

    eigs = jacobian_eigenvalues(params, steady)
    centers = {params.delta_p}
    for ev in eigs:
        centers.add(-float(ev.imag))
    half_width = max(params.gamma_m, params.kappa) / 2.0

    def power_at(delta: float) -> float:
        try:
            return response_eps(delta, params, steady, e_signal, method).power_response
        except SingularResponseError:
            return float("inf")

    best = 0.0
    for center in centers:
        res = minimize_scalar(
            lambda d: -power_at(d),
            bounds=(center - half_width, center + half_width),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = max(best, power_at(center), -float(res.fun))
    return best


def transistor_curve(
    params: OptomechParams,
    pump_grid: SweepSpec,
    e_signal: float,
    probe_at=0.0,
    method: str = "linearized",
) -> CharacteristicCurve:
    """Normalized gain vs. pump amplitude.

    ``probe_at`` is either a fixed delta_s (default 0) or the string
    ``"peak"``, which tracks the response maximum over delta per pump point
    (the divergence point drifts with the optical spring, so a fixed probe
    saturates near threshold while the tracked peak diverges).  A
    pump_power axis is interpreted as E_p^2 (model-native power); the first
    grid point must be zero or near-zero so the normalization anchors the
    curve at gain = 1.
    """
    if pump_grid.axis not in ("pump_amplitude", "pump_power"):
        raise ValueError(f"transistor_curve needs a pump grid, got {pump_grid.axis!r}")
    values = pump_grid.values()
    pumps = np.sqrt(values) if pump_grid.axis == "pump_power" else values

    track_peak = probe_at == "peak"
    delta = params.delta_p if track_peak else float(probe_at) + params.delta_p
    w0s, powers, stable, leading = [], [], [], []
    prev = None
    for p in pumps:
        roots = steady_state_roots(params, float(p))
        if pump_grid.branch_policy == "continuation" and prev is not None:
            steady = select_branch(roots, "continuation", previous=prev)
        else:
            steady = select_branch(
                roots,
                "lowest" if pump_grid.branch_policy == "continuation" else pump_grid.branch_policy,
            )
        prev = steady.w0
        w0s.append(steady.w0)
        stable.append(steady.stable)
        leading.append(_leading_real(params, steady))
        try:
            if track_peak:
                powers.append(_peak_power_response(params, steady, e_signal, method))
            else:
                pt = response_eps(delta, params, steady, e_signal, method)
                powers.append(pt.power_response)
        except SingularResponseError:
            powers.append(float("nan"))

    powers = np.array(powers)
    gain = powers / powers[0]
    threshold = None
    for i in range(len(pumps) - 1):
        if leading[i] < 0.0 <= leading[i + 1]:
            threshold = instability_threshold(
                params, (float(pumps[i]), float(pumps[i + 1]))
            )
            break
    return CharacteristicCurve(
        pump=np.asarray(pumps, dtype=float),
        w0=np.array(w0s),
        gain=gain,
        stable=np.array(stable, dtype=bool),
        leading_eig_re=np.array(leading),
        threshold_estimate=threshold,
        probe_delta_s=float("nan") if track_peak else float(probe_at),
    )


def instability_threshold(
    params: OptomechParams, pump_bracket, rel_tol: float = 1e-6
) -> float:
    """Bisect the pump amplitude where the leading eigenvalue crosses zero."""
    lo, hi = float(pump_bracket[0]), float(pump_bracket[1])
    if not lo < hi:
        raise ValueError("bracket must satisfy low < high")

    def leading(p: float) -> float:
        steady = select_branch(steady_state_roots(params, p), "lowest")
        return _leading_real(params, steady)

    f_lo, f_hi = leading(lo), leading(hi)
    if not (f_lo < 0.0 < f_hi):
        raise BracketError(
            f"leading eigenvalue does not change sign on [{lo:g}, {hi:g}] "
            f"(values {f_lo:g}, {f_hi:g})"
        )
    while hi - lo > rel_tol * hi:
        mid = 0.5 * (lo + hi)
        if leading(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class BistabilityMap:
    """Root counts of the photon-number cubic over a (delta_p, pump) grid."""

    delta_p: np.ndarray
    pump: np.ndarray
    root_count: np.ndarray  # shape (len(delta_p), len(pump))
    stable_count: np.ndarray


def bistability_map(params: OptomechParams, pump_grid, delta_p_grid) -> BistabilityMap:
    """Count positive real roots (and stable ones) per (delta_p, pump) cell.

    Grids may be SweepSpec instances or plain value arrays.
    """
    pumps = pump_grid.values() if isinstance(pump_grid, SweepSpec) else np.asarray(pump_grid, float)
    dps = (
        delta_p_grid.values()
        if isinstance(delta_p_grid, SweepSpec)
        else np.asarray(delta_p_grid, float)
    )
    counts = np.zeros((len(dps), len(pumps)), dtype=int)
    stables = np.zeros_like(counts)
    for i, dp in enumerate(dps):
        p_i = replace(params, delta_p=float(dp))
        for j, ep in enumerate(pumps):
            roots = steady_state_roots(p_i, float(ep))
            counts[i, j] = len(roots)
            stables[i, j] = sum(1 for r in roots if r.stable)
    return BistabilityMap(delta_p=dps, pump=pumps, root_count=counts, stable_count=stables)
