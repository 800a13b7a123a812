"""Time integration of the power-of-curvature contracting flow.

In support-function form the unnormalized flow is ds/dt = -(s'' + s)^(-alpha)
and the rescaled (self-similar) flow is ds/dtau = -(s'' + s)^(-alpha) + s.
Both are stepped with the classical 4-stage Runge-Kutta scheme under an
explicit parabolic step bound; convexity failures reject the step rather
than projecting the state back.
"""

from __future__ import annotations

import csv
import enum
import json
import math
import os
from dataclasses import dataclass, field

import numpy as np

from gcsf.geometry import (
    ConvexityLostError,
    SupportFunction,
    curvature_radius_samples,
    mode_amplitude,
    recenter,
)

#: Steps are rejected and halved at most this many times before giving up.
MAX_STEP_HALVINGS = 60


class StepRejectedError(RuntimeError):
    """A trial step produced a nonconvex state; the caller should shrink dt."""


class StopReason(str, enum.Enum):
    EXTINCT = "extinct"
    CONVEXITY_LOST = "convexity_lost"
    TIME_LIMIT = "time_limit"


@dataclass(frozen=True)
class FlowParams:
    """Parameters shared by every flow solver.

    alpha is the curvature power.  sigma is carried along for the soliton
    experiments; the curve flow itself always runs at sigma = 0.
    """

    alpha: float
    sigma: float = 0.0
    cfl: float = 0.2
    stop_inradius: float = 1e-3
    m: int = 256

    def __post_init__(self) -> None:
        if self.alpha <= 0.0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not 0.0 <= self.sigma <= 1.0:
            raise ValueError(f"sigma must lie in [0, 1], got {self.sigma}")
        if not 0.0 < self.cfl <= 1.0:
            raise ValueError(f"cfl must lie in (0, 1], got {self.cfl}")
        if self.stop_inradius <= 0.0:
            raise ValueError(f"stop_inradius must be positive, got {self.stop_inradius}")
        if self.m < 64 or self.m % 2 != 0:
            raise ValueError(f"grid size must be even and >= 64, got {self.m}")


@dataclass
class FlowTrace:
    """Snapshots of one flow run; times are strictly increasing."""

    times: np.ndarray
    states: list[SupportFunction]
    areas: np.ndarray
    lengths: np.ndarray
    extinction_time: float | None
    stop_reason: StopReason


@dataclass(frozen=True)
class RateFit:
    """Least-squares line through (tau, log delta) over a tau window."""

    rate: float
    intercept: float
    residual_rms: float
    window: tuple[float, float]


def rhs_unnormalized(s: SupportFunction, p: FlowParams) -> np.ndarray:
    """Speed -(s'' + s)^(-alpha) of the contracting flow."""
    return _rhs_array(s.samples, p.alpha, normalized=False)


def rhs_normalized(s: SupportFunction, p: FlowParams) -> np.ndarray:
    """Speed of the rescaled flow, -(s'' + s)^(-alpha) + s."""
    return _rhs_array(s.samples, p.alpha, normalized=True)


def stable_dt(s: SupportFunction, p: FlowParams) -> float:
    """Parabolic step bound cfl * dtheta^2 / max(alpha * (s''+s)^-(alpha+1)).

    The linearized diffusivity of the flow is alpha * r^-(alpha+1); an
    explicit scheme must resolve it on the angular grid scale.
    """
    radius = curvature_radius_samples(s.samples)
    if np.min(radius) <= 0.0:
        raise ConvexityLostError("state is not convex")
    dtheta = 2.0 * np.pi / s.m
    return p.cfl * dtheta**2 * float(np.min(radius)) ** (p.alpha + 1.0) / p.alpha


def step(s: SupportFunction, p: FlowParams, dt: float, rhs=rhs_unnormalized) -> SupportFunction:
    """One classical Runge-Kutta step of the chosen right-hand side.

    dt = 0 returns the state unchanged.  A step whose stages or result leave
    the convex cone raises StepRejectedError; the caller is expected to halve
    dt and retry.
    """
    if dt < 0.0:
        raise ValueError(f"dt must be nonnegative, got {dt}")
    if dt == 0.0:
        return s
    normalized = rhs is rhs_normalized
    if rhs is rhs_unnormalized or rhs is rhs_normalized:
        try:
            y, _ = _rk4_flow_step(s.samples, None, p.alpha, dt, normalized)
            return SupportFunction(y)
        except (_StageFailure, ConvexityLostError) as exc:
            raise StepRejectedError(f"step of size {dt:.3e} left the convex cone") from exc
    # Generic callable: stages build full support functions, so convexity
    # failures surface as ConvexityLostError from the constructor.
    try:
        k1 = rhs(s, p)
        s2 = SupportFunction(s.samples + 0.5 * dt * k1)
        k2 = rhs(s2, p)
        s3 = SupportFunction(s.samples + 0.5 * dt * k2)
        k3 = rhs(s3, p)
        s4 = SupportFunction(s.samples + dt * k3)
        k4 = rhs(s4, p)
        return SupportFunction(s.samples + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
    except ConvexityLostError as exc:
        raise StepRejectedError(f"step of size {dt:.3e} left the convex cone") from exc


class _StageFailure(Exception):
    pass


def _rhs_array(y: np.ndarray, alpha: float, normalized: bool) -> np.ndarray:
    radius = curvature_radius_samples(y)
    if np.min(radius) <= 0.0:
        raise _StageFailure
    out = -np.power(radius, -alpha)
    if normalized:
        out = out + y
    return out


def _rk4_flow_step(y, radius, alpha, dt, normalized):
    """Array-level RK4 step; returns (y_new, radius_new).

    radius may carry the precomputed curvature radius of y to save one
    transform; pass None to compute it here.
    """
    if radius is None:
        radius = curvature_radius_samples(y)
        if np.min(radius) <= 0.0:
            raise _StageFailure
    k1 = -np.power(radius, -alpha)
    if normalized:
        k1 = k1 + y
    k2 = _rhs_array(y + 0.5 * dt * k1, alpha, normalized)
    k3 = _rhs_array(y + 0.5 * dt * k2, alpha, normalized)
    k4 = _rhs_array(y + dt * k3, alpha, normalized)
    y_new = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    radius_new = curvature_radius_samples(y_new)
    if np.min(radius_new) <= 0.0:
        raise _StageFailure
    return y_new, radius_new


def _trig_tables(m: int) -> tuple[np.ndarray, np.ndarray]:
    theta = np.arange(m) * (2.0 * np.pi / m)
    return np.cos(theta), np.sin(theta)


def _inradius_array(y: np.ndarray, cos_t: np.ndarray, sin_t: np.ndarray) -> float:
    # Distance from the Steiner point to the nearest supporting line.
    w = 2.0 / y.size
    px = w * float(np.dot(y, cos_t))
    py = w * float(np.dot(y, sin_t))
    return float(np.min(y - px * cos_t - py * sin_t))


def _area_array(y: np.ndarray) -> float:
    from gcsf.geometry import trig_derivative

    ds = trig_derivative(y, 1)
    return 0.5 * (2.0 * np.pi / y.size) * float(np.sum(y**2 - ds**2))


def default_time_limit(s: SupportFunction, p: FlowParams) -> float:
    """Safe horizon: the circumscribed disc is extinct by R^(1+a)/(1+a)."""
    from gcsf.geometry import circumradius

    return 1.05 * circumradius(s) ** (1.0 + p.alpha) / (1.0 + p.alpha)


def run_to_extinction(
    s0: SupportFunction,
    p: FlowParams,
    t_max: float | None = None,
    store_every: int = 8,
) -> FlowTrace:
    """March the unnormalized flow until the body is numerically extinct.

    The step size tracks the parabolic bound and is halved on rejection.
    Integration stops once the inradius drops below p.stop_inradius
    (stop_reason extinct), at t_max (time_limit), or when no acceptable
    step exists (convexity_lost).  Every store_every-th accepted step is
    recorded, plus the final state.

    On extinction the extinction time is estimated by fitting
    inradius^(1+alpha), which is linear in t for shrinking circles, over
    the last decade of the trace and extrapolating to zero.
    """
    if s0.m != p.m:
        raise ValueError(f"state grid {s0.m} does not match params grid {p.m}")
    if store_every < 1:
        raise ValueError(f"store_every must be >= 1, got {store_every}")
    if t_max is None:
        t_max = default_time_limit(s0, p)

    cos_t, sin_t = _trig_tables(s0.m)
    dtheta2 = (2.0 * np.pi / s0.m) ** 2

    y = np.array(s0.samples, dtype=float)
    radius = curvature_radius_samples(y)
    t = 0.0
    stored_t: list[float] = [0.0]
    stored_y: list[np.ndarray] = [y.copy()]
    stored_inr: list[float] = [_inradius_array(y, cos_t, sin_t)]
    accepted = 0
    stop = StopReason.TIME_LIMIT

    def snapshot() -> None:
        stored_t.append(t)
        stored_y.append(y.copy())
        stored_inr.append(_inradius_array(y, cos_t, sin_t))

    while True:
        if _inradius_array(y, cos_t, sin_t) < p.stop_inradius:
            stop = StopReason.EXTINCT
            break
        if t >= t_max:
            stop = StopReason.TIME_LIMIT
            break
        dt = p.cfl * dtheta2 * float(np.min(radius)) ** (p.alpha + 1.0) / p.alpha
        dt = min(dt, t_max - t)
        for _ in range(MAX_STEP_HALVINGS):
            try:
                y_new, radius_new = _rk4_flow_step(y, radius, p.alpha, dt, False)
                break
            except _StageFailure:
                dt *= 0.5
        else:
            stop = StopReason.CONVEXITY_LOST
            break
        y, radius = y_new, radius_new
        t += dt
        accepted += 1
        if accepted % store_every == 0:
            snapshot()

    if stored_t[-1] != t:
        snapshot()

    times = np.array(stored_t)
    states = [SupportFunction(arr) for arr in stored_y]
    areas = np.array([_area_array(arr) for arr in stored_y])
    lengths = np.array([(2.0 * np.pi / s0.m) * float(np.sum(arr)) for arr in stored_y])

    extinction = None
    if stop is StopReason.EXTINCT:
        extinction = extrapolate_extinction(times, np.array(stored_inr), p)
    return FlowTrace(times, states, areas, lengths, extinction, stop)


def extrapolate_extinction(times: np.ndarray, inradii: np.ndarray, p: FlowParams) -> float:
    """Fit inradius^(1+alpha) linearly in t over the trace tail, solve for zero."""
    if times.size < 2:
        return float(times[-1])
    tail = inradii <= 10.0 * p.stop_inradius
    if np.count_nonzero(tail) < 5:
        tail = np.zeros_like(tail)
        tail[-min(5, times.size):] = True
    z = inradii[tail] ** (1.0 + p.alpha)
    slope, offset = np.polyfit(times[tail], z, 1)
    if slope >= 0.0:
        return float(times[-1])
    return float(-offset / slope)


def run_normalized(
    s0: SupportFunction,
    p: FlowParams,
    tau_end: float,
    store_every: int = 8,
) -> tuple[np.ndarray, list[SupportFunction]]:
    """Integrate the rescaled flow to tau_end, recording every store_every-th step."""
    if s0.m != p.m:
        raise ValueError(f"state grid {s0.m} does not match params grid {p.m}")
    if tau_end < 0.0:
        raise ValueError(f"tau_end must be nonnegative, got {tau_end}")
    dtheta2 = (2.0 * np.pi / s0.m) ** 2

    y = np.array(s0.samples, dtype=float)
    radius = curvature_radius_samples(y)
    tau = 0.0
    stored_t = [0.0]
    stored_y = [y.copy()]
    accepted = 0

    while tau < tau_end:
        dt = p.cfl * dtheta2 * float(np.min(radius)) ** (p.alpha + 1.0) / p.alpha
        dt = min(dt, tau_end - tau)
        for _ in range(MAX_STEP_HALVINGS):
            try:
                y_new, radius_new = _rk4_flow_step(y, radius, p.alpha, dt, True)
                break
            except _StageFailure:
                dt *= 0.5
        else:
            raise ConvexityLostError(f"rescaled flow lost convexity at tau = {tau:.6f}")
        y, radius = y_new, radius_new
        tau += dt
        accepted += 1
        if accepted % store_every == 0 or tau >= tau_end:
            stored_t.append(tau)
            stored_y.append(y.copy())

    return np.array(stored_t), [SupportFunction(arr) for arr in stored_y]


def normalize_trace(trace: FlowTrace, p: FlowParams) -> list[tuple[float, SupportFunction]]:
    """Rescale a contracting trace onto the self-similar time scale.

    Each state is recentred at its Steiner point, then magnified by
    ((1+alpha)(T - t))^(-1/(1+alpha)) with T the extrapolated extinction
    time; tau = -log((1+alpha)(T - t)) / (1+alpha).  Shrinking circles map
    to the unit circle at every tau.
    """
    if trace.extinction_time is None:
        raise ValueError("trace has no extinction time; run further or check stop_reason")
    a1 = 1.0 + p.alpha
    out: list[tuple[float, SupportFunction]] = []
    for t, state in zip(trace.times, trace.states):
        remaining = a1 * (trace.extinction_time - float(t))
        if remaining <= 0.0:
            continue
        tau = -math.log(remaining) / a1
        factor = remaining ** (-1.0 / a1)
        out.append((tau, SupportFunction(recenter(state).samples * factor)))
    return out


def normalized_delta_series(trace: FlowTrace, p: FlowParams) -> np.ndarray:
    """Pairs (tau, sup distance of the rescaled state to the unit circle)."""
    from gcsf.geometry import hausdorff_to_circle

    rows = [
        (tau, hausdorff_to_circle(state, (0.0, 0.0), 1.0))
        for tau, state in normalize_trace(trace, p)
    ]
    return np.array(rows)


def linearized_mode_rate(alpha: float, mode: int) -> float:
    """Decay rate 1 + alpha(1 - mode^2) of one harmonic of the rescaled flow.

    Translations (mode 1) are neutral; the leading shape mode cos(2 theta)
    decays at 1 - 3 alpha, negative exactly when alpha > 1/3.
    """
    if alpha <= 0.0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    if mode < 0 or mode != int(mode):
        raise ValueError(f"mode must be a nonnegative integer, got {mode}")
    return 1.0 + alpha * (1.0 - float(mode) ** 2)


def fit_decay_rate(series, window: tuple[float, float]) -> RateFit:
    """Least-squares slope of log delta against tau inside the window.

    series is an (n, 2) array of (tau, delta) pairs; at least five points
    must fall inside the window and their deltas must be positive.
    """
    arr = np.asarray(series, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("series must be an (n, 2) array of (tau, delta) pairs")
    lo, hi = float(window[0]), float(window[1])
    mask = (arr[:, 0] >= lo) & (arr[:, 0] <= hi)
    if np.count_nonzero(mask) < 5:
        raise ValueError(f"need at least 5 points in window [{lo}, {hi}], "
                         f"got {np.count_nonzero(mask)}")
    taus = arr[mask, 0]
    deltas = arr[mask, 1]
    if np.min(deltas) <= 0.0:
        raise ValueError("deltas must be positive inside the fit window")
    logs = np.log(deltas)
    rate, intercept = np.polyfit(taus, logs, 1)
    resid = logs - (rate * taus + intercept)
    return RateFit(float(rate), float(intercept), float(np.sqrt(np.mean(resid**2))),
                   (lo, hi))


def mode_decay_series(
    alpha: float,
    mode: int = 2,
    eps: float = 1e-3,
    tau_end: float = 3.5,
    m: int = 256,
    cfl: float = 0.2,
    store_every: int = 8,
) -> np.ndarray:
    """Amplitude of one harmonic along the rescaled flow started from
    the unit circle plus eps*cos(mode*theta); rows are (tau, amplitude)."""
    theta = np.arange(m) * (2.0 * np.pi / m)
    s0 = SupportFunction(1.0 + eps * np.cos(mode * theta))
    p = FlowParams(alpha=alpha, cfl=cfl, m=m)
    taus, states = run_normalized(s0, p, tau_end, store_every=store_every)
    amps = np.array([mode_amplitude(state, mode) for state in states])
    return np.column_stack([taus, amps])


def curvature_integral(s: SupportFunction, alpha: float) -> float:
    """Total alpha-power of curvature over arc length, integral of kappa^alpha dxi.

    In support form dxi = (s''+s) dtheta and kappa = 1/(s''+s).
    """
    radius = curvature_radius_samples(s.samples)
    if np.min(radius) <= 0.0:
        raise ConvexityLostError("state is not convex")
    kappa = 1.0 / radius
    return (2.0 * np.pi / s.m) * float(np.sum(np.power(kappa, alpha) * radius))


def area_defect(times, areas, integrals, interior: float = 1.0) -> float:
    """Worst defect |dA/dt + integral| on a stored series.

    dA/dt is formed by centered differencing of the areas on the
    (generally nonuniform) sample times; integrals holds the matching
    quadrature values of kappa^(alpha-1) dtheta.  Split out so the same
    arithmetic runs on a live trace and on re-read CSV columns.

    interior < 1 drops rows past that fraction of the final time.  Near
    extinction the adaptive step collapses and consecutive areas differ
    at the roundoff floor, so differencing there measures noise.
    """
    if not 0.0 < interior <= 1.0:
        raise ValueError(f"interior fraction must lie in (0, 1], got {interior}")
    times = np.asarray(times, dtype=float)
    areas = np.asarray(areas, dtype=float)
    integrals = np.asarray(integrals, dtype=float)
    n = times.size
    if n < 3:
        raise ValueError("need at least 3 samples")
    if areas.size != n or integrals.size != n:
        raise ValueError("series must share one length")
    if interior < 1.0:
        cut = int(np.searchsorted(times, interior * times[-1], side="right"))
        n = max(cut, 3)
    worst = 0.0
    for i in range(1, n - 1):
        h1 = float(times[i] - times[i - 1])
        h2 = float(times[i + 1] - times[i])
        a_prev, a_mid, a_next = float(areas[i - 1]), float(areas[i]), float(areas[i + 1])
        dadt = (-h2 / (h1 * (h1 + h2)) * a_prev
                + (h2 - h1) / (h1 * h2) * a_mid
                + h1 / (h2 * (h1 + h2)) * a_next)
        worst = max(worst, abs(dadt + float(integrals[i])))
    return worst


def area_rate_check(trace: FlowTrace, p: FlowParams, interior: float = 0.9) -> float:
    """Max defect of the area identity dA/dt = -integral of kappa^(alpha-1) dtheta.

    The quadrature side is evaluated on each interior snapshot state; in
    support form kappa^(alpha-1) dtheta = kappa^alpha dxi, the arc-length
    integral computed by curvature_integral.
    """
    integrals = [curvature_integral(state, p.alpha) for state in trace.states]
    return area_defect(trace.times, trace.areas, integrals, interior=interior)


def jensen_bound_check(s: SupportFunction, p: FlowParams) -> tuple[float, float]:
    """Pair (integral of kappa^alpha dxi, L^(1-alpha) (2 pi)^alpha).

    The first dominates the second for alpha >= 1 by the power mean
    inequality with respect to arc length; alpha < 1 is rejected.
    """
    if p.alpha < 1.0:
        raise ValueError(f"bound requires alpha >= 1, got {p.alpha}")
    from gcsf.geometry import length

    lhs = curvature_integral(s, p.alpha)
    rhs = length(s) ** (1.0 - p.alpha) * (2.0 * np.pi) ** p.alpha
    return lhs, rhs


# -- trace exports ----------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x))


def trace_summary_rows(trace: FlowTrace) -> list[dict]:
    """Per-snapshot diagnostics used by the CSV export and the CLI checks."""
    from gcsf.geometry import circumradius, inradius

    rows = []
    for t, state, a, l in zip(trace.times, trace.states, trace.areas, trace.lengths):
        rec = recenter(state)
        mean_radius = float(np.mean(rec.samples))
        delta = float(np.max(np.abs(rec.samples - mean_radius))) / mean_radius
        rows.append({
            "t": float(t),
            "area": float(a),
            "length": float(l),
            "inradius": inradius(state),
            "circumradius": circumradius(state),
            "delta_to_circle": delta,
        })
    return rows


def write_trace_csv(trace: FlowTrace, path) -> None:
    """Plot-ready series: t, area, length, inradius, circumradius and the
    relative sup distance of the recentred state to its mean circle."""
    rows = trace_summary_rows(trace)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["t", "area", "length", "inradius", "circumradius",
                         "delta_to_circle"])
        for row in rows:
            writer.writerow([_fmt(row[k]) for k in
                             ("t", "area", "length", "inradius", "circumradius",
                              "delta_to_circle")])


def write_trace_snapshots(trace: FlowTrace, directory, every: int = 1) -> list[str]:
    """Dump states as JSON support functions named by zero-padded snapshot index."""
    from gcsf.geometry import support_to_json

    os.makedirs(directory, exist_ok=True)
    written = []
    for i, state in enumerate(trace.states):
        if i % every != 0 and i != len(trace.states) - 1:
            continue
        name = f"{i:06d}.json"
        with open(os.path.join(directory, name), "w") as f:
            f.write(support_to_json(state))
        written.append(name)
    return written


def write_flow_manifest(trace: FlowTrace, p: FlowParams, path) -> None:
    payload = {
        "alpha": p.alpha,
        "sigma": p.sigma,
        "m": p.m,
        "cfl": p.cfl,
        "stop_inradius": p.stop_inradius,
        "extinction_time": trace.extinction_time,
        "stop_reason": trace.stop_reason.value,
    }
    with open(path, "w") as f:
        json.dump(payload, f, indent=2)
        f.write("\n")
