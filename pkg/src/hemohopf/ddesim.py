"""Direct integration of the delay equation and orbit diagnostics.

Fixed-step classical Runge-Kutta marching in steps of h = r / steps_per_delay,
so the grid is aligned with the delay: delayed values at whole steps land
on stored nodes, and only the half-step stage times require interpolation,
done with cubic Hermite polynomials through the stored (x, x') pairs.
During the first delay interval the delayed state comes straight from the
history function.

The diagnostics quantify what the trajectories show: decay onto the
positive equilibrium on the stable side of the Hopf point versus a
sustained limit cycle on the unstable side, with amplitude and period
estimates robust to the grid via parabolic refinement of the extrema.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import BlowUpError, InconclusiveError, ParameterError
from .hopf import HopfPoint
from .model import ModelParameters, equilibria

__all__ = [
    "HistoryFunction",
    "Trajectory",
    "OrbitMetrics",
    "default_history",
    "constant_history",
    "integrate",
    "orbit_metrics",
    "amplitude_scaling",
    "write_trajectory_csv",
]

#: Half peak-to-trough amplitudes below this classify as equilibrium.
AMPLITUDE_FLOOR = 1e-4

#: Relative spread of successive peak heights tolerated for a cycle.
CYCLE_SPREAD_TOL = 0.05

KIND_EQUILIBRIUM = "equilibrium"
KIND_CYCLE = "cycle"
KIND_UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class HistoryFunction:
    """Initial segment of the solution on [-r, 0]."""

    evaluator: Callable[[float], float]
    description: str = ""


def default_history(r: float) -> HistoryFunction:
    """The reference initial condition phi(s) = cos(pi s / (2 r))."""
    if r <= 0.0:
        raise ParameterError(f"history needs r > 0, got {r}")
    half_pi_over_r = math.pi / (2.0 * r)
    return HistoryFunction(
        evaluator=lambda s: math.cos(half_pi_over_r * s),
        description="cos(pi s / (2 r))",
    )


def constant_history(value: float) -> HistoryFunction:
    """History identically equal to `value`."""
    return HistoryFunction(evaluator=lambda s: value, description=f"constant {value}")


@dataclass(frozen=True)
class Trajectory:
    """Dense simulation output on the aligned grid starting at t = 0.

    ``dx`` stores the right-hand side at the accepted nodes, which makes
    the stored data a C^1 cubic Hermite interpolant of the solution.
    """

    t: np.ndarray
    x: np.ndarray
    dx: np.ndarray
    step: float
    params: ModelParameters

    def at(self, time: float) -> float:
        """Cubic Hermite evaluation at an arbitrary time in [0, t[-1]]."""
        t, x, dx, h = self.t, self.x, self.dx, self.step
        if not t[0] <= time <= t[-1]:
            raise ParameterError(f"time {time} outside [{t[0]}, {t[-1]}]")
        j = min(int(time / h), len(t) - 2)
        s = (time - t[j]) / h
        h00 = (1.0 + 2.0 * s) * (1.0 - s) ** 2
        h10 = s * (1.0 - s) ** 2
        h01 = s * s * (3.0 - 2.0 * s)
        h11 = s * s * (s - 1.0)
        return h00 * x[j] + h10 * h * dx[j] + h01 * x[j + 1] + h11 * h * dx[j + 1]


@dataclass(frozen=True)
class OrbitMetrics:
    """Classification of the tail of a trajectory.

    kind = cycle requires the half peak-to-trough amplitude to exceed
    AMPLITUDE_FLOOR and successive peak heights to agree within
    CYCLE_SPREAD_TOL; kind = equilibrium covers both near-constant tails
    and oscillations with a monotone-decaying envelope.
    """

    kind: str
    amplitude: float
    period: Optional[float]
    distance_to_x2: float


def integrate(
    params: ModelParameters,
    history: HistoryFunction,
    t_end: float,
    steps_per_delay: int = 200,
) -> Trajectory:
    """Integrate the delay equation from `history` up to (at least) t_end.

    Classical fourth-order Runge-Kutta with fixed step h = r / steps_per_delay.
    Delayed states at whole steps are stored nodes; half-step stage values
    are cubic Hermite midpoints of the bracketing cell.  Raises
    :class:`BlowUpError` if the state leaves the finite range.
    """
    r = params.r
    if r <= 0.0:
        raise ParameterError(f"integration requires r > 0, got {r}")
    if steps_per_delay < 1:
        raise ParameterError(f"steps_per_delay must be >= 1, got {steps_per_delay}")
    if t_end <= 0.0:
        raise ParameterError(f"t_end must be positive, got {t_end}")

    beta0, n, delta, k = params.beta0, params.n, params.delta, params.k
    kb0 = k * beta0
    m = steps_per_delay
    h = r / m
    n_steps = int(math.ceil(t_end / h - 1e-9))
    phi = history.evaluator

    def rhs(x: float, xd: float) -> float:
        xn = x**n if x > 0.0 else 0.0
        xdn = xd**n if xd > 0.0 else 0.0
        return -(beta0 / (1.0 + xn) + delta) * x + kb0 * xd / (1.0 + xdn)

    xs = [float(phi(0.0))]
    dxs = [rhs(xs[0], float(phi(-r)))]
    if not math.isfinite(xs[0]) or not math.isfinite(dxs[0]):
        raise BlowUpError("non-finite state at t = 0", time=0.0)

    for i in range(n_steps):
        xi = xs[i]
        j = i - m  # whole-step delayed index; negative means history
        d_start = xs[j] if j >= 0 else phi(j * h)
        if j >= 0:
            # Hermite midpoint of cell [j, j+1]
            d_mid = 0.5 * (xs[j] + xs[j + 1]) + 0.125 * h * (dxs[j] - dxs[j + 1])
        else:
            d_mid = phi((j + 0.5) * h)
        d_end = xs[j + 1] if j + 1 >= 0 else phi((j + 1) * h)

        k1 = rhs(xi, d_start)
        k2 = rhs(xi + 0.5 * h * k1, d_mid)
        k3 = rhs(xi + 0.5 * h * k2, d_mid)
        k4 = rhs(xi + h * k3, d_end)
        x_new = xi + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(x_new) or abs(x_new) > 1e100:
            raise BlowUpError(
                f"state blew up at t = {(i + 1) * h}", time=(i + 1) * h
            )
        xs.append(x_new)
        dxs.append(rhs(x_new, d_end))

    t = np.arange(n_steps + 1, dtype=float) * h
    return Trajectory(
        t=t, x=np.asarray(xs), dx=np.asarray(dxs), step=h, params=params
    )


def _refined_extrema(t: np.ndarray, x: np.ndarray):
    """Local maxima and minima with parabolic refinement of (time, height)."""
    h = t[1] - t[0] if len(t) > 1 else 0.0
    maxima, minima = [], []
    for i in range(1, len(x) - 1):
        is_max = x[i] > x[i - 1] and x[i] >= x[i + 1]
        is_min = x[i] < x[i - 1] and x[i] <= x[i + 1]
        if not (is_max or is_min):
            continue
        d2 = x[i - 1] - 2.0 * x[i] + x[i + 1]
        if d2 != 0.0:
            off = 0.5 * (x[i - 1] - x[i + 1]) / d2
            t_ref = t[i] + off * h
            x_ref = x[i] - 0.125 * (x[i - 1] - x[i + 1]) ** 2 / d2
        else:
            t_ref, x_ref = t[i], x[i]
        (maxima if is_max else minima).append((t_ref, x_ref))
    return maxima, minima


def orbit_metrics(traj: Trajectory, transient_fraction: float = 0.5) -> OrbitMetrics:
    """Classify the trajectory tail after discarding the transient.

    The first `transient_fraction` of the time span is dropped; the rest
    is searched for local extrema.  Too few extrema with a small range
    means equilibrium; many extrema of near-equal height mean a cycle;
    a shrinking envelope means decay to equilibrium; anything else is
    undetermined.
    """
    if not 0.0 < transient_fraction < 1.0:
        raise ParameterError(
            f"transient_fraction must be in (0, 1), got {transient_fraction}"
        )
    t, x = traj.t, traj.x
    start = np.searchsorted(t, transient_fraction * t[-1])
    tt, xx = t[start:], x[start:]

    report = equilibria(traj.params)
    x_eq = report.x2 if report.x2 is not None else report.x1
    distance = abs(float(xx[-1]) - x_eq)

    if len(xx) < 3:
        return OrbitMetrics(KIND_UNDETERMINED, 0.0, None, distance)

    maxima, minima = _refined_extrema(tt, xx)
    n_extrema = len(maxima) + len(minima)

    if maxima and minima:
        amplitude = 0.5 * (
            float(np.mean([v for _, v in maxima]))
            - float(np.mean([v for _, v in minima]))
        )
    else:
        amplitude = 0.5 * float(xx.max() - xx.min())
    amplitude = max(amplitude, 0.0)

    if amplitude <= AMPLITUDE_FLOOR:
        return OrbitMetrics(KIND_EQUILIBRIUM, amplitude, None, distance)

    if n_extrema >= 10:
        heights = [v for _, v in maxima]
        spread = (max(heights) - min(heights)) / amplitude
        if spread < CYCLE_SPREAD_TOL:
            times = [tm for tm, _ in maxima]
            period = float(np.mean(np.diff(times)))
            return OrbitMetrics(KIND_CYCLE, amplitude, period, distance)

    # decaying envelope: maxima descending and minima ascending
    slack = 1e-9 * max(1.0, amplitude)
    max_h = [v for _, v in maxima]
    min_h = [v for _, v in minima]
    descending = all(b <= a + slack for a, b in zip(max_h, max_h[1:]))
    ascending = all(b >= a - slack for a, b in zip(min_h, min_h[1:]))
    if descending and ascending and n_extrema >= 2:
        return OrbitMetrics(KIND_EQUILIBRIUM, amplitude, None, distance)
    return OrbitMetrics(KIND_UNDETERMINED, amplitude, None, distance)


def amplitude_scaling(
    params: ModelParameters,
    hp: HopfPoint,
    delta_r: float,
    t_end: float = 400.0,
    steps_per_delay: int = 200,
    transient_fraction: float = 0.5,
) -> float:
    """Cycle amplitude ratio between the probes r* + 4 delta_r and r* + delta_r.

    For a supercritical point inside the square-root regime the ratio is
    close to 2.  Both probe runs must classify as cycles, otherwise the
    measurement is inconclusive.
    """
    if delta_r == 0.0:
        raise ParameterError("delta_r must be nonzero")
    r_max = equilibria(params).r_max
    probes = (hp.r_star + delta_r, hp.r_star + 4.0 * delta_r)
    if max(probes) >= r_max or min(probes) <= 0.0:
        raise ParameterError(
            f"probes {probes} leave the equilibrium window (0, {r_max})"
        )
    amps = []
    for rp in probes:
        local = params.with_r(rp)
        traj = integrate(local, default_history(rp), t_end, steps_per_delay)
        metrics = orbit_metrics(traj, transient_fraction)
        if metrics.kind != KIND_CYCLE:
            raise InconclusiveError(
                f"run at r = {rp} classified as {metrics.kind}, not cycle"
            )
        amps.append(metrics.amplitude)
    return amps[1] / amps[0]


def write_trajectory_csv(traj: Trajectory, path, stride: int = 1) -> None:
    """Write the trajectory as CSV `t,x` rows at full double precision."""
    if stride < 1:
        raise ParameterError(f"stride must be >= 1, got {stride}")
    with open(path, "w", newline="\n") as fh:
        fh.write("t,x\n")
        for i in range(0, len(traj.t), stride):
            fh.write(f"{traj.t[i]:.17g},{traj.x[i]:.17g}\n")
