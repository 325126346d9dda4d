import csv
import math

import numpy as np
import pytest

import refvals as rv
from hemohopf import ddesim, hopf, linstab, model
from hemohopf.errors import BlowUpError, InconclusiveError, ParameterError


# ------------------------------------------------------------------ integrate


def test_constant_history_is_fixed_point(ref_params):
    params = ref_params.with_r(0.35)
    x2 = model.equilibria(params).x2
    traj = ddesim.integrate(params, ddesim.constant_history(x2), 100.0, 100)
    assert np.max(np.abs(traj.x - x2)) < 1e-8


def test_grid_alignment_and_span(ref_params):
    params = ref_params.with_r(0.35)
    traj = ddesim.integrate(params, ddesim.default_history(0.35), 10.0, 50)
    assert traj.step == 0.35 / 50
    assert traj.t[0] == 0.0
    assert traj.t[-1] >= 10.0
    assert np.all(np.diff(traj.t) > 0)
    assert np.all(np.isfinite(traj.x))


def test_integrate_validates_inputs(ref_params):
    params = ref_params.with_r(0.35)
    hist = ddesim.default_history(0.35)
    with pytest.raises(ParameterError):
        ddesim.integrate(params.with_r(0.0), hist, 10.0)
    with pytest.raises(ParameterError):
        ddesim.integrate(params, hist, -1.0)
    with pytest.raises(ParameterError):
        ddesim.integrate(params, hist, 10.0, steps_per_delay=0)


def test_non_finite_history_raises_blow_up(ref_params):
    params = ref_params.with_r(0.35)
    bad = ddesim.HistoryFunction(lambda s: float("nan"), "nan history")
    with pytest.raises(BlowUpError):
        ddesim.integrate(params, bad, 5.0)


def test_trajectory_interpolation_consistency(ref_params):
    params = ref_params.with_r(0.35)
    traj = ddesim.integrate(params, ddesim.default_history(0.35), 5.0, 50)
    for idx in (0, 10, len(traj.t) - 1):
        assert traj.at(float(traj.t[idx])) == traj.x[idx]
    # interpolated midpoint agrees with a doubled-resolution run to the
    # interpolation's own fourth-order accuracy at this coarse step
    fine = ddesim.integrate(params, ddesim.default_history(0.35), 5.0, 100)
    mid_time = float(traj.t[40]) + 0.5 * traj.step
    assert abs(traj.at(mid_time) - fine.x[81]) < 1e-7


def test_step_halving_contraction(ref_params):
    params = ref_params.with_r(0.36)
    hist = ddesim.default_history(0.36)

    def max_diff(n):
        coarse = ddesim.integrate(params, hist, 20.0, n)
        fine = ddesim.integrate(params, hist, 20.0, 2 * n)
        m = min(len(coarse.x), (len(fine.x) + 1) // 2)
        return float(np.max(np.abs(coarse.x[:m] - fine.x[::2][:m])))

    d100 = max_diff(100)
    d200 = max_diff(200)
    assert d100 / d200 >= 8.0


def test_positivity_preserved(traj_035, traj_036):
    assert float(traj_035.x.min()) >= -1e-9
    assert float(traj_036.x.min()) >= -1e-9


# -------------------------------------------------------------- orbit metrics


def test_decaying_side_classifies_equilibrium(traj_035):
    metrics = ddesim.orbit_metrics(traj_035, 0.5)
    assert metrics.kind == ddesim.KIND_EQUILIBRIUM
    assert metrics.distance_to_x2 < 1e-6
    assert metrics.period is None


def test_cycle_side_classifies_cycle(traj_036):
    metrics = ddesim.orbit_metrics(traj_036, 0.5)
    assert metrics.kind == ddesim.KIND_CYCLE
    assert 0.09 < metrics.amplitude < 0.11
    assert abs(metrics.period - rv.PERIOD_036) < 0.005 * rv.PERIOD_036


def test_cycle_period_near_onset_matches_linear_theory(ref_params, ref_hopf):
    # just past the crossing the cycle period approaches the root frequency
    r = ref_hopf.r_star + 1e-3
    params = ref_params.with_r(r)
    traj = ddesim.integrate(params, ddesim.default_history(r), 400.0, 200)
    metrics = ddesim.orbit_metrics(traj, 0.5)
    assert metrics.kind == ddesim.KIND_CYCLE
    triple = linstab.characteristic_triple(params, "x2")
    root = linstab.char_root_newton(1j * ref_hopf.omega_star, triple)
    assert abs(metrics.period - 2.0 * math.pi / root.imag) < 0.05 * metrics.period


def test_constant_trajectory_metrics(ref_params):
    params = ref_params.with_r(0.35)
    x2 = model.equilibria(params).x2
    traj = ddesim.integrate(params, ddesim.constant_history(x2), 40.0, 100)
    metrics = ddesim.orbit_metrics(traj, 0.5)
    assert metrics.kind == ddesim.KIND_EQUILIBRIUM
    assert metrics.amplitude < 1e-10
    assert metrics.period is None


def test_distance_to_equilibrium_decreases(ref_params):
    params = ref_params.with_r(0.35)
    hist = ddesim.default_history(0.35)
    early = ddesim.orbit_metrics(ddesim.integrate(params, hist, 60.0, 200), 0.5)
    late = ddesim.orbit_metrics(ddesim.integrate(params, hist, 120.0, 200), 0.5)
    assert late.distance_to_x2 < early.distance_to_x2


def test_short_window_is_undetermined(ref_params):
    params = ref_params.with_r(0.36)
    traj = ddesim.integrate(params, ddesim.default_history(0.36), 2.0, 100)
    metrics = ddesim.orbit_metrics(traj, 0.5)
    assert metrics.kind == ddesim.KIND_UNDETERMINED


def test_metrics_validates_transient_fraction(traj_035):
    with pytest.raises(ParameterError):
        ddesim.orbit_metrics(traj_035, 1.0)


def test_linearized_decay_rate_matches_rightmost_root(ref_params):
    params = ref_params.with_r(0.35)
    x2 = model.equilibria(params).x2
    eps = 1e-4
    hist = ddesim.HistoryFunction(
        lambda s: x2 + eps * math.cos(math.pi * s / (2.0 * 0.35)),
        "equilibrium plus small ripple",
    )
    traj = ddesim.integrate(params, hist, 80.0, 200)
    mask = traj.t >= 20.0
    tt = traj.t[mask]
    dev = np.abs(traj.x[mask] - x2)
    peaks = [
        (tt[i], dev[i])
        for i in range(1, len(dev) - 1)
        if dev[i] > dev[i - 1] and dev[i] >= dev[i + 1]
    ]
    times = np.array([a for a, _ in peaks])
    heights = np.array([b for _, b in peaks])
    slope = np.polyfit(times, np.log(heights), 1)[0]
    triple = linstab.characteristic_triple(params, "x2")
    rightmost = linstab.rightmost_root_estimate(triple, window=8.0)
    assert abs(slope - rightmost.real) < 0.1 * abs(rightmost.real)


# ---------------------------------------------------------- amplitude scaling


def test_amplitude_scaling_square_root_regime(ref_params, ref_hopf):
    # probes r* + {5e-4, 2e-3} sit inside the asymptotic regime
    ratio = ddesim.amplitude_scaling(ref_params, ref_hopf, 5e-4)
    assert 1.6 <= ratio <= 2.4
    assert abs(ratio - rv.RATIO_5E4_2E3) < 0.02


def test_amplitude_scaling_inconclusive_below_crossing(ref_params, ref_hopf):
    with pytest.raises(InconclusiveError):
        ddesim.amplitude_scaling(ref_params, ref_hopf, -2e-3, t_end=120.0)


def test_amplitude_scaling_probe_window_checked(ref_params, ref_hopf):
    with pytest.raises(ParameterError):
        ddesim.amplitude_scaling(ref_params, ref_hopf, 0.05)
    with pytest.raises(ParameterError):
        ddesim.amplitude_scaling(ref_params, ref_hopf, 0.0)


# ------------------------------------------------------------------ CSV export


def test_trajectory_csv_roundtrip(tmp_path, ref_params):
    params = ref_params.with_r(0.35)
    traj = ddesim.integrate(params, ddesim.default_history(0.35), 3.0, 50)
    out = tmp_path / "traj.csv"
    ddesim.write_trajectory_csv(traj, out)
    with open(out, newline="") as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["t", "x"]
    assert len(rows) - 1 == len(traj.t)
    for (t_text, x_text), t_val, x_val in zip(rows[1:], traj.t, traj.x):
        assert float(t_text) == t_val
        assert float(x_text) == x_val


def test_trajectory_csv_stride(tmp_path, ref_params):
    params = ref_params.with_r(0.35)
    traj = ddesim.integrate(params, ddesim.default_history(0.35), 3.0, 50)
    out = tmp_path / "traj.csv"
    ddesim.write_trajectory_csv(traj, out, stride=7)
    with open(out) as fh:
        n_rows = sum(1 for _ in fh) - 1
    assert n_rows == len(range(0, len(traj.t), 7))
