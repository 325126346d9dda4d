import pytest

import refvals as rv
from hemohopf import ddesim, hopf


@pytest.fixture(scope="session")
def ref_hopf():
    """Hopf point of the benchmark parameter set (strategy route)."""
    return hopf.hopf_from_pqk(rv.N, rv.BETA0, rv.DELTA, rv.K)


@pytest.fixture(scope="session")
def ref_params(ref_hopf):
    """Benchmark parameters frozen at the Hopf delay, gamma = gamma*."""
    return ref_hopf.params


def _reference_trajectory(params, r, t_end=200.0):
    local = params.with_r(r)
    return ddesim.integrate(local, ddesim.default_history(r), t_end, 200)


@pytest.fixture(scope="session")
def traj_035(ref_params):
    """Trajectory at r = 0.35 (stable side), t_end = 200, 200 steps/delay."""
    return _reference_trajectory(ref_params, 0.35)


@pytest.fixture(scope="session")
def traj_036(ref_params):
    """Trajectory at r = 0.36 (unstable side), t_end = 200, 200 steps/delay."""
    return _reference_trajectory(ref_params, 0.36)


@pytest.fixture(scope="session")
def scaling_amplitudes(ref_params, ref_hopf):
    """Cycle amplitudes at the probes r* + {2e-3, 8e-3}, t_end = 400."""
    amps = {}
    for dr in (2e-3, 8e-3):
        r = ref_hopf.r_star + dr
        traj = _reference_trajectory(ref_params, r, t_end=400.0)
        amps[dr] = ddesim.orbit_metrics(traj, 0.5).amplitude
    return amps
