import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spinpipe.core import CONST
from spinpipe.errors import SchedulingError
from spinpipe.shuttle import (
    ShuttleSpec,
    lz_probability,
    min_shuttle_time,
    ramp_amplitude,
    waveform_schedule,
)


def test_lz_working_point():
    t = 20e9 * CONST.h
    A = ramp_amplitude(0.1, 25e-3)
    st_ = min_shuttle_time(t, A, 1e-4)
    # delta = ln(1/P)/2pi, omega = t^2 / (4 A hbar delta)
    w = t**2 * 2 * np.pi / (4 * A * CONST.hbar * np.log(1e4))
    assert st_.omega == pytest.approx(w, rel=1e-12)
    assert st_.time == pytest.approx(8.861e-9, rel=1e-3)
    assert st_.freq_hz == pytest.approx(112.85e6, rel=1e-3)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e9, 50e9), st.floats(0.01, 0.5), st.floats(1e-3, 0.1), st.floats(1e-8, 0.1))
def test_min_time_hits_target_probability(t_hz, alpha, dv, P):
    A = ramp_amplitude(alpha, dv)
    res = min_shuttle_time(t_hz * CONST.h, A, P)
    p = lz_probability(ShuttleSpec(t_hz * CONST.h, A, res.omega))
    assert p == pytest.approx(P, rel=1e-9)
    slower = lz_probability(ShuttleSpec(t_hz * CONST.h, A, 0.9 * res.omega))
    assert slower < P


def test_forbidden_window_slows_drive():
    t, A = 20e9 * CONST.h, ramp_amplitude(0.1, 25e-3)
    w = min_shuttle_time(t, A).omega
    res = min_shuttle_time(t, A, forbidden=[(0.5 * w, 1.5 * w)])
    assert res.omega == pytest.approx(0.5 * w)
    assert min_shuttle_time(0.0, A).time == np.inf
    with pytest.raises(ValueError):
        min_shuttle_time(t, A, P_max=1.5)


def test_maximal_filling_schedule():
    s = waveform_schedule(20)
    assert s.spacing == 5
    assert list(s.steady_occupied()) == [4, 9, 14, 19]
    assert s.min_gap() == 5
    assert list(s.phases[:6]) == [0, 1, 2, 0, 1, 2]
    assert list(s.groups[:6]) == [0, 1, 2, 3, 4, 0]


@pytest.mark.parametrize("k", [3, 4, 5, 7])
def test_spacing_is_kept_at_all_steps(k):
    s = waveform_schedule(30, filling=k, n_steps=45)
    assert s.min_gap() == k
    occ = s.occupancy
    # electrons move exactly one column per step
    assert np.array_equal(occ[1:, 1:] | ~occ[:-1, :-1], np.ones_like(occ[1:, 1:]))


@pytest.mark.parametrize("k", [1, 2])
def test_dense_filling_rejected(k):
    with pytest.raises(SchedulingError):
        waveform_schedule(10, filling=k)


def test_schedule_csv_is_stable():
    assert waveform_schedule(6).to_csv() == waveform_schedule(6).to_csv()
    header = [l for l in waveform_schedule(6).to_csv().splitlines() if not l.startswith("#")]
    assert header[0].startswith("timestep")
