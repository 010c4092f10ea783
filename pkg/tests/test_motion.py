import math

import pytest
from hypothesis import given, strategies as st

from jcmp.motion import MotionParams, motion_energy, reachable


def test_motion_energy_examples():
    mp = MotionParams(k1=7.4, k2=0.29, v_max=1.0)
    assert motion_energy(10.0, mp) == pytest.approx(76.9, rel=1e-12)
    assert motion_energy(0.0, mp) == 0.0
    assert motion_energy(10.0, MotionParams(k1=1.0, k2=2.0, v_max=2.0)) == pytest.approx(20.0)
    with pytest.raises(ValueError):
        motion_energy(-1.0, mp)


def test_reachable_examples():
    mp = MotionParams(v_max=1.0)
    assert reachable((0, 0), (3, 4), 5.0, mp)
    assert not reachable((0, 0), (3, 4.0001), 5.0, mp)
    assert reachable((1, 1), (1, 1), 1e-9, mp)
    with pytest.raises(ValueError):
        reachable((0, 0), (1, 1), 0.0, mp)


def test_params_validation():
    for kw in (dict(k1=-1.0), dict(k2=-0.1), dict(v_max=0.0)):
        with pytest.raises(ValueError):
            MotionParams(**kw)


@given(st.floats(0, 1e4), st.floats(0, 1e4), st.floats(0, 50), st.floats(0, 5), st.floats(0.1, 10))
def test_energy_linear_and_additive(a, b, k1, k2, v):
    mp = MotionParams(k1, k2, v)
    assert motion_energy(a + b, mp) == pytest.approx(motion_energy(a, mp) + motion_energy(b, mp),
                                                     rel=1e-12, abs=1e-9)
    assert motion_energy(a, mp) == pytest.approx(mp.joules_per_metre * a, rel=1e-12, abs=1e-12)


@given(st.floats(-100, 100), st.floats(-100, 100), st.floats(-100, 100), st.floats(-100, 100),
       st.floats(0.1, 50))
def test_reachable_symmetric_and_consistent(x0, y0, x1, y1, dt):
    mp = MotionParams(v_max=1.5)
    r = reachable((x0, y0), (x1, y1), dt, mp)
    assert r == reachable((x1, y1), (x0, y0), dt, mp)
    d = math.dist((x0, y0), (x1, y1))
    if d < 1.5 * dt * (1 - 1e-9):
        assert r
    if d > 1.5 * dt * (1 + 1e-9):
        assert not r
