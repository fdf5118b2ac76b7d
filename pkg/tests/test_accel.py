import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from topobus import _accel

needs_numba = pytest.mark.skipif(not _accel.HAS_NUMBA, reason="numba not installed")
val = st.floats(-3.0, 3.0, allow_nan=False)


@needs_numba
@settings(max_examples=30, deadline=None)
@given(st.integers(2, 40), val, val, val, val, st.floats(0.0, 2.0))
def test_bdg_band_paths_agree(n, t, onsite, soc, vx, delta):
    a = _accel.bdg_band_numba(n, t, onsite, soc, vx, delta)
    b = _accel.bdg_band_numpy(n, t, onsite, soc, vx, delta)
    assert np.array_equal(a, b)


@needs_numba
@settings(max_examples=30, deadline=None)
@given(st.lists(val, min_size=1, max_size=30), st.floats(0.5, 3.0), st.floats(0.0, 1.0))
def test_josephson_paths_agree(xs, ratio, flux):
    p1 = np.array(xs)
    p2 = p1[::-1].copy()
    assert np.allclose(_accel.josephson_points_numba(p1, p2, ratio, flux), _accel.josephson_points_numpy(p1, p2, ratio, flux), atol=1e-14)
    assert np.allclose(_accel.josephson_grid_numba(p1, p2, ratio, flux), _accel.josephson_grid_numpy(p1, p2, ratio, flux), atol=1e-14)


def test_band_to_dense_symmetric():
    ab = _accel.bdg_band_numpy(5, 1.0, 0.3, 0.4, 0.7, 0.2)
    H = _accel.band_to_dense(ab)
    assert np.array_equal(H, H.T)
    assert np.count_nonzero(np.triu(H, _accel.BDG_BANDWIDTH + 1)) == 0


_PROBE = (
    "import numpy as np\n"
    "from topobus import _accel\n"
    "from topobus.wire_model import WireParameters, low_energy_spectrum\n"
    "p = WireParameters(chemical_potential=-0.5, rashba=2.0, zeeman=1.5, length=60.0, num_sites=60)\n"
    "print(_accel.USE_NUMBA, repr(float(low_energy_spectrum(p).zero_mode_splitting)))\n"
)


@pytest.mark.parametrize("flag", ["1", "0"])
def test_env_flag_selects_path_and_results_match(flag):
    env = dict(os.environ, TOPOBUS_DISABLE_NUMBA=flag)
    out = subprocess.run([sys.executable, "-c", _PROBE], env=env, capture_output=True, text=True, check=True).stdout.split()
    expect_numba = flag == "0" and _accel.HAS_NUMBA
    assert out[0] == str(expect_numba)
    ref = subprocess.run([sys.executable, "-c", _PROBE], env=dict(os.environ, TOPOBUS_DISABLE_NUMBA="1"), capture_output=True, text=True, check=True).stdout.split()
    assert out[1] == ref[1]
