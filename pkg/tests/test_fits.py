import numpy as np
import pytest

from cpslab.analysis.density import DensityTrace
from cpslab.analysis.fits import fit_power_law, geometric_times, scan_decrement_time
from cpslab.dynamics.cca import iterate_cca
from cpslab.lattice import new_uniform_coloring
from cpslab.rng import RngStream


def test_exact_power_law():
    t = np.array(geometric_times(1024, include_zero=False))
    fit = fit_power_law(t, r=2 * t**-0.5)
    assert fit.alpha == pytest.approx(0.5, abs=1e-12)
    assert fit.c == pytest.approx(2.0, rel=1e-12)
    assert fit.residual < 1e-12


def test_constant_trace():
    t = np.arange(1.0, 10.0)
    assert fit_power_law(t, r=np.full(t.size, 0.3)).alpha == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.25, 0.5, 1.0])
def test_planted_exponent_with_noise(alpha):
    t = np.array(geometric_times(2**12, include_zero=False))
    noise = 1 + 0.01 * (2 * RngStream(int(alpha * 100)).uniform(t.size) - 1)
    fit = fit_power_law(t, r=0.7 * t**-alpha * noise)
    assert abs(fit.alpha - alpha) < 0.02


def test_rejects_bad_input():
    with pytest.raises(ValueError):
        fit_power_law(np.array([1.0, 2.0]), r=np.array([1.0, 0.5]))
    with pytest.raises(ValueError):
        fit_power_law(np.array([1.0, 2.0, 3.0]), r=np.array([1.0, 0.0, 0.5]))


def test_window_selection_and_trace_input():
    t = np.array([0.0, 1.0, 2.0, 4.0, 8.0, 16.0])
    r = np.array([1.0, 1.0, 0.5, 0.25, 0.125, 0.0625])
    fit = fit_power_law(DensityTrace.from_arrays(t, r), (2.0, 16.0))
    assert fit.n_points == 4 and fit.alpha == pytest.approx(1.0)


def test_geometric_times():
    assert geometric_times(10) == [0.0, 1.0, 2.0, 4.0, 8.0]
    assert geometric_times(0.5) == [0.0]


def test_scan_decrement_time():
    t = [0.0, 1.0, 2.0, 4.0]
    r = [0.6, 0.51, 0.45, 0.3]
    p = [0.4, 0.4, 0.4, 0.3]
    assert scan_decrement_time(t, p, r, 0.0) == 2.0
    assert scan_decrement_time(t, p, r, 2.0) == 4.0
    assert scan_decrement_time(t, p, [0.6, 0.6, 0.6, 0.6], 0.0) is None
    with pytest.raises(ValueError):
        scan_decrement_time(t, p, r, 3.0)


def test_cca_exponent_near_one_half():
    y0 = new_uniform_coloring(1_000_000, 3, RngStream(99))
    ts, rs = [], []
    want = {100, 141, 200, 283, 400}
    for step, row in enumerate(iterate_cca(y0, 400)):
        if step in want:
            ts.append(step)
            rs.append(np.mean(row != np.roll(row, -1)))
    fit = fit_power_law(np.array(ts, float), r=np.array(rs))
    assert 0.45 <= fit.alpha <= 0.55
