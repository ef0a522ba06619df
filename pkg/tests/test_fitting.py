import numpy as np
import pytest

from maxlinks import ParameterError, fit_two_stage


def test_perfect_low_segment_line():
    points = [(k, float(k)) for k in range(1, 5)] + \
             [(k, 3.5 + 0.3 * k) for k in range(5, 16)]
    fit = fit_two_stage(points, 4)
    assert fit.a1 == pytest.approx(0.0, abs=1e-12)
    assert fit.b1 == pytest.approx(1.0, rel=1e-12)


def test_recovers_published_high_segment():
    # Points generated from the high-segment line itself must reproduce its
    # parameters to at least four decimals.
    a2, b2 = 3.5086, 0.3171
    points = [(k, float(k)) for k in range(1, 5)] + \
             [(k, a2 + b2 * k) for k in range(5, 16)]
    fit = fit_two_stage(points, 4)
    assert fit.a2 == pytest.approx(a2, abs=5e-5)
    assert fit.b2 == pytest.approx(b2, abs=5e-5)
    assert np.allclose(fit.residuals_high, 0.0, atol=1e-10)


def test_collinear_points_have_zero_residual():
    points = [(1, 0.8), (2, 1.6)] + [(k, 1.0 + 0.5 * k) for k in (3, 5, 7)]
    fit = fit_two_stage(points, 2)
    assert fit.b2 == pytest.approx(0.5, rel=1e-12)
    assert np.allclose(fit.residuals_high, 0.0, atol=1e-12)


def test_single_antenna_low_segment_is_pinned():
    points = [(k, 0.1 * k + 1.0) for k in range(1, 16)]
    fit = fit_two_stage(points, 1)
    assert fit.a1 == 0.0
    assert fit.b1 == pytest.approx(1.1)
    assert fit.b2 == pytest.approx(0.1, rel=1e-9)


def test_predict_uses_breakpoint():
    points = [(k, float(k)) for k in (1, 2, 3)] + \
             [(k, 2.0 + 0.5 * k) for k in (4, 5, 6)]
    fit = fit_two_stage(points, 3)
    assert fit.predict(2, 3) == pytest.approx(2.0)
    assert fit.predict(6, 3) == pytest.approx(5.0)


@pytest.mark.parametrize("points,m", [
    ([(1, 1.0), (5, 2.0), (6, 2.2)], 4),      # one low point with M > 1
    ([(1, 1.0), (2, 2.0), (6, 2.2)], 4),      # one high point
    ([(2, 1.0), (5, 2.0), (6, 2.2)], 1),      # M = 1 without the K=1 point
    ([(1, 1.0), (1, 1.2), (5, 2.0), (6, 2.2)], 1),  # duplicate K
])
def test_insufficient_points_rejected(points, m):
    with pytest.raises(ParameterError):
        fit_two_stage(points, m)
