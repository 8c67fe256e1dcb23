import math

import numpy as np
import pytest

from pifilter.errors import QuadratureError
from pifilter.quadrature import NODES, W_GAUSS, W_KRONROD, integrate_log, integrate_log_strict


def test_rule_weights():
    assert W_KRONROD.sum() == pytest.approx(2.0, abs=1e-14)
    assert W_GAUSS.sum() == pytest.approx(2.0, abs=1e-14)
    # the 15-point Kronrod rule integrates x^22 exactly on [-1, 1]
    assert np.dot(W_KRONROD, NODES**22) == pytest.approx(2 / 23, rel=1e-12)


def test_lorentzian_with_flat_segment():
    # integral of 1/(1 + w^2) over [0, W] is arctan(W); flat below 1e-6 adds ~1e-6
    res = integrate_log(lambda w: (1 / (1 + w**2))[None], 1e-6, 1e4, rtol=1e-8)
    assert res.converged
    assert res.value[0] == pytest.approx(math.atan(1e4), rel=1e-7)


def test_vector_valued_integrand():
    f = lambda w: np.stack([np.exp(-w), w * np.exp(-w)])  # noqa: E731
    res = integrate_log(f, 1e-3, 50, rtol=1e-9, flat_below=False)
    assert res.value[0] == pytest.approx(math.exp(-1e-3) - math.exp(-50), rel=1e-8)
    assert res.value[1] == pytest.approx((1 + 1e-3) * math.exp(-1e-3) - 51 * math.exp(-50), rel=1e-8)


def test_narrow_peak_refined():
    width = 1e-3
    f = lambda w: (width / ((w - 10) ** 2 + width**2))[None]  # noqa: E731
    res = integrate_log(f, 1e-3, 100, rtol=1e-6, flat_below=False)
    exact = math.atan((100 - 10) / width) - math.atan((1e-3 - 10) / width)
    assert res.value[0] == pytest.approx(exact, rel=1e-5)


def test_bad_interval():
    with pytest.raises(ValueError):
        integrate_log(lambda w: w[None], 0.0, 1.0)


def test_strict_reports_failure():
    f = lambda w: np.sin(1e6 * w)[None] + 2  # noqa: E731
    with pytest.raises(QuadratureError) as info:
        integrate_log_strict(f, 1e-3, 1e3, rtol=1e-12, max_rounds=2)
    assert info.value.achieved_rtol > 1e-12
