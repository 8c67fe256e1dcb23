import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pifilter.errors import SingularEvaluationError
from pifilter.gains import (
    eval_gain,
    gain,
    gain_squared,
    optimal_gain,
    pt_gain,
    pt_to_zpk,
    stable_poles,
    zpk_eval,
)
from pifilter.model import ZPK, Detuned, Optimal, Rational, Unity, reference_pt


def test_optimal_gain_is_all_pass(rates):
    w = np.logspace(-3, 7, 1000)
    for sign in (1, -1):
        g = optimal_gain(sign * 1j * w, rates.gamma_s)
        assert np.max(np.abs(np.abs(g) - 1)) < 1e-12


def test_optimal_gain_at_bandwidth(rates):
    g = optimal_gain(1j * rates.gamma_s, rates.gamma_s)
    assert g == pytest.approx(cmath.exp(-1j * math.pi / 4), abs=1e-12)


def test_optimal_gain_limits(rates):
    assert cmath.phase(optimal_gain(1j * 1e-9 * rates.gamma_s, rates.gamma_s)) == pytest.approx(
        -math.pi / 2, abs=1e-6)
    assert optimal_gain(1j * 1e12, rates.gamma_s) == pytest.approx(1, abs=1e-9)


def test_optimal_gain_conjugate_symmetry(rates):
    w = np.logspace(-2, 6, 50)
    assert np.allclose(optimal_gain(-1j * w, rates.gamma_s), np.conj(optimal_gain(1j * w, rates.gamma_s)))


def test_optimal_gain_branch_point(rates):
    with pytest.raises(SingularEvaluationError):
        optimal_gain(rates.gamma_s, rates.gamma_s)


def test_optimal_gain_squared_matches_mobius(rates):
    s = 1j * np.logspace(0, 4, 20)
    sq = gain_squared(Optimal(), s, rates)
    assert np.allclose(sq, (s + rates.gamma_s) / (s - rates.gamma_s))
    assert np.allclose(sq, optimal_gain(s, rates.gamma_s) ** 2)


def test_unity_and_detuned(rates):
    s = 1j * np.array([1.0, 10.0])
    assert np.all(gain(Unity(), s, rates) == 1)
    assert np.allclose(gain(Detuned(math.pi / 4), s, rates), cmath.exp(1j * math.pi / 4))
    v = eval_gain(Detuned(0.3), 1j, rates)
    assert v.magnitude == pytest.approx(1) and v.phase == pytest.approx(0.3)


def test_pt_dc_gain(rates):
    # at s = 0 the coupling term is 4 g^2 tau_f / (2 gamma_m) = gamma_s / gamma_m, real
    pt = reference_pt(Q_m=5e5)
    g0 = pt_gain(pt, 0.0, rates.tau_f)
    assert g0.real == pytest.approx(1 + rates.gamma_s / pt.gamma_m, rel=1e-6)
    assert abs(cmath.phase(g0)) < 2 * pt.gamma_m / pt.omega_m


def test_pt_zeros_match_reference_filter(rates):
    pt = reference_pt()
    zpk = pt_to_zpk(pt.f_m, pt.Q_m, pt.g, rates.tau_f)
    zeros_hz = sorted((z / (2 * math.pi) for z in zpk.zeros), key=lambda z: z.imag)
    assert zeros_hz[0].real == pytest.approx(-14.91, abs=0.01)
    assert zeros_hz[0].imag == pytest.approx(-2.22e-4, rel=0.01)
    assert zeros_hz[1].real == pytest.approx(14.91, abs=0.01)
    assert zeros_hz[1].imag == pytest.approx(1.0e6, rel=0.01)
    poles_hz = [p / (2 * math.pi) for p in zpk.poles]
    assert poles_hz[0].real == pytest.approx(-2.5e-5, rel=0.01)


def test_pt_zpk_reproduces_gain(rates):
    pt = reference_pt(Q_m=5e5)
    zpk = pt_to_zpk(pt.f_m, pt.Q_m, pt.g, rates.tau_f)
    s = 1j * np.logspace(-1, 7, 200)
    assert np.allclose(zpk_eval(zpk, s), pt_gain(pt, s, rates.tau_f), rtol=1e-9)


def test_pt_phase_follows_optimal_filter(rates):
    # above the mechanical linewidth the PT phase tracks arctan(-gamma_s / w)
    pt = reference_pt()
    w = np.array([10.0, 100.0, 1000.0])
    phase = np.angle(pt_gain(pt, 1j * w, rates.tau_f))
    assert np.allclose(phase, np.arctan(-rates.gamma_s / w), atol=1e-3)


def test_zpk_eval_on_pole():
    zpk = ZPK((1.0,), (-2.0 + 3j,), 2.0)
    with pytest.raises(SingularEvaluationError):
        zpk_eval(zpk, -2.0 + 3j)
    assert zpk_eval(zpk, 0.0) == pytest.approx(2 * (-1) / (2 - 3j))


def test_rational_through_gain(rates):
    zpk = ZPK((-1.0,), (-2.0,), 3.0)
    assert gain(Rational(zpk), 0.0, rates) == pytest.approx(1.5)


def test_stable_poles():
    assert stable_poles(ZPK((0,), (-1,), 1))
    assert not stable_poles(ZPK((0,), (-1e-3,), 1), margin=1e-2)


@settings(max_examples=60, deadline=None)
@given(st.floats(1e-4, 1e8), st.sampled_from([1, -1]))
def test_optimal_gain_unit_magnitude_property(w, sign):
    g = optimal_gain(sign * 1j * w, 93.685)
    assert abs(abs(g) - 1) < 1e-12


@settings(max_examples=60, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=1e4, allow_nan=False, allow_infinity=False),
                min_size=1, max_size=4),
       st.floats(0.1, 10))
def test_zpk_scaling_property(roots, k):
    poles = tuple(complex(-abs(r.real) - 1, r.imag) for r in roots)
    zeros = tuple(r for r in roots)
    a = zpk_eval(ZPK(zeros, poles, 1.0), 2j)
    b = zpk_eval(ZPK(zeros, poles, k), 2j)
    assert b == pytest.approx(k * a, rel=1e-9, abs=1e-300)
