import cmath
import math

import numpy as np
import pytest

from pifilter.errors import SingularEvaluationError
from pifilter.model import REFERENCE, ZPK, Detuned, Optimal, Rational, Unity
from pifilter.response import chi_sq
from pifilter.transfer import DelayMode, propagator, transfer_set, transfer_set_from_gain


def lossless_reference(rates, G, s):
    """Lossless transfer functions written out term by term."""
    Zf = np.exp(-s * rates.tau_f)
    Zs = np.exp(-s * rates.tau_s)
    G0, phase = np.abs(G), np.exp(1j * np.angle(G))
    r_CM, r_IM, t_CM, t_IM = rates.r_CM, rates.r_IM, rates.t_CM, rates.t_IM
    den = -1 + r_CM * Zs**2 + G0**2 * phase**2 * r_IM * Zf**2 * (r_CM - Zs**2)
    k = np.sqrt(np.abs(1 - G0**2))
    return {
        "T_xi": -G0 * phase * t_CM * t_IM * Zf * Zs / den,
        "T_nq": (G0**2 * phase**2 * Zf**2 * (r_CM - Zs**2) + r_IM * (-1 + r_CM * Zs**2)) / den,
        "T_na1": phase * G0 * k * t_IM * Zf**2 * (r_CM - Zs**2) / den,
        "T_na2": k * t_IM * (-1 + r_CM * Zs**2) / den,
    }


def test_propagator_basics():
    assert propagator(1e-5, 0.0) == 1
    tau = 1.33426e-5
    assert propagator(tau, 1j * math.pi / tau) == pytest.approx(-1, abs=1e-12)
    exact = propagator(tau, 1e3j)
    approx = propagator(tau, 1e3j, DelayMode.SECOND_ORDER)
    assert abs(approx - exact) / abs(exact) < 1e-6
    assert propagator(1.0, 0.0, loss=0.19) == pytest.approx(0.9)


def test_delay_mode_parse():
    assert DelayMode.parse("second_order") is DelayMode.SECOND_ORDER
    assert DelayMode.parse("Exact") is DelayMode.EXACT
    with pytest.raises(ValueError):
        DelayMode.parse("taylor")


def test_passive_noise_channel_all_pass(rates):
    w = np.concatenate([-np.logspace(-3, 7, 500), np.logspace(-3, 7, 500)])
    ts = transfer_set(REFERENCE, Unity(), 1j * w)
    assert np.max(np.abs(np.abs(ts.T_nq) - 1)) < 1e-10
    assert np.all(ts.T_na1 == 0) and np.all(ts.T_na2 == 0)


def test_no_added_noise_at_unit_magnitude(rates):
    s = 1j * np.logspace(-2, 5, 100)
    ts = transfer_set(REFERENCE, Unity(), s)
    assert np.all(ts.T_na1 == 0) and np.all(ts.T_na2 == 0)
    # |G| = 1 up to rounding, so the added-noise power is at rounding level
    for model in (Detuned(0.7), Optimal()):
        ts = transfer_set(REFERENCE, model, s)
        assert np.max(np.abs(ts.T_na1) ** 2 + np.abs(ts.T_na2) ** 2) < 1e-12


@pytest.mark.parametrize("G", [1.0, cmath.exp(0.4j), 1.3 * cmath.exp(-1j), 0.7])
def test_lossy_formulas_reduce_to_lossless(rates, G):
    rng = np.random.default_rng(4)
    s = rng.normal(size=40) * 1e3 + 1j * rng.normal(size=40) * 1e5
    s = np.concatenate([s, 1j * np.logspace(-2, 6, 40)])
    ts = transfer_set_from_gain(REFERENCE, rates, np.full(s.shape, G), s)
    ref = lossless_reference(rates, G, s)
    for name, value in ref.items():
        got = getattr(ts, name)
        assert np.max(np.abs(got - value) / np.maximum(np.abs(value), 1e-300)) < 1e-12 or \
            np.max(np.abs(got - value)) < 1e-12
    for name in ("T_nLo", "T_nLf", "T_nLs"):
        assert np.all(getattr(ts, name) == 0)


def test_output_loss_channel():
    cfg = REFERENCE.with_losses(Lambda_o=0.3)
    ts = transfer_set(cfg, Unity(), 1j * np.array([1.0, 10.0]))
    assert np.allclose(ts.T_nLo, math.sqrt(0.3))


def test_output_loss_preserves_vacuum_total():
    cfg = REFERENCE.with_losses(Lambda_o=0.3)
    ts = transfer_set(cfg, Unity(), 1j * np.logspace(-1, 5, 30))
    total = sum(np.abs(t) ** 2 for t in ts.noise_terms())
    assert np.allclose(total, 1.0, atol=1e-12)


def test_lossy_unity_noise_budget_is_unitary():
    # a passive lossy system is still a beam-splitter network: |T|^2 summed is 1
    cfg = REFERENCE.with_losses(0.3, 2e-3, 5e-5)
    ts = transfer_set(cfg, Unity(), 1j * np.logspace(-1, 6, 50))
    total = sum(np.abs(t) ** 2 for t in ts.noise_terms())
    assert np.all(total <= 1 + 1e-9)


def test_shared_denominator(rates):
    ts = transfer_set(REFERENCE, Detuned(0.3), 1j * np.array([2.0, 20.0]))
    manual = transfer_set_from_gain(REFERENCE, rates, np.full(2, cmath.exp(0.3j)),
                                    1j * np.array([2.0, 20.0]))
    assert np.allclose(ts.denominator, manual.denominator)


def test_second_order_matches_exact_at_low_frequency(rates):
    w = np.logspace(-2, math.log10(0.01 / rates.tau_s), 30)
    for model in (Unity(), Detuned(math.pi / 2), Optimal()):
        exact = chi_sq(REFERENCE, model, w).chi_sq
        approx = chi_sq(REFERENCE, model, w, mode=DelayMode.SECOND_ORDER).chi_sq
        assert np.max(np.abs(approx / exact - 1)) < 1e-3


def test_resonant_denominator_raises(rates):
    # at s = 0 the denominator is (r_CM - 1)(1 + G^2 r_IM), zero for G = i / sqrt(r_IM)
    s = np.array([0.0 + 0j])
    with pytest.raises(SingularEvaluationError):
        transfer_set_from_gain(REFERENCE, rates, np.ones(1) * 1j / math.sqrt(rates.r_IM), s)


def test_rational_gain_transfer(rates):
    model = Rational(ZPK((-5.0,), (-5.0,), 1.0))
    s = 1j * np.array([1.0, 3.0])
    assert np.allclose(transfer_set(REFERENCE, model, s).T_xi, transfer_set(REFERENCE, Unity(), s).T_xi)
