import math

import numpy as np
import pytest
from sklearn.base import clone

from pifilter.errors import IllPosedFitError
from pifilter.gains import optimal_gain, stable_poles, zpk_eval
from pifilter.optimize import PENALTY_WEIGHT, cost
from pifilter.ratfit import (
    FitProblem,
    VectorFitter,
    fit_gopt,
    initial_poles,
    pole_residue_to_zpk,
    seed_from_gopt,
    vector_fit,
)

TRUE_POLES = np.array([-3.0 + 40j, -20.0 - 700j])
TRUE_RES = np.array([5.0 - 2j, 40.0 + 10j])


def _exact(s):
    return (TRUE_RES[None, :] / (s[:, None] - TRUE_POLES[None, :])).sum(axis=1) + 1.5


@pytest.fixture(scope="module")
def exact_problem():
    w = np.concatenate([-np.logspace(0, 4, 100)[::-1], np.logspace(0, 4, 100)])
    s = 1j * w
    return FitProblem(s, _exact(s), n_poles=2)


def test_exact_recovery(exact_problem):
    rep = vector_fit(exact_problem)
    order = np.argsort(rep.poles.imag)
    truth = np.argsort(TRUE_POLES.imag)
    assert np.allclose(rep.poles[order], TRUE_POLES[truth], rtol=1e-6)
    assert np.allclose(rep.residues[order], TRUE_RES[truth], rtol=1e-6)
    assert rep.constant == pytest.approx(1.5, rel=1e-9)
    assert rep.max_rel_err < 1e-9


def test_zpk_conversion_matches_pole_residue(exact_problem):
    zpk = pole_residue_to_zpk(TRUE_POLES, TRUE_RES, 1.5)
    s = exact_problem.s
    assert np.allclose(np.asarray(zpk_eval(zpk, s)), _exact(s), rtol=1e-12)
    with pytest.raises(IllPosedFitError):
        pole_residue_to_zpk(TRUE_POLES, TRUE_RES, 0.0)


def test_weight_rescale_invariance(exact_problem):
    s, f = exact_problem.s, exact_problem.values
    w = np.linspace(1, 3, s.size)
    a = vector_fit(FitProblem(s, f, 2, weights=w))
    b = vector_fit(FitProblem(s, f, 2, weights=7.5 * w))
    assert np.allclose(np.sort_complex(a.poles), np.sort_complex(b.poles), rtol=1e-9)


def test_constant_response_single_pole():
    s = 1j * np.logspace(-1, 3, 50)
    rep = vector_fit(FitProblem(s, np.ones(s.size), 1))
    assert np.allclose(rep.residues, 0, atol=1e-12)
    dense = 1j * np.logspace(-1, 3, 500)
    assert np.allclose(np.asarray(zpk_eval(rep.zpk, dense)), 1, atol=1e-8)
    assert np.all(rep.poles.real < 0)


def test_overparameterized_fit_is_ill_posed(rates):
    # the optimal gain is almost constant a decade above its corner
    with pytest.raises(IllPosedFitError) as info:
        fit_gopt(rates, n_poles=3, band=(2 * math.pi * 1e4, 2 * math.pi * 1e5))
    assert info.value.iteration == 0


def test_problem_validation():
    s = 1j * np.logspace(0, 2, 10)
    with pytest.raises(ValueError):
        FitProblem(s, np.ones(9), 1)
    with pytest.raises(ValueError):
        FitProblem(s, np.ones(10), 0)
    with pytest.raises(ValueError):
        FitProblem(s, np.ones(10), 5)
    with pytest.raises(ValueError):
        FitProblem(np.r_[s[:-1], s[0]], np.ones(10), 1)
    with pytest.raises(ValueError):
        FitProblem(s, np.ones(10), 1, weights=-np.ones(10))


def test_initial_poles_log_spaced():
    p = initial_poles(1.0, 1e4, 5)
    assert np.allclose(p.imag, np.logspace(0, 4, 5))
    assert np.allclose(p.real, -p.imag / 100)


def test_report_serializes(exact_problem):
    d = vector_fit(exact_problem).to_json_dict()
    assert d["zpk"]["unit"] == "hz"
    assert len(d["iterations"]) >= 2


# ---------------------------------------------------------------- optimal gain


@pytest.fixture(scope="module")
def gopt_fit(rates):
    return fit_gopt(rates, n_poles=3)


def test_gopt_fit_accuracy(gopt_fit):
    assert gopt_fit.max_rel_err < 0.05
    assert np.all(gopt_fit.poles.real < 0)


def test_gopt_fit_single_pole_stays_stable(rates):
    rep = fit_gopt(rates, n_poles=1)
    assert np.all(rep.poles.real < 0)


def test_gopt_narrower_band_fits_better(rates, gopt_fit):
    narrow = fit_gopt(rates, n_poles=3, band=(rates.gamma_s, 10 * rates.gamma_s))
    assert narrow.max_rel_err < gopt_fit.max_rel_err


def test_symmetric_seed_nearly_real(rates):
    zpk = seed_from_gopt(rates, n_poles=3)
    assert stable_poles(zpk)
    assert abs(zpk.k - 1) < 1e-12
    # fitting both frequency signs trades accuracy next to the branch point
    # for a response without ringing at negative frequencies
    w = np.logspace(math.log10(1.5 * rates.gamma_s), math.log10(2 * math.pi * 1e5), 200)
    w = np.concatenate([-w[::-1], w])
    g = np.asarray(zpk_eval(zpk, 1j * w))
    target = optimal_gain(1j * w, rates.gamma_s)
    assert np.max(np.abs(g - target) / np.abs(target)) < 0.1


def test_seed_is_feasible(config, rates):
    zpk = seed_from_gopt(rates, n_poles=3)
    lossless = config.with_losses()
    br = cost(lossless, zpk.zeros, zpk.poles, zpk.k, rates=rates)
    assert br.total < PENALTY_WEIGHT
    assert br.feasible


# ---------------------------------------------------------------- estimator


def test_vector_fitter_estimator(exact_problem):
    omega = exact_problem.s.imag
    est = VectorFitter(n_poles=2).fit(omega, exact_problem.values)
    assert np.allclose(est.predict(omega), exact_problem.values, rtol=1e-9)
    assert est.score(omega, exact_problem.values) > -1e-9
    assert est.max_rel_err_ < 1e-9
    assert est.get_params() == {"n_poles": 2, "iterations": 20, "constant": None}
    twin = clone(est)
    assert not hasattr(twin, "zpk_") and twin.get_params() == est.get_params()


def test_vector_fitter_unfitted():
    from sklearn.exceptions import NotFittedError

    with pytest.raises(NotFittedError):
        VectorFitter().predict([1.0])


def test_vector_fitter_pinned_constant(exact_problem):
    omega = exact_problem.s.imag
    est = VectorFitter(n_poles=2, constant=1.5).fit(omega, exact_problem.values)
    assert est.constant_ == 1.5
    assert est.max_rel_err_ < 1e-9
