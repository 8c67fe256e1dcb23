"""Vector fitting of complex-valued frequency responses.

The response is approximated in pole-residue form

    f(s) ~ sum_n r_n / (s - a_n) + d

with complex poles and residues that are *not* paired into conjugates,
since the filter responses here come from complex impulse responses.
Poles are relocated iteratively from the zeros of a scaling function and
reflected into the left half-plane after every step.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from .errors import IllPosedFitError
from .gains import optimal_gain, zpk_eval
from .model import ZPK, DerivedRates
from .validation import check_abscissae, check_complex_response

logger = logging.getLogger(__name__)

# relative error below which the current poles already reproduce the data
EXACT_FIT = 1e3 * np.finfo(float).eps


@dataclass
class FitProblem:
    s: np.ndarray
    values: np.ndarray
    n_poles: int
    iterations: int = 20
    weights: np.ndarray | None = None
    constant: complex | None = None

    def __post_init__(self):
        self.s = check_abscissae(self.s)
        self.values = check_complex_response(self.values, self.s.size)
        if self.n_poles < 1:
            raise ValueError("n_poles must be at least 1")
        if self.s.size < 2 * self.n_poles + 2:
            raise ValueError(f"need at least {2 * self.n_poles + 2} samples for {self.n_poles} poles")
        if self.weights is None:
            self.weights = np.ones(self.s.size)
        self.weights = np.asarray(self.weights, dtype=float)
        if self.weights.shape != self.s.shape or np.any(self.weights <= 0):
            raise ValueError("weights must be positive, one per sample")


@dataclass
class FitReport:
    zpk: ZPK
    poles: np.ndarray
    residues: np.ndarray
    constant: complex
    max_rel_err: float
    pole_history: list = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "zpk": self.zpk.to_json_dict("hz"),
            "max_rel_err": self.max_rel_err,
            "iterations": [
                [[p.real / (2 * math.pi), p.imag / (2 * math.pi)] for p in poles]
                for poles in self.pole_history
            ],
        }


def initial_poles(omega_lo, omega_hi, n_poles):
    """Log-spaced starting poles -w/100 + i w over the band."""
    w = np.logspace(math.log10(omega_lo), math.log10(omega_hi), n_poles)
    return -w / 100 + 1j * w


def _cauchy(s, poles):
    return 1.0 / (s[:, None] - poles[None, :])


def _solve(A, b, iteration):
    """Column-scaled least squares via SVD; rank deficiency is an error."""
    norms = np.linalg.norm(A, axis=0)
    norms[norms == 0] = 1.0
    x, _, rank, sv = np.linalg.lstsq(A / norms, b, rcond=None)
    if rank < A.shape[1]:
        raise IllPosedFitError(
            f"rank-deficient least squares ({rank} < {A.shape[1]}) at iteration {iteration}",
            iteration=iteration)
    return x / norms


def _flip_unstable(poles):
    return np.where(poles.real > 0, -poles.real + 1j * poles.imag, poles)


def _relocate(s, f, w, poles, constant, iteration):
    n = poles.size
    C = _cauchy(s, poles)
    blocks = [C]
    if constant is None:
        blocks.append(np.ones((s.size, 1)))
        rhs = f
    else:
        rhs = f - constant
    blocks.append(-f[:, None] * C)
    A = np.hstack(blocks) * w[:, None]
    x = _solve(A, rhs * w, iteration)
    sigma_res = x[-n:]
    # zeros of 1 + sum r~/(s - a) are eig(diag(a) - 1 r~^T)
    H = np.diag(poles) - np.outer(np.ones(n), sigma_res)
    new = np.linalg.eigvals(H)
    new = _flip_unstable(new)
    # keep poles strictly off the imaginary axis
    floor = 1e-12 * np.max(np.abs(new))
    return np.where(new.real > -floor, -floor + 1j * new.imag, new)


def _residues(s, f, w, poles, constant, iteration):
    C = _cauchy(s, poles)
    if constant is None:
        A = np.hstack([C, np.ones((s.size, 1))]) * w[:, None]
        x = _solve(A, f * w, iteration)
        return x[:-1], complex(x[-1])
    x = _solve(C * w[:, None], (f - constant) * w, iteration)
    return x, complex(constant)


def pole_residue_to_zpk(poles, residues, constant) -> ZPK:
    if constant == 0:
        raise IllPosedFitError("zero constant term: the fitted response has fewer zeros than poles")
    n = poles.size
    zeros = np.linalg.eigvals(np.diag(poles) - np.outer(np.ones(n), residues) / constant)
    return ZPK(tuple(zeros), tuple(poles), constant)


def vector_fit(problem: FitProblem, tol: float = 1e-8) -> FitReport:
    """Fit a stable rational model with ``problem.n_poles`` poles.

    Relocation runs for ``problem.iterations`` rounds, stopping early once
    the largest relative pole movement drops below ``tol``.
    """
    s, f, w = problem.s, problem.values, problem.weights
    omega = np.abs(s.imag)
    poles = initial_poles(max(omega.min(), 1e-12), omega.max(), problem.n_poles)
    history = [poles.copy()]
    for it in range(problem.iterations):
        # data the current poles already reproduce leave the relocation
        # system singular, so stop before it
        residues, constant = _residues(s, f, w, poles, problem.constant, it)
        if _max_rel_err(poles, residues, constant, s, f) <= EXACT_FIT:
            break
        new = _relocate(s, f, w, poles, problem.constant, it)
        move = np.max(np.abs(np.sort_complex(new) - np.sort_complex(poles)) / np.abs(new))
        poles = new
        history.append(poles.copy())
        logger.debug("vector fit iteration %d: max relative pole move %.3g", it, move)
        if move < tol:
            break
    residues, constant = _residues(s, f, w, poles, problem.constant, problem.iterations)
    zpk = pole_residue_to_zpk(poles, residues, constant)
    fit = np.asarray(zpk_eval(zpk, s))
    rel = np.abs(fit - f) / np.maximum(np.abs(f), np.finfo(float).tiny)
    return FitReport(zpk, poles, residues, constant, float(rel.max()), history)


def _max_rel_err(poles, residues, constant, s, f):
    fit = _cauchy(s, poles) @ residues + constant
    return float(np.max(np.abs(fit - f) / np.maximum(np.abs(f), np.finfo(float).tiny)))


def seed_from_gopt(rates: DerivedRates, n_poles=3, band=None, n_samples=400, iterations=20) -> ZPK:
    """Stable rational approximation of the optimal gain, used to seed optimization.

    Samples cover both signs of frequency over ``band`` (rad/s), so the
    fit honours G(-i w) = conj(G(i w)) and comes out with nearly real
    coefficients. A fit to positive frequencies alone is free to ring at
    negative ones, which destabilizes the closed loop. The high-frequency
    constant is pinned to 1, the limit of the optimal gain.
    """
    return fit_gopt(rates, n_poles, band, n_samples, iterations, symmetric=True).zpk


def fit_gopt(rates: DerivedRates, n_poles=3, band=None, n_samples=400, iterations=20,
             symmetric=False) -> FitReport:
    """Vector fit of the optimal gain on log-spaced samples over ``band`` (rad/s).

    With ``symmetric`` the ``n_samples`` points are split evenly between
    positive and negative frequencies.
    """
    lo, hi = band if band is not None else (rates.gamma_s, 2 * math.pi * 1e5)
    lo = max(lo, rates.gamma_s * (1 + 1e-6))
    if symmetric:
        omega = np.logspace(math.log10(lo), math.log10(hi), n_samples // 2)
        omega = np.concatenate([-omega[::-1], omega])
    else:
        omega = np.logspace(math.log10(lo), math.log10(hi), n_samples)
    s = 1j * omega
    problem = FitProblem(s, optimal_gain(s, rates.gamma_s), n_poles, iterations, constant=1.0)
    return vector_fit(problem)


class VectorFitter(RegressorMixin, BaseEstimator):
    """Estimator wrapper around :func:`vector_fit`.

    ``fit(omega, y)`` takes real angular frequencies and complex responses
    sampled on s = i*omega; ``predict(omega)`` evaluates the fitted model.

    Parameters
    ----------
    n_poles : int
        Number of poles (and zeros) of the rational model.
    iterations : int
        Maximum number of pole relocation rounds.
    constant : complex or None
        Pin the high-frequency constant; ``None`` fits it.
    """

    def __init__(self, n_poles=3, iterations=20, constant=None):
        self.n_poles = n_poles
        self.iterations = iterations
        self.constant = constant

    def fit(self, X, y, sample_weight=None):
        omega = np.asarray(X, dtype=float).reshape(-1)
        problem = FitProblem(1j * omega, y, self.n_poles, self.iterations,
                             sample_weight, self.constant)
        report = vector_fit(problem)
        self.zpk_ = report.zpk
        self.poles_ = report.poles
        self.residues_ = report.residues
        self.constant_ = report.constant
        self.max_rel_err_ = report.max_rel_err
        self.n_iter_ = len(report.pole_history) - 1
        return self

    def predict(self, X):
        check_is_fitted(self, "zpk_")
        omega = np.asarray(X, dtype=float).reshape(-1)
        return np.asarray(zpk_eval(self.zpk_, 1j * omega))

    def score(self, X, y, sample_weight=None):
        """Negative maximum relative error (higher is better)."""
        y = np.asarray(y, dtype=complex)
        pred = self.predict(X)
        return -float(np.max(np.abs(pred - y) / np.abs(y)))
