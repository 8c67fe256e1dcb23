"""Constrained Nelder-Mead search for high-enhancement, stable filters.

The search vector holds the real and imaginary parts of every zero and
pole (rad/s) followed by log K, so the gain stays real and positive.
Instability is handled by a large additive penalty rather than explicit
constraints; the simplex method never accepts a penalized point as its
best vertex once a feasible one is known.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize
from sklearn.base import BaseEstimator

from .errors import IndeterminateVerdictError, InfeasibleSeedError, QuadratureError
from .model import ZPK, InterferometerConfig, Rational, derive_rates
from .response import GLOBAL, default_band, integral_enhancement
from .stability import NyquistReport, nyquist
from .transfer import DelayMode
from .validation import check_zpk_vector

logger = logging.getLogger(__name__)

PENALTY_WEIGHT = 1e8
MARGIN_UG = 2 * math.pi * 1e-2  # rad/s
MARGIN_RHO = 1e-4
# relative slack on the margin when re-checking on a different contour
RECHECK_RTOL = 1e-6


@dataclass(frozen=True)
class CostOptions:
    weight: float = PENALTY_WEIGHT
    margin_ug: float = MARGIN_UG
    margin_rho: float = MARGIN_RHO
    band: tuple | None = None
    mode: DelayMode = DelayMode.EXACT
    rtol: float = 1e-4


@dataclass(frozen=True)
class CostBreakdown:
    neg_normalized_I: float
    n_ug: int
    n_ucl: int
    rho_penalty: float
    total: float
    phi_lo: float | None = None
    report: NyquistReport | None = field(default=None, repr=False, compare=False)

    @property
    def feasible(self) -> bool:
        return self.n_ug == 0 and self.n_ucl == 0 and self.rho_penalty == 0

    def violations(self) -> list[str]:
        out = []
        if self.n_ug:
            out.append(f"{self.n_ug} filter pole(s) inside the unity-gain margin")
        if self.n_ucl:
            out.append(f"closed loop unstable (penalty count {self.n_ucl})")
        if self.rho_penalty:
            out.append(f"Nyquist contour within the stability margin (penalty {self.rho_penalty:.3g})")
        return out


def closed_loop_penalty(report: NyquistReport) -> int:
    """Unstable closed-loop count used by the cost.

    Encirclements in either direction count, and an asymptotic loop gain
    of one or more adds one: the contour alone cannot certify such a loop.
    """
    return abs(report.Z) + (report.tail_gain >= 1)


def cost(config: InterferometerConfig, zeros, poles, k, opts: CostOptions = CostOptions(),
         rates=None, with_report=False) -> CostBreakdown:
    """Negative normalized integral enhancement plus stability penalties."""
    rates = rates or derive_rates(config)
    if not k > 0:
        raise ValueError(f"gain must be positive, got {k}")
    zpk = ZPK(tuple(zeros), tuple(poles), float(k))
    model = Rational(zpk)
    n_ug = sum(1 for p in zpk.poles if p.real > -opts.margin_ug)
    band = opts.band or default_band(rates)
    try:
        enh = integral_enhancement(config, model, GLOBAL, band, opts.mode, opts.rtol, rates)
    except QuadratureError as exc:
        exc.params = zpk
        raise
    try:
        report = nyquist(config, model, mode=opts.mode, rates=rates)
        n_ucl = closed_loop_penalty(report)
        rho = report.rho_min
    except IndeterminateVerdictError:
        report, n_ucl, rho = None, 1, 0.0
    rho_penalty = 0.0 if rho >= opts.margin_rho else 1 - rho / opts.margin_rho
    total = -enh.normalized + opts.weight * (n_ug + n_ucl + rho_penalty)
    return CostBreakdown(-enh.normalized, n_ug, n_ucl, rho_penalty, total, enh.phi_lo,
                         report if with_report else None)


def condition_seed(zpk: ZPK, band_hi: float, margin_ug: float = MARGIN_UG) -> ZPK:
    """Make a filter usable as a search seed without changing its in-band response.

    Poles inside the unity-gain margin move out to twice the margin. A pole
    beyond ``band_hi`` (rad/s) is replaced by the mirror image of its nearest
    zero, which turns that pair into an all-pass section: the pair leaves
    the loop gain at one instead of resonating far above the band.
    """
    zeros = list(zpk.zeros)
    poles = []
    for p in zpk.poles:
        if abs(p.imag) > band_hi and zeros:
            z = min(zeros, key=lambda z: abs(z - p))
            p = complex(-abs(z.real), z.imag) if z.real != 0 else p
        if p.real > -margin_ug:
            p = complex(-2 * margin_ug, p.imag)
        poles.append(p)
    return ZPK(tuple(zeros), tuple(poles), zpk.k)


# --------------------------------------------------------------------------
# parameter packing


def pack(zpk: ZPK) -> np.ndarray:
    z = np.asarray(zpk.zeros, dtype=complex)
    p = np.asarray(zpk.poles, dtype=complex)
    return np.concatenate([z.real, z.imag, p.real, p.imag, [math.log(abs(zpk.k))]])


def unpack(x, n_zeros: int, n_poles: int) -> ZPK:
    x = check_zpk_vector(x, n_zeros, n_poles)
    nz, np_ = n_zeros, n_poles
    zeros = x[:nz] + 1j * x[nz:2 * nz]
    poles = x[2 * nz:2 * nz + np_] + 1j * x[2 * nz + np_:2 * nz + 2 * np_]
    return ZPK(tuple(zeros), tuple(poles), math.exp(x[-1]))


# --------------------------------------------------------------------------
# Nelder-Mead


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    n_iter: int
    n_evals: int
    converged: bool
    trace: list


def nelder_mead(f, x0, tol=1e-9, max_iter=5000, init_scale=0.05, floor=1e-2,
                callback=None) -> SimplexResult:
    """Minimize ``f`` with the standard simplex method.

    The starting simplex displaces each coordinate by ``init_scale`` of its
    magnitude (at least ``floor``). The search runs on coordinates divided
    by max(1, |x0|), so ``tol`` bounds the simplex diameter relative to the
    seed's magnitude; iteration also stops after ``max_iter`` iterations.
    """
    x0 = np.asarray(x0, dtype=float)
    n = x0.size
    unit = np.maximum(1.0, np.abs(x0))
    simplex = np.tile(x0, (n + 1, 1))
    simplex[1:] += np.diag(np.maximum(init_scale * np.abs(x0), floor))
    trace = []

    def scaled(y):
        return f(y * unit)

    def record(intermediate_result):
        trace.append((len(trace) + 1, float(intermediate_result.fun)))
        if callback is not None:
            callback(len(trace), intermediate_result.x * unit, intermediate_result.fun)

    res = minimize(scaled, x0 / unit, method="Nelder-Mead", callback=record,
                   options={"initial_simplex": simplex / unit, "xatol": tol,
                            "fatol": np.inf, "maxiter": max_iter, "maxfev": np.inf})
    return SimplexResult(res.x * unit, float(res.fun), int(res.nit), int(res.nfev),
                         bool(res.success), trace)


# --------------------------------------------------------------------------
# driver


@dataclass
class OptimizationResult:
    zpk: ZPK
    phi_lo_opt: float
    normalized_I: float
    report: NyquistReport
    iterations: int
    converged: bool
    trace: list
    seed: ZPK
    options: dict
    stable: bool = True

    @property
    def normalized_I_db(self) -> float:
        return 10 * math.log10(self.normalized_I)

    def to_json_dict(self) -> dict:
        return {
            "zpk": self.zpk.to_json_dict("hz"),
            "phi_lo_rad": self.phi_lo_opt,
            "normalized_I": self.normalized_I,
            "normalized_I_db": self.normalized_I_db,
            "stability": self.report.verdict(),
            "converged": self.converged,
            "iterations": self.iterations,
            "trace": [[i, c] for i, c in self.trace],
            "seed": self.seed.to_json_dict("hz"),
            "options": self.options,
        }


def _options_dict(opts: CostOptions, **search) -> dict:
    d = asdict(opts)
    d["mode"] = opts.mode.value
    d["band"] = list(opts.band) if opts.band else None
    d.update(search)
    return d


def optimize_filter(config: InterferometerConfig, initial: ZPK, opts: CostOptions = CostOptions(),
                    tol=1e-9, max_iter=5000, init_scale=0.05, floor=1e-2,
                    rates=None) -> OptimizationResult:
    """Maximize the integral enhancement over stable rational filters.

    Raises
    ------
    InfeasibleSeedError
        If the initial filter already violates a stability check.
    """
    rates = rates or derive_rates(config)
    if not initial.k or np.iscomplexobj(initial.k) and np.imag(initial.k) != 0 or initial.k.real <= 0:
        raise InfeasibleSeedError(f"seed gain must be real and positive, got {initial.k}")
    start = cost(config, initial.zeros, initial.poles, initial.k, opts, rates)
    if not start.feasible:
        raise InfeasibleSeedError("infeasible seed: " + "; ".join(start.violations()), start)
    nz, np_ = len(initial.zeros), len(initial.poles)

    def objective(x):
        z = unpack(x, nz, np_)
        return cost(config, z.zeros, z.poles, z.k, opts, rates).total

    res = nelder_mead(objective, pack(initial), tol, max_iter, init_scale, floor)
    best = unpack(res.x, nz, np_)
    final = cost(config, best.zeros, best.poles, best.k, opts, rates, with_report=True)
    # independent confirmation on a wider contour
    check = nyquist(config, Rational(best), omega_max=2 * final.report.omega_max,
                    mode=opts.mode, rates=rates)
    stable = (final.feasible and closed_loop_penalty(check) == 0
              and check.N == final.report.N
              and check.rho_min >= opts.margin_rho * (1 - RECHECK_RTOL))
    if not stable:
        logger.warning("optimized filter failed the doubled-contour stability re-check")
    options = _options_dict(opts, tol=tol, max_iter=max_iter, init_scale=init_scale, floor=floor)
    return OptimizationResult(best, final.phi_lo, -final.neg_normalized_I, check,
                              res.n_iter, res.converged and stable, res.trace,
                              initial, options, stable)


class FilterOptimizer(BaseEstimator):
    """Estimator front end to :func:`optimize_filter`.

    ``fit()`` runs the search from ``seed``; results land in ``zpk_``,
    ``phi_lo_``, ``normalized_I_`` and ``result_``.
    """

    def __init__(self, config=None, seed=None, band=None, max_iter=5000, tol=1e-9,
                 init_scale=0.05, delay="exact"):
        self.config = config
        self.seed = seed
        self.band = band
        self.max_iter = max_iter
        self.tol = tol
        self.init_scale = init_scale
        self.delay = delay

    def fit(self, X=None, y=None):
        if self.seed is None:
            raise ValueError("FilterOptimizer needs a seed ZPK")
        config = self.config or InterferometerConfig()
        opts = CostOptions(band=self.band, mode=DelayMode.parse(self.delay))
        result = optimize_filter(config, self.seed, opts, self.tol, self.max_iter, self.init_scale)
        self.result_ = result
        self.zpk_ = result.zpk
        self.phi_lo_ = result.phi_lo_opt
        self.normalized_I_ = result.normalized_I
        return self

    def score(self, X=None, y=None):
        return self.normalized_I_
