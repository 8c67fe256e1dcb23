"""SNR enhancement chi^2(omega), homodyne-angle optimization and integrals.

The homodyne signal at angle phi is a quadratic form in (sin phi, cos phi):

    S(phi) = a sin^2 phi + b cos^2 phi + 2 c sin phi cos phi

with a = |T1|^2, b = |T2|^2 and c = Re(T1 * conj(i T2)). Everything below
works on the normalized components (a, b, c) / noise so that fixed,
per-frequency-optimal and globally optimal angles share one code path.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .model import DerivedRates, GainModel, InterferometerConfig, derive_rates
from .quadrature import integrate_log_strict
from .gains import optimal_gain
from .transfer import DelayMode, TransferSet, transfer_set, transfer_set_from_gain

PER_FREQUENCY = "per-frequency"
GLOBAL = "global"


@dataclass(frozen=True)
class ChiPoint:
    omega: np.ndarray
    chi_sq: np.ndarray
    phi_lo: np.ndarray

    @property
    def chi_db(self):
        return 10 * np.log10(self.chi_sq)


@dataclass(frozen=True)
class EnhancementIntegral:
    value: float
    normalized: float
    band: tuple
    phi_lo: float | None = None
    achieved_rtol: float = 0.0
    n_evals: int = 0

    @property
    def normalized_db(self) -> float:
        return 10 * math.log10(self.normalized)


def _quadrature_pieces(ts_plus: TransferSet, ts_minus: TransferSet):
    t_plus = np.asarray(ts_plus.T_xi)
    t_minus_c = np.conj(np.asarray(ts_minus.T_xi))
    A = t_plus + t_minus_c
    B = 1j * (t_plus - t_minus_c)
    return A, B


def signal_psd_ratio(ts_plus: TransferSet, ts_minus: TransferSet, phi_lo):
    """|T1 sin(phi) + i T2 cos(phi)|^2 from the +i*w and -i*w transfer sets."""
    A, B = _quadrature_pieces(ts_plus, ts_minus)
    return np.abs(A * np.sin(phi_lo) + B * np.cos(phi_lo)) ** 2


def noise_psd_ratio(ts_plus: TransferSet, ts_minus: TransferSet):
    total = 0.0
    for tp, tm in zip(ts_plus.noise_terms(), ts_minus.noise_terms()):
        total = total + np.abs(tp) ** 2 + np.abs(tm) ** 2
    return total


def homodyne_components(config, model, omega, mode=DelayMode.EXACT, rates=None):
    """Normalized quadratic-form entries (a, b, c) of the homodyne SNR at ``omega``.

    Returns an array of shape (3, n); chi^2(phi) = a s^2 + b c^2 + 2 c s c.
    """
    rates = rates or derive_rates(config)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    ts_plus = transfer_set(config, model, 1j * w, mode, rates)
    ts_minus = transfer_set(config, model, -1j * w, mode, rates)
    return _components(ts_plus, ts_minus)


def homodyne_components_from_gain(config, gain_plus, gain_minus, omega, mode=DelayMode.EXACT,
                                  rates=None):
    """Same as :func:`homodyne_components` for gain values given at +i*w and -i*w."""
    rates = rates or derive_rates(config)
    w = np.atleast_1d(np.asarray(omega, dtype=float))
    ts_plus = transfer_set_from_gain(config, rates, np.asarray(gain_plus, dtype=complex), 1j * w, mode)
    ts_minus = transfer_set_from_gain(config, rates, np.asarray(gain_minus, dtype=complex), -1j * w, mode)
    return _components(ts_plus, ts_minus)


def _components(ts_plus, ts_minus):
    A, B = _quadrature_pieces(ts_plus, ts_minus)
    noise = noise_psd_ratio(ts_plus, ts_minus)
    return np.stack([np.abs(A) ** 2, np.abs(B) ** 2, np.real(A * np.conj(B))]) / noise


def best_angle(a, b, c):
    """Maximizer in [0, pi) and maximum of a s^2 + b c^2 + 2 c s c."""
    phi = 0.5 * np.arctan2(2 * c, b - a)
    phi = np.mod(phi, np.pi)
    top = 0.5 * (a + b) + np.sqrt((0.5 * (a - b)) ** 2 + c * c)
    return phi, top


def _form(abc, phi):
    a, b, c = abc
    s, co = np.sin(phi), np.cos(phi)
    return a * s * s + b * co * co + 2 * c * s * co


def chi_sq(config, model, omega, phi_lo=PER_FREQUENCY, mode=DelayMode.EXACT, rates=None) -> ChiPoint:
    """chi^2 at ``omega`` (rad/s) for a fixed angle or the per-frequency optimum."""
    abc = homodyne_components(config, model, omega, mode, rates)
    if isinstance(phi_lo, str):
        if phi_lo != PER_FREQUENCY:
            raise ValueError("chi_sq takes a fixed angle or 'per-frequency'")
        phi, val = best_angle(*abc)
    else:
        phi = np.full(abc.shape[1], float(phi_lo))
        val = _form(abc, phi)
    if np.ndim(omega) == 0:
        return ChiPoint(float(omega), float(val[0]), float(phi[0]))
    return ChiPoint(np.asarray(omega, dtype=float), val, phi)


def optimal_homodyne_at(config, model, omega, mode=DelayMode.EXACT, rates=None):
    """Angle maximizing chi^2 at a single frequency and the maximal chi^2."""
    a, b, c = homodyne_components(config, model, [omega], mode, rates)[:, 0]
    phi, top = best_angle(a, b, c)
    return float(phi), float(top)


def default_band(rates: DerivedRates):
    return (0.0, math.pi / (2 * rates.tau_s))


def integral_enhancement(
    config: InterferometerConfig,
    model: GainModel,
    homodyne=GLOBAL,
    band=None,
    mode=DelayMode.EXACT,
    rtol=1e-4,
    rates=None,
) -> EnhancementIntegral:
    """Integral of chi^2 over ``band`` (rad/s), raw and normalized by pi/tau_s.

    ``homodyne`` is a fixed angle in radians, ``"global"`` (one angle chosen
    to maximize the integral) or ``"per-frequency"``.
    """
    rates = rates or derive_rates(config)
    lo, hi = band if band is not None else default_band(rates)
    if lo < 0 or hi <= lo or hi > math.pi / rates.tau_s * (1 + 1e-12):
        raise ValueError(f"band {band} must lie within [0, pi/tau_s]")
    flat = lo == 0
    start = min(1e-3 * rates.omega_nb, 1e-9 * hi) if flat else lo

    if homodyne == GLOBAL:
        def f(w):
            return homodyne_components(config, model, w, mode, rates)
    elif homodyne == PER_FREQUENCY:
        def f(w):
            return best_angle(*homodyne_components(config, model, w, mode, rates))[1][None]
    else:
        angle = float(homodyne)

        def f(w):
            return _form(homodyne_components(config, model, w, mode, rates), angle)[None]

    res = integrate_log_strict(f, start, hi, rtol=rtol, flat_below=flat)
    phi = None
    if homodyne == GLOBAL:
        phi, value = best_angle(*res.value)
        phi, value = float(phi), float(value)
    else:
        value = float(res.value[0])
        if homodyne != PER_FREQUENCY:
            phi = float(homodyne)
    return EnhancementIntegral(value, value / rates.I0, (lo, hi), phi, res.error, res.n_evals)


# --------------------------------------------------------------------------
# closed-form approximations


def chi_approx(kind: str, rates: DerivedRates, omega):
    """Closed-form enhancement chi (amplitude, not squared).

    kind: ``nb`` passive narrowband, ``bb`` passive broadband, ``bb2``
    broadband with coupled-cavity correction, ``opt`` optimal filter,
    ``opt2`` optimal with filter-cavity correction, ``pt_infQ`` PT filter
    with an ideal mechanical oscillator.
    """
    w = np.asarray(omega, dtype=float)
    t_IM, t_CM = rates.t_IM, rates.t_CM
    X_nb = 4 * math.sqrt(2) / (t_IM * t_CM)
    X_bb = math.sqrt(2) * t_IM / t_CM
    g_s, g_f = rates.gamma_s, rates.gamma_f
    w_nb, w_bb = rates.omega_nb, rates.omega_bb
    if kind == "nb":
        return X_nb / np.sqrt(1 + (w / w_nb) ** 2)
    if kind == "bb":
        return X_bb / np.sqrt(1 + (w / w_bb) ** 2)
    if kind == "bb2":
        bracket = 1 + (w**2 - 2 * w_bb * g_f) / g_f**2
        return X_bb / np.sqrt(1 + (w / w_bb) ** 2 * bracket)
    if kind == "opt":
        return X_nb / np.sqrt(1 + (w / g_s) ** 2)
    if kind == "opt2":
        return X_nb / np.sqrt(1 + (w / g_s) ** 2 * (1 + (w / g_f) ** 2))
    if kind == "pt_infQ":
        ts, tf = rates.tau_s, rates.tau_f
        den = (t_CM**8 + 48 * t_CM**4 * t_IM**2 * ts**2 * w**2
               + 64 * ts**4 * w**4 * (t_IM**4 + 16 * tf**2 * w**2))
        return 8 * math.sqrt(2) * t_CM * t_IM * ts * w / np.sqrt(den)
    raise ValueError(f"unknown approximation kind {kind!r}")


def dc_levels(rates: DerivedRates):
    return 4 * math.sqrt(2) / (rates.t_IM * rates.t_CM), math.sqrt(2) * rates.t_IM / rates.t_CM


def chi_rel(epsilon: float, t_IM: float) -> float:
    """Relative enhancement for gain magnitude 1 + epsilon at optimal phase."""
    if not 0 < t_IM < 1:
        raise ValueError("t_IM must lie in (0, 1)")
    if abs(epsilon) > 0.5:
        warnings.warn(f"chi_rel is a small-deviation formula; |epsilon|={abs(epsilon)} > 0.5",
                      RuntimeWarning, stacklevel=2)
    t2 = t_IM * t_IM
    cross = (-4.0 if epsilon < 0 else 12.0) * t2 * epsilon * (epsilon + 2)
    return t2 / math.sqrt(t2 * t2 + 16 * epsilon * epsilon + cross)


def relative_enhancement(config, epsilon, omega, mode=DelayMode.EXACT, rates=None):
    """Full-model enhancement ratio chi(G)/chi(G_opt) for G = (1 + epsilon) G_opt.

    ``epsilon`` may be an array; the readout angle is optimized per point.
    """
    rates = rates or derive_rates(config)
    eps = np.atleast_1d(np.asarray(epsilon, dtype=float))
    w = np.full(eps.shape, float(omega))
    g_plus = optimal_gain(1j * w, rates.gamma_s)
    g_minus = optimal_gain(-1j * w, rates.gamma_s)
    ref = best_angle(*homodyne_components_from_gain(config, g_plus[:1], g_minus[:1], w[:1],
                                                    mode, rates))[1]
    top = best_angle(*homodyne_components_from_gain(config, (1 + eps) * g_plus, (1 + eps) * g_minus,
                                                    w, mode, rates))[1]
    return np.sqrt(top / ref)


def pt_bounds(rates: DerivedRates, omega):
    """High- and low-frequency upper bounds on the PT-filter enhancement chi."""
    w = np.asarray(omega, dtype=float)
    wt = w * rates.tau_s
    with np.errstate(divide="ignore"):
        hf = math.sqrt(2) * (rates.t_CM / rates.t_IM) / wt
    lf = 8 * rates.t_IM / rates.t_CM**3 * wt
    return hf, lf


def analytic_limits(rates: DerivedRates) -> dict:
    """Closed-form corner frequencies, DC levels and integral limits."""
    X_nb, X_bb = dc_levels(rates)
    return {
        "gamma_s": rates.gamma_s,
        "gamma_s_hz": rates.gamma_s / (2 * math.pi),
        "gamma_f": rates.gamma_f,
        "omega_nb": rates.omega_nb,
        "omega_bb": rates.omega_bb,
        "X_nb": X_nb,
        "X_bb": X_bb,
        "I0": rates.I0,
        "I_opt_over_I0": 4 / rates.t_IM**2,
        "I_PT_over_I0": 1 / rates.t_IM,
    }
