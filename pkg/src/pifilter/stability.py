"""Open-loop gain of the coupled cavities and an automated Nyquist test.

The closed loop is stable when 1 + T_OL(s) has no zeros with Re(s) > 0.
The contour runs up the imaginary axis over [-Omega, Omega]; the closing
arc contributes less than half a turn as long as the loop gain stays
below one in modulus beyond Omega, which holds whenever the asymptotic
round-trip gain ``tail_gain`` is below one.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, IndeterminateVerdictError
from .gains import gain_squared, pt_to_zpk
from .model import (
    ZPK,
    Detuned,
    GainModel,
    InterferometerConfig,
    Optimal,
    PTSymmetric,
    Rational,
    Unity,
    derive_rates,
)
from .transfer import DelayMode, propagator

MAX_STEP = math.radians(10.0)


@dataclass
class NyquistReport:
    N: int
    P: int
    rho_min: float
    omega_max: float
    tail_gain: float
    omega: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)

    @property
    def Z(self) -> int:
        return self.N + self.P

    @property
    def stable(self) -> bool:
        return self.Z == 0 and self.rho_min > 0 and self.tail_gain < 1

    def verdict(self) -> dict:
        return {"N": self.N, "P": self.P, "Z": self.Z, "rho_min": self.rho_min,
                "stable": self.stable, "omega_max": self.omega_max,
                "tail_gain": self.tail_gain}


def sensing_reflectance(rates, s, mode=DelayMode.EXACT, loss=0.0):
    Zs2 = propagator(rates.tau_s, s, mode, loss) ** 2
    return (Zs2 - rates.r_CM) / (1 - rates.r_CM * Zs2)


def open_loop(config: InterferometerConfig, model: GainModel, s, mode=DelayMode.EXACT, rates=None):
    """T_OL = r_IM G^2 Z_f^2 r_s, with losses folded into the propagators."""
    rates = rates or derive_rates(config)
    s = np.asarray(s, dtype=complex)
    Zf = propagator(rates.tau_f, s, mode, config.Lambda_f)
    rs = sensing_reflectance(rates, s, mode, config.Lambda_s)
    out = rates.r_IM * gain_squared(model, s, rates) * Zf * Zf * rs
    return out[()] if np.ndim(out) == 0 else out


def _as_zpk(model: GainModel, rates) -> ZPK | None:
    if isinstance(model, Rational):
        return model.zpk
    if isinstance(model, PTSymmetric):
        return pt_to_zpk(model.f_m, model.Q_m, model.g, rates.tau_f)
    return None


def count_unstable_open_poles(model: GainModel, margin: float = 0.0, rates=None) -> int:
    """Poles of T_OL with Re(s) > -margin.

    Each rational-gain pole enters G^2 twice. The optimal gain contributes
    its single pole of G^2 = (s + g)/(s - g). The sensing-cavity reflectance
    has all its poles at Re(s) = ln(r_CM)/(2 tau_s) < 0 and adds nothing.
    """
    if isinstance(model, (Unity, Detuned)):
        return 0
    if isinstance(model, Optimal):
        return 1
    if isinstance(model, (Rational, PTSymmetric)):
        if isinstance(model, PTSymmetric) and rates is None:
            raise ConfigError("counting PT-filter poles needs the derived rates")
        zpk = _as_zpk(model, rates)
        if zpk.k == 0:
            return 0
        return 2 * sum(1 for p in zpk.poles if p.real > -margin)
    raise ConfigError(f"cannot count poles of {model!r}")


def high_frequency_gain(model: GainModel, rates=None) -> float:
    if isinstance(model, Rational):
        return abs(model.zpk.k)
    return 1.0


def default_omega_max(model: GainModel, rates) -> float:
    omega = 10 * math.pi / rates.tau_s
    zpk = _as_zpk(model, rates)
    if zpk is not None and zpk.order:
        extent = max(abs(x) for x in (*zpk.zeros, *zpk.poles))
        omega = max(omega, 4 * extent)
    return omega


def _feature_points(center, width, omega_max):
    offsets = width * np.logspace(-2, 3, 40)
    pts = np.concatenate([[center], center - offsets, center + offsets])
    return pts[np.abs(pts) <= omega_max]


def _base_grid(model, rates, config, omega_max):
    tiny = 1e-6 * rates.gamma_s
    pos = [np.logspace(math.log10(tiny), math.log10(omega_max), 600),
           np.linspace(0, omega_max, 2001)]
    # sensing-cavity resonances every pi/tau_s
    fsr = math.pi / rates.tau_s
    loss_rate = -math.log(max(rates.r_CM * (1 - config.Lambda_s), 1e-300)) / (2 * rates.tau_s)
    for k in range(int(omega_max / fsr) + 1):
        pos.append(_feature_points(k * fsr, loss_rate, omega_max))
    fsr_f = math.pi / rates.tau_f
    for k in range(1, int(omega_max / fsr_f) + 1):
        pos.append(_feature_points(k * fsr_f, rates.gamma_f, omega_max))
    pos = np.abs(np.concatenate(pos))
    grid = [-pos, pos]
    zpk = _as_zpk(model, rates)
    if zpk is not None:
        for x in (*zpk.poles, *zpk.zeros):
            grid.append(_feature_points(x.imag, max(abs(x.real), tiny), omega_max))
    if isinstance(model, Optimal):
        grid.append(_feature_points(0.0, rates.gamma_s, omega_max))
    grid = np.unique(np.concatenate(grid))
    return grid[(grid >= -omega_max) & (grid <= omega_max)]


def _contour_points(omega, axis_poles, radius):
    """Map omega to s, detouring right of imaginary-axis poles on semicircles."""
    s = 1j * omega.astype(complex)
    for wp in axis_poles:
        d = omega - wp
        near = np.abs(d) < radius
        s[near] = 1j * omega[near] + np.sqrt(radius**2 - d[near] ** 2)
    return s


GOLDEN = (math.sqrt(5) - 1) / 2


def _polish_minima(F, w, v, n_candidates=8, n_iter=40):
    """Refine the closest approaches of 1 + T_OL to the critical point.

    Golden-section search on |F| runs in parallel inside the bracketing
    intervals of the ``n_candidates`` smallest local minima; the refined
    points join the sample set so rho_min does not depend on the grid.
    """
    mag = np.abs(v)
    interior = np.arange(1, w.size - 1)
    local = interior[(mag[interior] <= mag[interior - 1]) & (mag[interior] <= mag[interior + 1])]
    if local.size == 0:
        return w, v
    local = local[np.argsort(mag[local])[:n_candidates]]
    lo, hi = w[local - 1].copy(), w[local + 1].copy()
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = np.abs(F(x1)), np.abs(F(x2))
    extra_w, extra_v = [], []
    for _ in range(n_iter):
        left = f1 < f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        x_new = np.where(left, hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo))
        v_new = F(x_new)
        extra_w.append(x_new)
        extra_v.append(v_new)
        x2, f2, x1, f1 = (np.where(left, x1, x_new), np.where(left, f1, np.abs(v_new)),
                          np.where(left, x_new, x2), np.where(left, np.abs(v_new), f2))
    w = np.concatenate([w, *extra_w])
    v = np.concatenate([v, *extra_v])
    w, idx = np.unique(w, return_index=True)
    return w, v[idx]


def nyquist(
    config: InterferometerConfig,
    model: GainModel,
    omega_max: float | None = None,
    mode=DelayMode.EXACT,
    rates=None,
    max_depth: int = 24,
) -> NyquistReport:
    """Map the imaginary axis through 1 + T_OL and count encirclements of -1.

    Samples are refined by interval bisection until every phase step of
    1 + T_OL seen from the critical point is below 10 degrees. N counts
    clockwise turns; P is the open-loop unstable pole count.
    """
    rates = rates or derive_rates(config)
    omega_max = float(omega_max or default_omega_max(model, rates))
    zpk = _as_zpk(model, rates)
    radius = 1e-6 * rates.gamma_s
    axis_poles = [p.imag for p in zpk.poles if p.real == 0] if zpk is not None else []

    def F(w):
        return 1 + open_loop(config, model, _contour_points(w, axis_poles, radius), mode, rates)

    w = _base_grid(model, rates, config, omega_max)
    v = F(w)
    for _ in range(max_depth):
        step = np.abs(np.angle(v[1:] / v[:-1]))
        bad = np.nonzero((step > MAX_STEP) & (np.diff(w) > 1e-12 * omega_max))[0]
        if bad.size == 0:
            break
        mids = 0.5 * (w[bad] + w[bad + 1])
        w = np.concatenate([w, mids])
        v = np.concatenate([v, F(mids)])
        order = np.argsort(w, kind="stable")
        w, v = w[order], v[order]

    w, v = _polish_minima(F, w, v)

    steps = np.angle(v[1:] / v[:-1])
    if np.any(np.abs(steps) > math.pi / 2):
        raise IndeterminateVerdictError(
            "Nyquist contour unresolved near the critical point after maximal refinement")
    turns = -steps.sum() / (2 * math.pi)
    N = int(round(turns))
    P = count_unstable_open_poles(model, 0.0, rates)
    tail_gain = rates.r_IM * high_frequency_gain(model, rates) ** 2 * (1 - config.Lambda_f)
    return NyquistReport(
        N=N,
        P=P,
        rho_min=float(np.min(np.abs(v))),
        omega_max=omega_max,
        tail_gain=float(tail_gain),
        omega=w,
        values=v - 1,
    )
