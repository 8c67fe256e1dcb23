"""Evaluation of filter-gain laws G(s) and rational conversion of the PT gain.

All evaluators accept scalars or numpy arrays of complex frequency ``s``
(rad/s) and broadcast.
"""

from __future__ import annotations

import cmath
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, SingularEvaluationError
from .model import (
    ZPK,
    DerivedRates,
    Detuned,
    GainModel,
    Optimal,
    PTSymmetric,
    Rational,
    Unity,
)


@dataclass(frozen=True)
class GainValue:
    value: complex

    @property
    def magnitude(self) -> float:
        return abs(self.value)

    @property
    def phase(self) -> float:
        return cmath.phase(self.value)


def _check_finite(result, s, what):
    if not np.all(np.isfinite(result)):
        bad = np.asarray(s)[~np.isfinite(result)] if np.ndim(result) else s
        raise SingularEvaluationError(f"{what} is singular at s={np.ravel(bad)[0]!r}", s=bad)
    return result


def zpk_eval(zpk: ZPK, s):
    """K * prod(s - z) / prod(s - p), one pass over the pole list."""
    s = np.asarray(s, dtype=complex)
    num = np.full(s.shape, zpk.k, dtype=complex)
    den = np.ones(s.shape, dtype=complex)
    for z in zpk.zeros:
        num = num * (s - z)
    for p in zpk.poles:
        den = den * (s - p)
    if np.any(den == 0):
        raise SingularEvaluationError("evaluation on a pole of the rational gain", s=s[den == 0])
    out = num / den
    return out[()] if out.ndim == 0 else out


def _pt_coupling_term(model: PTSymmetric, tau_f: float):
    return 4 * model.g**2 * tau_f * model.omega_m


def pt_gain(model: PTSymmetric, s, tau_f: float):
    """Optomechanical PT-symmetric gain.

    1 - i*4 g^2 tau_f w_m / ((s + gm)(s + gm - 2i w_m)). The coupling term
    carries a factor i; without it the phase would not track the optimal
    all-pass filter and the zero locations of the PT filter would not be
    -gamma_s and gamma_s + 2i w_m.
    """
    s = np.asarray(s, dtype=complex)
    gm, wm = model.gamma_m, model.omega_m
    den = (s + gm) * (s + gm - 2j * wm)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 1 - 1j * _pt_coupling_term(model, tau_f) / den
    return _check_finite(out, s, "PT-symmetric gain")


def optimal_gain(s, gamma_s: float):
    """Principal-branch sqrt((s + gamma_s) / (s - gamma_s)).

    The branch cut lies on the real segment [-gamma_s, gamma_s] so the
    gain is continuous along s = i*w for w > 0 and for w < 0 separately.
    """
    s = np.asarray(s, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sqrt((s + gamma_s) / (s - gamma_s))
    if np.any(s == gamma_s) or np.any(s == -gamma_s):
        raise SingularEvaluationError("optimal gain evaluated at a branch point", s=s)
    return _check_finite(out, s, "optimal gain")


def gain(model: GainModel, s, rates: DerivedRates):
    """Complex gain G(s) of ``model``, broadcasting over ``s``."""
    s = np.asarray(s, dtype=complex)
    if isinstance(model, Unity):
        out = np.ones(s.shape, dtype=complex)
    elif isinstance(model, Detuned):
        out = np.full(s.shape, cmath.exp(1j * model.phi), dtype=complex)
    elif isinstance(model, Optimal):
        out = optimal_gain(s, rates.gamma_s)
    elif isinstance(model, PTSymmetric):
        out = pt_gain(model, s, rates.tau_f)
    elif isinstance(model, Rational):
        out = np.asarray(zpk_eval(model.zpk, s))
    else:
        raise ConfigError(f"unknown gain model {model!r}")
    return out[()] if out.ndim == 0 else out


def gain_squared(model: GainModel, s, rates: DerivedRates):
    """G(s)**2, using the rational Moebius form for the optimal gain."""
    if isinstance(model, Optimal):
        s = np.asarray(s, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (s + rates.gamma_s) / (s - rates.gamma_s)
        out = _check_finite(out, s, "optimal gain squared")
        return out[()] if out.ndim == 0 else out
    return gain(model, s, rates) ** 2


def eval_gain(model: GainModel, s: complex, rates: DerivedRates) -> GainValue:
    return GainValue(complex(gain(model, complex(s), rates)))


def pt_to_zpk(f_m, Q_m, g, tau_f) -> ZPK:
    """Exact zero-pole-gain form of the PT-symmetric gain."""
    model = PTSymmetric(f_m=f_m, Q_m=Q_m, g=g)
    gm, wm = model.gamma_m, model.omega_m
    a = _pt_coupling_term(model, tau_f)
    # roots u of u**2 - 2i wm u - i a = 0, with u = s + gm
    disc = cmath.sqrt(-wm**2 + 1j * a)
    u1 = 1j * wm + disc if abs(1j * wm + disc) >= abs(1j * wm - disc) else 1j * wm - disc
    u2 = -1j * a / u1
    zeros = (u1 - gm, u2 - gm)
    poles = (complex(-gm), -gm + 2j * wm)
    return ZPK(zeros, poles, 1.0)


def stable_poles(zpk: ZPK, margin: float = 0.0) -> bool:
    return all(p.real < -margin for p in zpk.poles)


__all__ = [
    "GainValue",
    "eval_gain",
    "gain",
    "gain_squared",
    "optimal_gain",
    "pt_gain",
    "pt_to_zpk",
    "stable_poles",
    "zpk_eval",
]
