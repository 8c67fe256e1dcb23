"""Cavity propagators and signal/noise transfer functions to the output port."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import SingularEvaluationError
from .gains import gain
from .model import DerivedRates, GainModel, InterferometerConfig, derive_rates


class DelayMode(enum.Enum):
    EXACT = "exact"
    SECOND_ORDER = "second-order"

    @classmethod
    def parse(cls, value) -> "DelayMode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("_", "-"))


def propagator(tau, s, mode=DelayMode.EXACT, loss=0.0):
    """One-way delay exp(-s*tau), optionally Taylor-truncated, times sqrt(1 - loss)."""
    s = np.asarray(s, dtype=complex)
    x = s * tau
    if DelayMode.parse(mode) is DelayMode.EXACT:
        z = np.exp(-x)
    else:
        z = 1 - x + x * x / 2
    z = z * np.sqrt(1.0 - loss)
    return z[()] if z.ndim == 0 else z


@dataclass(frozen=True)
class TransferSet:
    """Transfer functions from signal and each noise source to the output.

    Every field is a complex scalar or an array broadcast against ``s``.
    ``denominator`` is the shared resonance denominator.
    """

    T_xi: np.ndarray
    T_nq: np.ndarray
    T_na1: np.ndarray
    T_na2: np.ndarray
    T_nLo: np.ndarray
    T_nLf: np.ndarray
    T_nLs: np.ndarray
    denominator: np.ndarray

    def noise_terms(self):
        return (self.T_nq, self.T_na1, self.T_na2, self.T_nLo, self.T_nLf, self.T_nLs)


def transfer_set(
    config: InterferometerConfig,
    model: GainModel,
    s,
    mode=DelayMode.EXACT,
    rates: DerivedRates | None = None,
) -> TransferSet:
    rates = rates or derive_rates(config)
    s = np.asarray(s, dtype=complex)
    G = np.asarray(gain(model, s, rates), dtype=complex)
    return transfer_set_from_gain(config, rates, G, s, mode)


def transfer_set_from_gain(config, rates, G, s, mode=DelayMode.EXACT) -> TransferSet:
    """Same as :func:`transfer_set` for precomputed gain values ``G`` at ``s``."""
    s = np.asarray(s, dtype=complex)
    Zf = propagator(rates.tau_f, s, mode, config.Lambda_f)
    Zs_bare = propagator(rates.tau_s, s, mode)
    Zs = Zs_bare * np.sqrt(1.0 - config.Lambda_s)
    Zf2, Zs2 = Zf * Zf, Zs * Zs
    G0 = np.abs(G)
    # added-noise coupling magnitude |sqrt(1 - G0^2)|, phase fixed to zero
    k_add = np.sqrt(np.abs(1.0 - G0 * G0))

    r_CM, r_IM, t_CM, t_IM, eta = rates.r_CM, rates.r_IM, rates.t_CM, rates.t_IM, rates.eta
    sens = -1 + r_CM * Zs2
    refl = r_CM - Zs2
    D = sens + G * G * r_IM * Zf2 * refl
    # cancellation below a few ulps of the summed terms is a true resonance
    scale = 1 + np.abs(sens) + np.abs(G * G) * r_IM * np.abs(Zf2 * refl)
    hit = np.abs(D) <= 64 * np.finfo(float).eps * scale
    if np.any(hit):
        raise SingularEvaluationError("resonance: transfer denominator vanishes", s=s[hit])

    inv = 1.0 / D
    T_xi = -eta * G * t_CM * t_IM * Zf * Zs * inv
    T_nq = eta * (G * G * Zf2 * refl + r_IM * sens) * inv
    T_na1 = eta * G * k_add * t_IM * Zf2 * refl * inv
    T_na2 = eta * np.sqrt(1.0 - config.Lambda_f) * k_add * t_IM * sens * inv
    T_nLo = np.full(np.shape(D), np.sqrt(config.Lambda_o), dtype=complex)
    T_nLf = eta * np.sqrt(config.Lambda_f) * t_IM * sens * inv
    T_nLs = -eta * G * t_CM * t_IM * Zf * Zs_bare * np.sqrt(config.Lambda_s) * inv
    return TransferSet(T_xi, T_nq, T_na1, T_na2, T_nLo, T_nLf, T_nLs, D)
