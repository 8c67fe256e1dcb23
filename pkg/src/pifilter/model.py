"""Interferometer configuration, derived cavity rates and filter-gain models."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Union

import numpy as np

from .errors import ConfigError

SPEED_OF_LIGHT = 299792458.0


@dataclass(frozen=True)
class InterferometerConfig:
    """Coupled-cavity geometry and loss budget, all in SI units.

    Power transmissions ``T_*`` and round-trip losses ``Lambda_*`` are
    dimensionless. ``wavelength`` only enters the pump-power conversion.
    """

    L_s: float = 4000.0
    L_f: float = 40.0
    T_IM: float = 0.02
    T_CM: float = 0.005
    T_EM: float = 0.0
    wavelength: float = 1.064e-6
    Lambda_o: float = 0.0
    Lambda_f: float = 0.0
    Lambda_s: float = 0.0

    def __post_init__(self):
        if not (self.L_s > 0 and self.L_f > 0):
            raise ConfigError(f"cavity lengths must be positive, got L_s={self.L_s}, L_f={self.L_f}")
        for name in ("T_IM", "T_CM", "T_EM"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ConfigError(f"{name} must lie in [0, 1], got {value}")
        for name in ("Lambda_o", "Lambda_f", "Lambda_s"):
            value = getattr(self, name)
            if not 0.0 <= value < 1.0:
                raise ConfigError(f"{name} must lie in [0, 1), got {value}")
        if self.wavelength <= 0:
            raise ConfigError("wavelength must be positive")

    @property
    def c(self) -> float:
        return SPEED_OF_LIGHT

    @property
    def lossless(self) -> bool:
        return self.Lambda_o == 0 and self.Lambda_f == 0 and self.Lambda_s == 0

    def with_losses(self, Lambda_o=0.0, Lambda_f=0.0, Lambda_s=0.0) -> "InterferometerConfig":
        return InterferometerConfig(**{**asdict(self), "Lambda_o": Lambda_o,
                                       "Lambda_f": Lambda_f, "Lambda_s": Lambda_s})

    def to_dict(self) -> dict:
        data = asdict(self)
        data["lambda"] = data.pop("wavelength")
        return data

    @classmethod
    def from_dict(cls, data: dict) -> "InterferometerConfig":
        """Build a config from a JSON-style mapping.

        Accepts ``lambda`` as an alias of ``wavelength``; unknown keys are an
        error so typos do not silently fall back to defaults. Missing loss
        fields default to zero.
        """
        data = dict(data)
        if "lambda" in data:
            data["wavelength"] = data.pop("lambda")
        data.pop("c", None)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        try:
            return cls(**{k: float(v) for k, v in data.items()})
        except (TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError(str(exc)) from exc


def load_config(path) -> InterferometerConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config document must be a JSON object")
    return InterferometerConfig.from_dict(data)


REFERENCE = InterferometerConfig()


@dataclass(frozen=True)
class DerivedRates:
    tau_s: float
    tau_f: float
    t_IM: float
    r_IM: float
    t_CM: float
    r_CM: float
    t_EM: float
    r_EM: float
    gamma_s: float
    gamma_f: float
    omega_s: float
    eta: float

    @property
    def I0(self) -> float:
        """Passive-system integral bound pi/tau_s, rad/s."""
        return math.pi / self.tau_s

    @property
    def omega_nb(self) -> float:
        return self.gamma_s * self.t_IM**2 / 4

    @property
    def omega_bb(self) -> float:
        return 4 * self.gamma_s / self.t_IM**2


def derive_rates(config: InterferometerConfig) -> DerivedRates:
    c = SPEED_OF_LIGHT
    tau_s = config.L_s / c
    tau_f = config.L_f / c
    t_IM, t_CM, t_EM = (math.sqrt(config.T_IM), math.sqrt(config.T_CM), math.sqrt(config.T_EM))
    # coupling rate from omega_s**2 = t_CM**2 / (4 tau_f tau_s)
    omega_s = t_CM / (2 * math.sqrt(tau_f * tau_s))
    return DerivedRates(
        tau_s=tau_s,
        tau_f=tau_f,
        t_IM=t_IM,
        r_IM=math.sqrt(1 - config.T_IM),
        t_CM=t_CM,
        r_CM=math.sqrt(1 - config.T_CM),
        t_EM=t_EM,
        r_EM=math.sqrt(1 - config.T_EM),
        gamma_s=c * config.T_CM / (4 * config.L_s),
        gamma_f=c * config.T_IM / (4 * config.L_f),
        omega_s=omega_s,
        eta=math.sqrt(1 - config.Lambda_o),
    )


def pump_power_to_coupling(P_f, m, wavelength, omega_m, L_f):
    """Optomechanical coupling rate (rad/s) for circulating pump power ``P_f``."""
    if P_f < 0:
        raise ConfigError("pump power must be non-negative")
    if m <= 0 or wavelength <= 0 or omega_m <= 0 or L_f <= 0:
        raise ConfigError("mass, wavelength, omega_m and L_f must be positive")
    return math.sqrt(16 * math.pi * P_f / (m * wavelength * omega_m * L_f))


def pt_condition_coupling(rates: DerivedRates) -> float:
    """Coupling rate g with g**2 = t_CM**2 / (8 tau_f tau_s)."""
    return math.sqrt(rates.t_CM**2 / (8 * rates.tau_f * rates.tau_s))


# --------------------------------------------------------------------------
# gain models


@dataclass(frozen=True)
class ZPK:
    """Zeros, poles (rad/s) and high-frequency gain of a rational filter.

    Zeros and poles are complex and need not come in conjugate pairs.
    """

    zeros: tuple = ()
    poles: tuple = ()
    k: complex = 1.0

    def __post_init__(self):
        object.__setattr__(self, "zeros", tuple(complex(z) for z in self.zeros))
        object.__setattr__(self, "poles", tuple(complex(p) for p in self.poles))
        k = complex(self.k)
        object.__setattr__(self, "k", k.real if k.imag == 0 else k)
        if len(self.zeros) != len(self.poles):
            raise ConfigError(
                f"ZPK needs as many zeros as poles, got {len(self.zeros)} and {len(self.poles)}")

    @property
    def order(self) -> int:
        return len(self.poles)

    @classmethod
    def from_hz(cls, zeros_hz, poles_hz, k) -> "ZPK":
        two_pi = 2 * math.pi
        return cls(tuple(two_pi * complex(z) for z in zeros_hz),
                   tuple(two_pi * complex(p) for p in poles_hz), k)

    def to_json_dict(self, unit: str = "hz") -> dict:
        if unit not in ("hz", "rad_s"):
            raise ConfigError(f"unit must be 'hz' or 'rad_s', got {unit!r}")
        scale = 1 / (2 * math.pi) if unit == "hz" else 1.0
        k = complex(self.k)
        return {
            "unit": unit,
            "zeros": [[z.real * scale, z.imag * scale] for z in self.zeros],
            "poles": [[p.real * scale, p.imag * scale] for p in self.poles],
            "k": k.real if k.imag == 0 else [k.real, k.imag],
        }

    @classmethod
    def from_json_dict(cls, data: dict) -> "ZPK":
        unit = data.get("unit")
        if unit not in ("hz", "rad_s"):
            raise ConfigError("ZPK document needs a 'unit' field of 'hz' or 'rad_s'")
        scale = 2 * math.pi if unit == "hz" else 1.0
        try:
            zeros = [scale * complex(re, im) for re, im in data["zeros"]]
            poles = [scale * complex(re, im) for re, im in data["poles"]]
            k = data["k"]
            k = complex(*k) if isinstance(k, (list, tuple)) else float(k)
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed ZPK document: {exc}") from exc
        return cls(zeros, poles, k)


@dataclass(frozen=True)
class Unity:
    pass


@dataclass(frozen=True)
class Detuned:
    phi: float


@dataclass(frozen=True)
class Optimal:
    pass


@dataclass(frozen=True)
class PTSymmetric:
    f_m: float
    Q_m: float
    g: float

    def __post_init__(self):
        if self.f_m <= 0 or self.Q_m <= 0 or self.g < 0:
            raise ConfigError("PTSymmetric needs f_m > 0, Q_m > 0 and g >= 0")

    @property
    def omega_m(self) -> float:
        return 2 * math.pi * self.f_m

    @property
    def gamma_m(self) -> float:
        return self.omega_m / (2 * self.Q_m)


@dataclass(frozen=True)
class Rational:
    zpk: ZPK = field(default_factory=ZPK)


GainModel = Union[Unity, Detuned, Optimal, PTSymmetric, Rational]


def reference_pt(config: InterferometerConfig = REFERENCE, f_m=5e5, Q_m=1e10) -> PTSymmetric:
    """PT-symmetric filter at the PT coupling condition for ``config``."""
    return PTSymmetric(f_m=f_m, Q_m=Q_m, g=pt_condition_coupling(derive_rates(config)))


def as_array(s):
    return np.asarray(s, dtype=complex)
