"""Reference filter configurations and named scenarios for the command line."""

from __future__ import annotations

import math

from .gains import pt_to_zpk
from .model import (
    REFERENCE,
    ZPK,
    Detuned,
    InterferometerConfig,
    Optimal,
    Rational,
    derive_rates,
    pt_condition_coupling,
    reference_pt,
)
from .optimize import condition_seed
from .response import default_band

# loss set of the lossy optimized filters: output, filter-cavity, sensing-cavity
REFERENCE_LOSSES = {"Lambda_o": 0.3, "Lambda_f": 2e-3, "Lambda_s": 5e-5}

PT_QUALITY_FACTORS = (1e3, 1e4, 1e5, 5e5, 1e10)

# optimized zero-pole-gain filters (Hz, s/2pi convention)
TABLE1 = {
    "2pole": (
        ZPK.from_hz([14.82 + 17.75e4j, -14.79 + 5.16e-3j],
                    [-1.0e-2 - 3.61e-4j, -7.39e-1 + 18.13e4j], 1.019389),
        False,
    ),
    "3pole": (
        ZPK.from_hz([-21.33, -6.91 + 12.78j, -6.91 - 12.78j],
                    [-8.56 - 7.48e-4j, -2.62 + 11.31e-5j, -9.33 + 9.90e-4j], 0.998930),
        False,
    ),
    "2pole-lossy": (
        ZPK.from_hz([10.84 + 9.98e5j, -14.78 - 3.49e-4j],
                    [-1.0e-2 - 2.76e-5j, -19.36e-2 + 10.03e5j], 1.003015),
        True,
    ),
    "3pole-lossy": (
        ZPK.from_hz([-21.09, -7.18 + 12.30j, -7.18 - 12.30j],
                    [-7.26 + 8.30e-4j, -2.20 + 16.66e-5j, -11.37 + 10.38e-4j], 0.999188),
        True,
    ),
}


def table1_config(name: str, base: InterferometerConfig = REFERENCE) -> InterferometerConfig:
    """Interferometer losses the named filter was optimized for."""
    _, lossy = TABLE1[name]
    if not lossy:
        return base.with_losses()
    return base.with_losses(**REFERENCE_LOSSES)


def table1_model(name: str) -> Rational:
    try:
        return Rational(TABLE1[name][0])
    except KeyError:
        raise KeyError(f"unknown filter {name!r}; choose from {sorted(TABLE1)}") from None


def sweep_preset(name: str, base: InterferometerConfig = REFERENCE):
    """(label, config, gain model) triples of a named enhancement sweep."""
    lossless = base.with_losses()
    if name == "fig2":
        curves = [(f"passive_phi{i}pi8", lossless, Detuned(i * math.pi / 8)) for i in range(5)]
        return curves + [("optimal", lossless, Optimal())]
    if name == "fig3":
        return [
            ("pt_q1e10", lossless, reference_pt(lossless)),
            ("optimized_2pole", lossless, table1_model("2pole")),
            ("optimized_3pole", lossless, table1_model("3pole")),
        ]
    if name == "fig4":
        return [
            ("3pole_lossless", lossless, table1_model("3pole")),
            ("3pole_output_loss", lossless.with_losses(Lambda_o=REFERENCE_LOSSES["Lambda_o"]),
             table1_model("3pole")),
            ("3pole_lossy", table1_config("3pole-lossy", base), table1_model("3pole-lossy")),
        ]
    if name == "fig5":
        return [
            ("passive_narrowband", lossless, Detuned(math.pi / 2)),
            ("passive_broadband", lossless, Detuned(0.0)),
            ("optimal", lossless, Optimal()),
        ]
    if name == "fig7":
        return [(f"pt_q{q:.0e}".replace("+", ""), lossless, reference_pt(lossless, Q_m=q))
                for q in PT_QUALITY_FACTORS]
    raise KeyError(f"no enhancement sweep preset {name!r}")


def conditioned_pt_seed(config: InterferometerConfig = REFERENCE, f_m=5e5, Q_m=1e10) -> ZPK:
    """Two-pole search seed from the PT filter at the PT coupling condition.

    The PT resonance sits far above the analysis band; conditioning turns
    it into an all-pass pair so the seed starts closed-loop stable.
    """
    rates = derive_rates(config)
    raw = pt_to_zpk(f_m, Q_m, pt_condition_coupling(rates), rates.tau_f)
    return condition_seed(raw, default_band(rates)[1])


# approximation curves drawn next to each sweep preset
SWEEP_APPROXIMATIONS = {"fig5": ("nb", "bb2", "opt2"), "fig7": ("pt_infQ",)}


def nyquist_preset(name: str, base: InterferometerConfig = REFERENCE):
    """(label, config, gain model) triples of a named stability check."""
    if name == "optimal":
        return [("optimal", base.with_losses(), Optimal())]
    if name == "table1":
        return [(f"table1_{key}", table1_config(key, base), table1_model(key)) for key in TABLE1]
    raise KeyError(f"no stability preset {name!r}")


__all__ = [
    "REFERENCE_LOSSES", "PT_QUALITY_FACTORS", "SWEEP_APPROXIMATIONS", "TABLE1",
    "conditioned_pt_seed", "nyquist_preset", "sweep_preset", "table1_config", "table1_model",
]
