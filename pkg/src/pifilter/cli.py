"""Command-line entry point: enhancement sweeps, limits, Nyquist checks and optimization.

Every run writes its data files plus ``manifest.json`` into ``--out``.
Exit codes: 0 success, 2 input error, 3 numeric singularity,
4 infeasible optimization seed.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import re
import sys
import time
from importlib import metadata
from pathlib import Path

import numpy as np

from .errors import ConfigError, InfeasibleSeedError, SingularEvaluationError
from .model import (
    REFERENCE,
    ZPK,
    Detuned,
    Optimal,
    PTSymmetric,
    Rational,
    Unity,
    derive_rates,
    load_config,
    pt_condition_coupling,
)
from .optimize import CostOptions, optimize_filter
from .presets import (
    REFERENCE_LOSSES,
    SWEEP_APPROXIMATIONS,
    TABLE1,
    conditioned_pt_seed,
    nyquist_preset,
    sweep_preset,
    table1_model,
)
from .ratfit import seed_from_gopt
from .response import (
    GLOBAL,
    PER_FREQUENCY,
    analytic_limits,
    chi_approx,
    chi_rel,
    chi_sq,
    integral_enhancement,
    relative_enhancement,
)
from .stability import nyquist
from .transfer import DelayMode

logger = logging.getLogger("pifilter")

EXIT_INPUT, EXIT_SINGULAR, EXIT_INFEASIBLE = 2, 3, 4


class InputError(ValueError):
    """Bad command-line input; reported with exit code 2."""


# --------------------------------------------------------------------------
# parsing helpers


def parse_angle(text: str) -> float:
    """Radians from '0.3', 'pi', 'pi/8' or '3pi/8'."""
    m = re.fullmatch(r"\s*([0-9.eE+-]*)\s*\*?\s*pi\s*(?:/\s*([0-9.eE+-]+))?\s*", text)
    try:
        if m:
            num = float(m.group(1)) if m.group(1) not in ("", "+") else 1.0
            if m.group(1) == "-":
                num = -1.0
            return num * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
        return float(text)
    except ValueError:
        raise InputError(f"cannot parse angle {text!r}") from None


def parse_gain(spec: str, config):
    """Gain model from a spec such as 'unity', 'detuned:pi/4', 'optimal',
    'pt', 'pt:5e5:1e10', 'table1:3pole' or 'zpk:filter.json'."""
    kind, _, arg = spec.partition(":")
    kind = kind.lower()
    if kind == "unity" and not arg:
        return Unity()
    if kind == "detuned":
        return Detuned(parse_angle(arg))
    if kind == "optimal" and not arg:
        return Optimal()
    if kind == "pt":
        parts = arg.split(":") if arg else []
        try:
            f_m = float(parts[0]) if parts else 5e5
            Q_m = float(parts[1]) if len(parts) > 1 else 1e10
        except ValueError:
            raise InputError(f"bad PT filter spec {spec!r}") from None
        return PTSymmetric(f_m, Q_m, pt_condition_coupling(derive_rates(config)))
    if kind == "table1":
        if arg not in TABLE1:
            raise InputError(f"unknown table filter {arg!r}; choose from {sorted(TABLE1)}")
        return table1_model(arg)
    if kind == "zpk":
        return Rational(read_zpk(arg))
    raise InputError(f"unknown gain spec {spec!r}")


def read_zpk(path) -> ZPK:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InputError(f"cannot read ZPK file {path}: {exc}") from None
    return ZPK.from_json_dict(data.get("zpk", data))


def parse_band(text):
    try:
        lo, hi = (float(x) for x in text.split(":"))
    except ValueError:
        raise InputError(f"band must look like LO:HI in Hz, got {text!r}") from None
    if not 0 <= lo < hi:
        raise InputError(f"band needs 0 <= LO < HI, got {text!r}")
    return lo, hi


def label_of(spec: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "_", spec).strip("_").lower()


def resolve_config(args):
    config = load_config(args.config) if args.config else REFERENCE
    if args.losses == "off":
        config = config.with_losses()
    elif args.losses == "on" and config.lossless:
        config = config.with_losses(**REFERENCE_LOSSES)
    return config


# --------------------------------------------------------------------------
# output helpers


def fmt(x) -> str:
    return repr(float(x))


def write_csv(path: Path, header, rows):
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path: Path, data):
    path.write_text(json.dumps(data, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def tool_version() -> str:
    try:
        return metadata.version("pifilter")
    except metadata.PackageNotFoundError:
        return "unknown"


# --------------------------------------------------------------------------
# commands


def cmd_sweep(args, config, out: Path):
    mode = DelayMode.parse(args.delay)
    if args.preset == "suboptimal":
        rates = derive_rates(config)
        eps = np.linspace(-0.05, 0.05, args.grid or 201)
        full = relative_enhancement(config, eps, rates.gamma_s, mode, rates)
        approx = [chi_rel(e, rates.t_IM) for e in eps]
        path = out / "sweep_suboptimal_magnitude.csv"
        write_csv(path, ["epsilon", "chi_rel_full", "chi_rel_approx"], zip(eps, full, approx))
        return [path], {}
    if args.preset:
        try:
            curves = sweep_preset(args.preset, config)
        except KeyError as exc:
            raise InputError(str(exc)) from None
    else:
        if not args.gain:
            raise InputError("sweep needs at least one --gain or a --preset")
        curves = [(label_of(g), config, parse_gain(g, config)) for g in args.gain]

    outputs, summary = [], {}
    for label, cfg, model in curves:
        rates = derive_rates(cfg)
        lo_hz, hi_hz = args.band or (1e-2, 1 / (4 * rates.tau_s))
        omega = 2 * math.pi * np.logspace(math.log10(lo_hz), math.log10(hi_hz), args.grid or 600)
        if args.homodyne == GLOBAL:
            enh = integral_enhancement(cfg, model, GLOBAL, mode=mode, rates=rates)
            point = chi_sq(cfg, model, omega, enh.phi_lo, mode, rates)
        else:
            enh = integral_enhancement(cfg, model, PER_FREQUENCY, mode=mode, rates=rates)
            point = chi_sq(cfg, model, omega, PER_FREQUENCY, mode, rates)
        path = out / f"sweep_{label}.csv"
        write_csv(path, ["frequency_hz", "chi_db", "phi_lo_rad"],
                  zip(omega / (2 * math.pi), point.chi_db, point.phi_lo))
        outputs.append(path)
        summary[label] = {"normalized_I": enh.normalized, "normalized_I_db": enh.normalized_db}
    for kind in SWEEP_APPROXIMATIONS.get(args.preset, ()):
        rates = derive_rates(config.with_losses())
        lo_hz, hi_hz = args.band or (1e-2, 1 / (4 * rates.tau_s))
        omega = 2 * math.pi * np.logspace(math.log10(lo_hz), math.log10(hi_hz), args.grid or 600)
        path = out / f"approx_{kind}.csv"
        write_csv(path, ["frequency_hz", "chi_db"],
                  zip(omega / (2 * math.pi), 20 * np.log10(chi_approx(kind, rates, omega))))
        outputs.append(path)
    summary_path = out / "sweep_summary.json"
    write_json(summary_path, summary)
    outputs.append(summary_path)
    return outputs, summary


def cmd_limits(args, config, out: Path):
    limits = analytic_limits(derive_rates(config))
    path = out / "limits.json"
    write_json(path, limits)
    return [path], limits


def cmd_nyquist(args, config, out: Path):
    mode = DelayMode.parse(args.delay)
    if args.preset:
        try:
            checks = nyquist_preset(args.preset, config)
        except KeyError as exc:
            raise InputError(str(exc)) from None
    else:
        if not args.gain:
            raise InputError("nyquist needs a --gain or a --preset")
        checks = [(label_of(g), config, parse_gain(g, config)) for g in args.gain]
    outputs, verdicts = [], {}
    for label, cfg, model in checks:
        report = nyquist(cfg, model, args.omega_max, mode)
        csv_path = out / f"nyquist_{label}.csv"
        write_csv(csv_path, ["omega_rad_s", "re", "im"],
                  zip(report.omega, report.values.real, report.values.imag))
        verdict = report.verdict()
        json_path = out / f"verdict_{label}.json"
        write_json(json_path, verdict)
        outputs += [csv_path, json_path]
        verdicts[label] = verdict
    return outputs, verdicts


def build_seed(args, config) -> ZPK:
    rates = derive_rates(config)
    kind, _, arg = args.seed.partition(":")
    if kind == "pt":
        return conditioned_pt_seed(config)
    if kind == "vectfit":
        try:
            n = int(arg) if arg else 3
        except ValueError:
            raise InputError(f"bad vectfit seed {args.seed!r}") from None
        return seed_from_gopt(rates, n)
    if kind == "zpk":
        return read_zpk(arg)
    if kind == "table1" and arg in TABLE1:
        return TABLE1[arg][0]
    raise InputError(f"unknown seed {args.seed!r}")


def cmd_optimize(args, config, out: Path):
    seed = build_seed(args, config)
    if args.poles is not None and seed.order != args.poles:
        raise InputError(f"seed has {seed.order} poles but --poles {args.poles} was requested")
    band = None
    if args.band:
        band = tuple(2 * math.pi * x for x in args.band)
    opts = CostOptions(band=band, mode=DelayMode.parse(args.delay))
    result = optimize_filter(config, seed, opts, max_iter=args.max_iter)
    data = result.to_json_dict()
    data["seed_spec"] = args.seed
    path = out / "optimize_result.json"
    write_json(path, data)
    summary = {k: data[k] for k in ("normalized_I", "normalized_I_db", "phi_lo_rad")}
    summary["stable"] = result.stable
    return [path], summary


COMMANDS = {"sweep": cmd_sweep, "limits": cmd_limits, "nyquist": cmd_nyquist,
            "optimize": cmd_optimize}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="interferometer config JSON (default: reference scenario)")
    common.add_argument("--out", default=".", help="output directory")
    common.add_argument("--delay", choices=["exact", "second-order"], default="exact")
    common.add_argument("--losses", choices=["on", "off", "config"], default="config",
                        help="off drops all losses; on applies the standard loss set "
                             "when the config has none")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(prog="pifilter", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", parents=[common], help="chi(omega) curves as CSV")
    sweep.add_argument("--gain", action="append", default=[],
                       help="gain spec, repeatable: unity, detuned:PHI, optimal, pt[:F_M:Q_M], "
                            "table1:NAME, zpk:PATH")
    sweep.add_argument("--preset", choices=["fig2", "fig3", "fig4", "fig5", "fig7", "suboptimal"])
    sweep.add_argument("--band", type=parse_band, help="LO:HI in Hz")
    sweep.add_argument("--grid", type=int, help="number of log-spaced frequencies")
    sweep.add_argument("--homodyne", choices=[GLOBAL, PER_FREQUENCY], default=PER_FREQUENCY)

    sub.add_parser("limits", parents=[common], help="closed-form rates and integral limits")

    nyq = sub.add_parser("nyquist", parents=[common], help="closed-loop stability verdicts")
    nyq.add_argument("--gain", action="append", default=[])
    nyq.add_argument("--preset", choices=["optimal", "table1"])
    nyq.add_argument("--omega-max", type=float, help="contour half-length in rad/s")

    opt = sub.add_parser("optimize", parents=[common], help="constrained filter optimization")
    opt.add_argument("--seed", default="pt", help="pt, vectfit:N, table1:NAME or zpk:PATH")
    opt.add_argument("--poles", type=int)
    opt.add_argument("--band", type=parse_band, help="integration band LO:HI in Hz")
    opt.add_argument("--max-iter", type=int, default=5000)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    out = Path(args.out)
    start = time.perf_counter()
    try:
        config = resolve_config(args)
        out.mkdir(parents=True, exist_ok=True)
        outputs, summary = COMMANDS[args.command](args, config, out)
    except InfeasibleSeedError as exc:
        print(f"pifilter: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SingularEvaluationError as exc:
        print(f"pifilter: numeric singularity: {exc}", file=sys.stderr)
        return EXIT_SINGULAR
    except InputError as exc:
        parser.print_usage(sys.stderr)
        print(f"pifilter {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ConfigError, ValueError, KeyError) as exc:
        print(f"pifilter: error: {exc}", file=sys.stderr)
        return EXIT_INPUT

    options = {k: v for k, v in vars(args).items() if k not in ("command", "config", "out")}
    manifest = {
        "command": args.command,
        "config_path": args.config,
        "config": config.to_dict(),
        "options": json.loads(json.dumps(options, default=str)),
        "outputs": [p.name for p in outputs],
        "version": tool_version(),
        "wall_time_s": round(time.perf_counter() - start, 3),
    }
    write_json(out / "manifest.json", manifest)
    print(json.dumps(summary, indent=2, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
