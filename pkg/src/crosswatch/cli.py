"""Batch command-line front end.

Subcommands map one-to-one onto the package layers: ``dist`` tabulates
the closed-form joint law, ``survival`` inverts the crossing-time LSTs,
``functional`` evaluates the windowed crossing transforms, ``simulate``
runs the Monte Carlo oracle, ``validate`` runs the full oracle-agreement
battery, and ``predict`` packages the crash-forecast outputs.

Conventions shared by every command: JSON configs carry a
``schema_version`` and reject unknown keys; numeric CSV cells print with
12 significant digits and LF line endings; reruns with the same config
and seed produce byte-identical output.  Exit codes: 0 ok, 1 validation
failure, 2 table-invariant failure, 3 inversion failure, 4 divergence,
64 usage.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import closedform, fluctuation, laplace, montecarlo
from .errors import (
    ConfigError,
    DivergenceError,
    DomainError,
    InversionError,
    RunawaySimulationError,
    TableInvariantError,
    UnsupportedLawError,
)
from .model import ProcessModel, TransformArgs, load_model
from .validation import run_battery

__all__ = ["main"]

_EXIT_OK = 0
_EXIT_VALIDATION = 1
_EXIT_TABLE = 2
_EXIT_INVERSION = 3
_EXIT_DIVERGENCE = 4
_EXIT_USAGE = 64

_COMMAND_KEYS = {
    "dist": {"t_grid", "r_max"},
    "survival": {"t_grid"},
    "functional": {"args", "which"},
    "simulate": {"args", "n_paths"},
    "validate": {"n_paths", "perturb_c"},
    "predict": {"horizon", "t_steps", "n_paths"},
}


def _fmt(x: float) -> str:
    return f"{x:.11e}"


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; the contract reserves 2 for
    # table-invariant failures, so usage errors leave with 64.
    def error(self, message):
        self.exit(_EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {value}")
    return value


def _positive_int(text: str) -> int:
    value = _nonnegative_int(text)
    if value == 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _grid_spec(text: str) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"grid must look like a:b:n, got {text!r}")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad grid spec {text!r}") from exc
    if count < 1 or stop < start or start < 0.0:
        raise argparse.ArgumentTypeError(f"grid needs 0 <= a <= b and n >= 1, got {text!r}")
    return np.linspace(start, stop, count)


def _build_parser() -> _Parser:
    parser = _Parser(prog="crosswatch", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--config", required=True, help="path to the JSON run configuration")
    common.add_argument("--seed", type=_nonnegative_int, default=0, help="simulation seed (default 0)")
    common.add_argument("--out", default=None, help="output file (default: stdout)")
    common.add_argument("--check-mc", type=_positive_int, default=None, metavar="N",
                        help="cross-check analytic values with an N-path simulation")
    common.add_argument("--exponent-form", choices=("delta", "tau"), default="delta",
                        help="damp the crossing gap (delta) or the crossing time (tau)")
    common.add_argument("--t-grid", type=_grid_spec, default=None, metavar="A:B:N",
                        help="uniform time grid, overrides the config")
    common.add_argument("--r-max", type=_nonnegative_int, default=None,
                        help="largest tabulated crossing level, overrides the config")
    common.add_argument("--perturb-c", type=float, default=None, metavar="EPS",
                        help="validate only: shift the composite ratio c (negative control)")

    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("dist", parents=[common], help="closed-form joint table P{A_nu=r, tau_pre>t}")
    sub.add_parser("survival", parents=[common], help="survival curves of tau_pre and tau_cross")
    sub.add_parser("functional", parents=[common], help="windowed crossing transforms G1/G2/G")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo crossing estimates")
    sub.add_parser("validate", parents=[common], help="oracle-agreement battery")
    sub.add_parser("predict", parents=[common], help="crash-forecast curves and overshoot table")
    return parser


# ---------------------------------------------------------------------------
# configuration plumbing


def _load_config(path: str, command: str) -> tuple[dict, ProcessModel]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path!r}: {exc}") from exc
    try:
        raw = json.loads(text)
    except ValueError as exc:
        raise ConfigError(f"config {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, Mapping):
        raise ConfigError("config root must be a JSON object")
    allowed = {"schema_version", "model"} | _COMMAND_KEYS[command]
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise ConfigError(f"unknown config key(s) {unknown} for command {command!r}")
    if raw.get("schema_version") != 1:
        raise ConfigError(f"unsupported schema_version {raw.get('schema_version')!r}")
    if "model" not in raw or not isinstance(raw["model"], Mapping):
        raise ConfigError('config needs a "model" object')
    model_cfg = dict(raw["model"])
    model_cfg.setdefault("schema_version", 1)
    return dict(raw), load_model(model_cfg)


def _parse_args_section(section, exponent_form: str) -> TransformArgs:
    if not isinstance(section, Mapping):
        raise ConfigError('"args" must be an object')
    allowed = {"theta", "u", "v", "w", "x", "y"}
    unknown = sorted(set(section) - allowed)
    if unknown:
        raise ConfigError(f"unknown args key(s) {unknown}")
    if "theta" not in section:
        raise ConfigError('"args" needs at least "theta"')
    theta_raw = section["theta"]
    if isinstance(theta_raw, bool) or not isinstance(theta_raw, (int, float)):
        raise ConfigError(f"args.theta must be a number, got {theta_raw!r}")
    values = {"u": 1.0, "v": 1.0, "w": 0.0, "x": 0.0, "y": 1.0}
    for key in values:
        if key in section:
            val = section[key]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"args.{key} must be a number, got {val!r}")
            values[key] = float(val)
    args = TransformArgs(theta=float(theta_raw), **values)
    if exponent_form == "tau":
        # exp(-w*tau_pre - x*tau_cross) = exp(-(w+x)*tau_pre - x*(tau_cross - tau_pre))
        args = TransformArgs(theta=args.theta, u=args.u, v=args.v,
                             w=args.w + args.x, x=args.x, y=args.y)
    return args


def _resolve_grid(ns, config: Mapping, required: bool = True) -> np.ndarray | None:
    if ns.t_grid is not None:
        return ns.t_grid
    if "t_grid" in config:
        raw = config["t_grid"]
        if not isinstance(raw, Sequence) or isinstance(raw, (str, bytes)) or not raw:
            raise ConfigError("t_grid must be a nonempty array of times")
        grid = np.asarray([float(v) for v in raw])
        if np.any(grid < 0.0) or np.any(~np.isfinite(grid)) or np.any(np.diff(grid) < 0.0):
            raise ConfigError("t_grid must be nonnegative, finite, and sorted")
        return grid
    if required:
        raise ConfigError('this command needs a time grid ("t_grid" key or --t-grid)')
    return None


def _resolve_n_paths(ns, config: Mapping, default: int) -> int:
    if ns.check_mc is not None:
        return ns.check_mc
    raw = config.get("n_paths", default)
    if isinstance(raw, bool) or not isinstance(raw, int) or raw < 1:
        raise ConfigError(f"n_paths must be a positive integer, got {raw!r}")
    return raw


def _write_output(ns, text: str) -> None:
    if ns.out is None:
        sys.stdout.write(text)
    else:
        with open(ns.out, "w", newline="\n") as handle:
            handle.write(text)


def _require_special(model: ProcessModel, command: str) -> closedform.SpecialModel:
    try:
        return closedform.SpecialModel.from_process_model(model)
    except DomainError as exc:
        raise ConfigError(
            f"`{command}` uses the special-case closed forms only (geometric marks, "
            "exponential inspection gaps, zero initial delay): "
            f"{exc}; use `functional` for general models"
        ) from exc


# ---------------------------------------------------------------------------
# commands


def cmd_dist(ns) -> int:
    config, model = _load_config(ns.config, "dist")
    special = _require_special(model, "dist")
    grid = _resolve_grid(ns, config)
    r_max = ns.r_max if ns.r_max is not None else config.get("r_max")
    if r_max is None:
        raise ConfigError('dist needs a level bound ("r_max" key or --r-max)')
    table = closedform.dist_table(special, grid, int(r_max))
    _write_output(ns, table.to_csv())
    return _EXIT_OK


def cmd_survival(ns) -> int:
    config, model = _load_config(ns.config, "survival")
    grid = _resolve_grid(ns, config)
    pre = laplace.survival_curve(lambda q: fluctuation.lst_tau_pre(model, q), grid)
    cross = laplace.survival_curve(lambda q: fluctuation.lst_tau_cross(model, q), grid)
    lines = ["t,survival_pre,survival_cross"]
    lines.extend(
        f"{_fmt(t)},{_fmt(p)},{_fmt(c)}" for t, p, c in zip(grid, pre, cross)
    )
    _write_output(ns, "\n".join(lines) + "\n")
    return _EXIT_OK


def _complex_json(value: complex) -> dict:
    value = complex(value)
    return {"re": value.real, "im": value.imag}


def cmd_functional(ns) -> int:
    config, model = _load_config(ns.config, "functional")
    if "args" not in config:
        raise ConfigError('functional needs an "args" object')
    args = _parse_args_section(config["args"], ns.exponent_form)
    which = config.get("which", "G")
    if which not in ("G1", "G2", "G"):
        raise ConfigError(f'which must be one of "G1", "G2", "G", got {which!r}')
    values = {
        "G1": fluctuation.g1_star(model, args),
        "G2": fluctuation.g2_star(model, args),
        "G": fluctuation.g_star(model, args),
    }
    payload = {
        "schema_version": 1,
        "which": which,
        "exponent_form": ns.exponent_form,
        "args": {
            "theta": args.theta.real if isinstance(args.theta, complex) else float(args.theta),
            "u": float(np.real(args.u)), "v": float(np.real(args.v)),
            "w": float(np.real(args.w)), "x": float(np.real(args.x)),
            "y": float(np.real(args.y)),
        },
        "value": _complex_json(values[which]),
        "values": {key: _complex_json(val) for key, val in values.items()},
    }
    if ns.check_mc is not None:
        checks = {}
        for key in ("G1", "G2", "G"):
            est = montecarlo.estimate_functional(
                model, args, key, n_paths=ns.check_mc, seed=ns.seed
            )
            lo, hi = est.ci()
            checks[key] = {
                "mean": est.mean,
                "std_error": est.std_error,
                "n": est.n_samples,
                "ci95": [lo, hi],
            }
        payload["check_mc"] = checks
    _write_output(ns, json.dumps(payload, sort_keys=True, indent=2) + "\n")
    return _EXIT_OK


def cmd_simulate(ns) -> int:
    config, model = _load_config(ns.config, "simulate")
    n_paths = _resolve_n_paths(ns, config, default=100_000)
    sample = montecarlo._crossing_sample(model, n_paths, ns.seed)

    def stat_row(name: str, values: np.ndarray) -> str:
        mean = float(np.mean(values))
        se = float(np.std(values, ddof=1) / math.sqrt(values.size)) if values.size > 1 else 0.0
        return f"{name},{_fmt(mean)},{_fmt(se)},{values.size}"

    lines = ["quantity,mean,std_error,n"]
    lines.append(stat_row("nu", sample["nu"].astype(float)))
    lines.append(stat_row("a_pre", sample["a_pre"].astype(float)))
    lines.append(stat_row("a_cross", sample["a_cross"].astype(float)))
    lines.append(stat_row("overshoot", (sample["a_cross"] - model.threshold).astype(float)))
    lines.append(stat_row("tau_pre", sample["tau_pre"]))
    lines.append(stat_row("tau_cross", sample["tau_cross"]))
    if "args" in config:
        args = _parse_args_section(config["args"], ns.exponent_form)
        for which in ("G1", "G2", "G"):
            est = montecarlo.estimate_functional(model, args, which, n_paths=n_paths, seed=ns.seed)
            lines.append(f"{which},{_fmt(est.mean)},{_fmt(est.std_error)},{est.n_samples}")
    _write_output(ns, "\n".join(lines) + "\n")
    return _EXIT_OK


def cmd_validate(ns) -> int:
    config, model = _load_config(ns.config, "validate")
    n_paths = _resolve_n_paths(ns, config, default=100_000)
    shift = ns.perturb_c if ns.perturb_c is not None else config.get("perturb_c", 0.0)
    if isinstance(shift, bool) or not isinstance(shift, (int, float)):
        raise ConfigError(f"perturb_c must be a number, got {shift!r}")
    report = run_battery(model, seed=ns.seed, c_shift=float(shift), n_paths=n_paths)
    _write_output(ns, json.dumps(report, sort_keys=True, indent=2) + "\n")
    if not report["all_passed"]:
        failed = ", ".join(report["failed_checks"])
        print(f"validation failed: {failed}", file=sys.stderr)
        return _EXIT_VALIDATION
    return _EXIT_OK


def cmd_predict(ns) -> int:
    config, model = _load_config(ns.config, "predict")
    if "horizon" not in config:
        raise ConfigError('predict needs a "horizon" key (forecast window length)')
    horizon = config["horizon"]
    if isinstance(horizon, bool) or not isinstance(horizon, (int, float)) or horizon < 0.0:
        raise ConfigError(f"horizon must be a nonnegative number, got {horizon!r}")
    t_steps = config.get("t_steps", 101)
    if isinstance(t_steps, bool) or not isinstance(t_steps, int) or t_steps < 1:
        raise ConfigError(f"t_steps must be a positive integer, got {t_steps!r}")
    grid = ns.t_grid
    if grid is None:
        grid = np.linspace(0.0, float(horizon), t_steps) if horizon > 0 else np.array([0.0])

    crash = 1.0 - laplace.survival_curve(lambda q: fluctuation.lst_tau_cross(model, q), grid)
    precrash = laplace.survival_curve(lambda q: fluctuation.lst_tau_pre(model, q), grid)

    lines = ["quantity,arg,value"]
    lines.extend(f"crash_prob,{_fmt(t)},{_fmt(p)}" for t, p in zip(grid, crash))
    lines.extend(f"precrash_survival,{_fmt(t)},{_fmt(p)}" for t, p in zip(grid, precrash))

    m = model.threshold
    try:
        special = closedform.SpecialModel.from_process_model(model)
    except DomainError:
        special = None
    if special is not None:
        expected = 1.0 / (1.0 - special.c)
        r = m + 1
        while r <= m + 200:
            p = closedform.crossing_level_pmf(special, r)
            if p < 1e-9:
                break
            lines.append(f"overshoot_pmf,{r},{_fmt(p)}")
            r += 1
    else:
        n_paths = _resolve_n_paths(ns, config, default=200_000)
        sample = montecarlo._crossing_sample(model, n_paths, ns.seed)
        overshoot = sample["a_cross"] - m
        expected = float(np.mean(overshoot))
        top = int(np.quantile(overshoot, 1.0 - 1e-6)) if overshoot.size else 0
        for k in range(1, min(top, 200) + 1):
            freq = float(np.count_nonzero(overshoot == k)) / overshoot.size
            if freq > 0.0:
                lines.append(f"overshoot_pmf,{m + k},{_fmt(freq)}")
    lines.append(f"expected_overshoot,,{_fmt(expected)}")
    _write_output(ns, "\n".join(lines) + "\n")
    return _EXIT_OK


_COMMANDS = {
    "dist": cmd_dist,
    "survival": cmd_survival,
    "functional": cmd_functional,
    "simulate": cmd_simulate,
    "validate": cmd_validate,
    "predict": cmd_predict,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        return _COMMANDS[ns.command](ns)
    except TableInvariantError as exc:
        print(f"table invariant violated: {exc}", file=sys.stderr)
        for cell in exc.cells[:10]:
            print(f"  offending cell: {cell}", file=sys.stderr)
        return _EXIT_TABLE
    except InversionError as exc:
        print(f"inversion failed: {exc}", file=sys.stderr)
        return _EXIT_INVERSION
    except (DivergenceError, RunawaySimulationError) as exc:
        print(f"divergence: {exc}", file=sys.stderr)
        return _EXIT_DIVERGENCE
    except (ConfigError, DomainError, UnsupportedLawError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
