"""Command-line front end: ``eprsim {sweep,chsh,threshold-scan,theory,reproduce}``."""

from __future__ import annotations

import argparse
import json
import math
import re
import sys
from dataclasses import fields
from pathlib import Path

from .analysis import chsh, correlation_E
from .engine import CorrelationCurve, RunConfig, sweep
from .errors import ConfigError, ConfigParseError, EmptyTallyError
from .oracle import STANDARD_ANGLES, analog_integral, digital_distribution, e_from_probs, oracle_chsh

EXIT_PARSE = 2
EXIT_INVALID = 3
EXIT_EMPTY = 4
EXIT_IO = 5

ANGLE_KEYS = {"alpha_start", "alpha_end", "beta", "delta"}
INT_KEYS = {"seed", "pairs_per_setting", "steps"}
CONFIG_KEYS = [f.name for f in fields(RunConfig)]

# flag name -> RunConfig field
FLAG_FIELDS = {
    "seed": "seed",
    "pairs": "pairs_per_setting",
    "alpha_start": "alpha_start",
    "alpha_end": "alpha_end",
    "steps": "steps",
    "beta": "beta",
    "delta": "delta",
    "threshold": "threshold",
    "efficiency": "efficiency",
    "decoherence": "decoherence",
}

DEFAULT_THRESHOLDS = (0.0, 0.05, 0.10, 0.15, 0.20)

SWEEP_COLUMNS = [
    "setting_index", "alpha_rad", "beta_rad",
    "n_pp", "n_pm", "n_mp", "n_mm",
    "n_p_undet", "n_undet_p", "n_m_undet", "n_undet_m", "n_undet_undet",
    "emitted", "recorded", "E",
]
# (row, col) of each count column in the tally matrix (Plus=0, Minus=1, Undetected=2)
CELLS = [(0, 0), (0, 1), (1, 0), (1, 1), (0, 2), (2, 0), (1, 2), (2, 1), (2, 2)]

_PI_EXPR = re.compile(r"^([+-]?\d*\.?\d*(?:[eE][+-]?\d+)?)\s*\*?\s*pi\s*(?:/\s*(\d*\.?\d+))?$")


def parse_angle(text: str) -> float:
    """Radians by default; ``<x>deg`` for degrees; ``pi``, ``3pi/8``, ``0.5*pi`` allowed."""
    s = text.strip().lower()
    try:
        if s.endswith("deg"):
            return math.radians(float(s[:-3]))
        m = _PI_EXPR.match(s)
        if m:
            coef = m.group(1)
            factor = float(coef) if coef not in ("", "+", "-") else float(coef + "1")
            return factor * math.pi / (float(m.group(2)) if m.group(2) else 1.0)
        return float(s)
    except ValueError:
        raise ConfigParseError(f"cannot parse angle {text!r}") from None


def parse_value(key: str, text: str):
    if key not in CONFIG_KEYS:
        raise ConfigParseError(f"unknown config key {key!r}")
    if key in ANGLE_KEYS:
        return parse_angle(text)
    try:
        return int(text, 0) if key in INT_KEYS else float(text)
    except ValueError:
        raise ConfigParseError(f"bad value for {key}: {text!r}") from None


def parse_assignments(lines, source: str) -> dict:
    out = {}
    for n, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigParseError(f"{source}:{n}: expected key=value, got {raw.strip()!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        out[key] = parse_value(key, value)
    return out


def load_config_file(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigParseError(f"cannot read config {path}: {exc}") from None
    return parse_assignments(text.splitlines(), str(path))


def resolve_config(args, base: dict | None = None) -> RunConfig:
    """Figure/subcommand defaults < config file < --set pairs < explicit flags."""
    values = dict(base or {})
    if args.config:
        values.update(load_config_file(args.config))
    values.update(parse_assignments(args.set or [], "--set"))
    for flag, key in FLAG_FIELDS.items():
        raw = getattr(args, flag, None)
        if raw is not None:
            values[key] = parse_value(key, raw)
    return RunConfig(**values)


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def header_lines(command: str, config: RunConfig, extra: dict | None = None) -> list[str]:
    lines = [f"# eprsim {command}"]
    for key, value in config.as_dict().items():
        lines.append(f"# {key}={_fmt(value)}")
    for key, value in (extra or {}).items():
        lines.append(f"# {key}={_fmt(value)}")
    return lines


def sweep_rows(curve: CorrelationCurve, prefix=()) -> list[list]:
    rows = []
    for k, s in enumerate(curve.settings):
        t = s.tally
        try:
            e = correlation_E(t)
        except EmptyTallyError:
            e = ""
        rows.append([*prefix, k, s.alpha, s.beta, *(t[c] for c in CELLS), t.emitted, t.recorded, e])
    return rows


def render_csv(header: list[str], columns: list[str], rows) -> str:
    lines = list(header)
    lines.append(",".join(columns))
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def render_json(payload: dict) -> str:
    return json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n"


def emit(text: str, output: str | None):
    if output in (None, "-"):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def parse_float_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigParseError(f"bad number list {text!r}") from None


def parse_angles(text: str | None) -> tuple[float, ...]:
    if text is None:
        return STANDARD_ANGLES
    angles = tuple(parse_angle(v) for v in text.split(","))
    if len(angles) != 4:
        raise ConfigParseError("--angles needs exactly four values a,a',b,b'")
    return angles


# -- subcommands -------------------------------------------------------------

def cmd_sweep(args, base=None, label="sweep") -> str:
    config = resolve_config(args, base)
    curve = sweep(config)
    return render_csv(header_lines(label, config), SWEEP_COLUMNS, sweep_rows(curve))


def _chsh_payload(config, angles, runs) -> dict:
    result = chsh(config, angles, runs=runs, pairs_per_run=config.pairs_per_setting)
    payload = result.as_dict()
    payload["config"] = config.as_dict()
    payload["pairs_per_run"] = config.pairs_per_setting
    return payload


def cmd_chsh(args, base=None) -> str:
    config = resolve_config(args, {"pairs_per_setting": 10000, **(base or {})})
    return render_json(_chsh_payload(config, parse_angles(args.angles), args.runs))


def threshold_scan_rows(config: RunConfig, thresholds, angles, runs):
    rows = []
    for ds in thresholds:
        r = chsh(config.with_(threshold=ds), angles, runs=runs, pairs_per_run=config.pairs_per_setting)
        rows.append([ds, r.s_mean, r.s_stddev])
    return rows


def cmd_threshold_scan(args, base=None, label="threshold-scan") -> str:
    config = resolve_config(args, {"pairs_per_setting": 10000, **(base or {})})
    thresholds = parse_float_list(args.thresholds)
    angles = parse_angles(args.angles)
    for ds in thresholds:
        config.with_(threshold=ds)  # validate the whole grid before running
    rows = threshold_scan_rows(config, thresholds, angles, args.runs)
    extra = {"runs": args.runs, "thresholds": args.thresholds, "angles": ",".join(map(repr, angles))}
    return render_csv(header_lines(label, config, extra), ["threshold", "s_mean", "s_std"], rows)


THEORY_COLUMNS = [
    "setting_index", "alpha_rad", "beta_rad",
    "p_pp", "p_pm", "p_mp", "p_mm",
    "p_p_undet", "p_undet_p", "p_m_undet", "p_undet_m", "p_undet_undet",
    "E", "analog",
]


def cmd_theory(args, base=None) -> str:
    config = resolve_config(args, base)
    if args.mode == "chsh":
        angles = parse_angles(args.angles)
        thresholds = parse_float_list(args.thresholds)
        rows = [[ds, oracle_chsh(angles, config.delta, ds, config.decoherence)] for ds in thresholds]
        extra = {"mode": "chsh", "angles": ",".join(map(repr, angles))}
        return render_csv(header_lines("theory", config, extra), ["threshold", "s_exact"], rows)
    rows = []
    for k, alpha in enumerate(config.alphas()):
        alpha = float(alpha)
        p = digital_distribution(alpha, config.beta, config.delta, config.threshold, config.decoherence).probs
        try:
            e = e_from_probs(p)
        except EmptyTallyError:
            e = ""
        analog = analog_integral(alpha, config.beta, config.delta)
        rows.append([k, alpha, config.beta, *(float(p[c]) for c in CELLS), e, analog])
    return render_csv(header_lines("theory", config, {"mode": "sweep"}), THEORY_COLUMNS, rows)


FIGURES = {
    "fig2": {"base": {}, "series": None},
    "fig3": {"base": {"threshold": 0.05}, "series": ("efficiency", (0.5, 0.3, 0.1))},
    "fig4": {"base": {"threshold": 0.05}, "series": ("decoherence", (0.1, 0.5, 1.0))},
    "fig5a": {"base": {"pairs_per_setting": 10000}, "series": None},
    "fig5b": {"base": {"threshold": 0.1, "decoherence": 0.1}, "series": None},
}


def cmd_reproduce(args) -> str:
    spec = FIGURES[args.figure]
    if args.figure == "fig5a":
        args.thresholds = ",".join(map(repr, DEFAULT_THRESHOLDS))
        args.angles = None
        return cmd_threshold_scan(args, spec["base"], f"reproduce {args.figure}")
    if spec["series"] is None:
        return cmd_sweep(args, spec["base"], f"reproduce {args.figure}")
    config = resolve_config(args, spec["base"])
    key, values = spec["series"]
    rows = []
    for value in values:
        curve = sweep(config.with_(**{key: value}))
        rows.extend(sweep_rows(curve, prefix=(f"{key}={value!r}",)))
    header = header_lines(f"reproduce {args.figure}", config, {"series": f"{key} in {list(values)}"})
    return render_csv(header, ["series", *SWEEP_COLUMNS], rows)


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ConfigParseError(message)


def _add_config_flags(p):
    p.add_argument("--config", help="key=value config file")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override any config field")
    p.add_argument("-o", "--output", help="output file (default: stdout)")
    p.add_argument("--seed")
    p.add_argument("--pairs", help="pairs per setting (per run for chsh)")
    p.add_argument("--alpha-start", dest="alpha_start")
    p.add_argument("--alpha-end", dest="alpha_end")
    p.add_argument("--steps")
    p.add_argument("--beta")
    p.add_argument("--delta")
    p.add_argument("--threshold")
    p.add_argument("--efficiency")
    p.add_argument("--decoherence")


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="eprsim", description="Local hidden-variable EPR coincidence simulator")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("sweep", help="rotate polarizer 1, emit coincidence CSV")
    _add_config_flags(p)

    p = sub.add_parser("chsh", help="replicated CHSH experiment, emit JSON")
    _add_config_flags(p)
    p.add_argument("--runs", type=_positive_int, default=10)
    p.add_argument("--angles", help="a,a',b,b' (radians or <x>deg)")

    p = sub.add_parser("threshold-scan", help="CHSH mean/std over a threshold grid, emit CSV")
    _add_config_flags(p)
    p.add_argument("--runs", type=_positive_int, default=10)
    p.add_argument("--thresholds", default=",".join(map(repr, DEFAULT_THRESHOLDS)))
    p.add_argument("--angles")

    p = sub.add_parser("theory", help="exact oracle curves on the same grids")
    _add_config_flags(p)
    p.add_argument("--mode", choices=("sweep", "chsh"), default="sweep")
    p.add_argument("--thresholds", default=",".join(map(repr, DEFAULT_THRESHOLDS)))
    p.add_argument("--angles")

    p = sub.add_parser("reproduce", help="data file for one figure")
    p.add_argument("figure", choices=sorted(FIGURES))
    _add_config_flags(p)
    p.add_argument("--runs", type=_positive_int, default=10)
    return parser


COMMANDS = {
    "sweep": cmd_sweep,
    "chsh": cmd_chsh,
    "threshold-scan": cmd_threshold_scan,
    "theory": cmd_theory,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        text = COMMANDS[args.command](args)
    except ConfigParseError as exc:
        print(f"eprsim: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ConfigError as exc:
        print(f"eprsim: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except EmptyTallyError as exc:
        print(f"eprsim: empty tally: {exc}", file=sys.stderr)
        return EXIT_EMPTY
    try:
        emit(text, args.output)
    except OSError as exc:
        print(f"eprsim: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return 0


if __name__ == "__main__":
    sys.exit(main())
