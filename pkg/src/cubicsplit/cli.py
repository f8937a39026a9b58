"""Command line interface: build, analyze, classify, export and verify."""

from __future__ import annotations

import argparse
import itertools
import json
import re
import sys
from pathlib import Path
from typing import Sequence

from .cayley import FORMATS, BallTooLarge, UnknownFormat, build_ball, export, parse_ball
from .classify import DEFAULT_LENGTH_CAP, DEFAULT_MARGIN, DEFAULT_RADIUS, report_json, verify_all
from .groups import DEFAULT_RULE_CAP, CompletionOverflow, FamilySpec, InvalidParameters
from .splittings import classify

EXIT_OK, EXIT_STRUCTURAL, EXIT_CONFIG, EXIT_RESOURCE = 0, 1, 2, 3

# flag name -> type, shared by the command line and the config file
_SETTINGS = {
    "family": str,
    "n": int,
    "m": int,
    "radius": int,
    "margin": int,
    "rule_cap": int,
    "length_cap": int,
    "vertex_cap": int,
}
_DEFAULTS = {
    "radius": DEFAULT_RADIUS,
    "margin": DEFAULT_MARGIN,
    "rule_cap": DEFAULT_RULE_CAP,
    "length_cap": DEFAULT_LENGTH_CAP,
    "vertex_cap": 200_000,
}


class ConfigError(ValueError):
    pass


def read_config(path: str | Path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment, values may be quoted."""
    settings: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line or (line.startswith("[") and line.endswith("]")):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.replace("-", "_")
        if key not in _SETTINGS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        value = value.strip("\"'")
        try:
            settings[key] = _SETTINGS[key](value)
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return settings


def parse_grid(text: str) -> dict[str, list[int]]:
    """``"n=2..4,m=2..3"`` to ``{"n": [2, 3, 4], "m": [2, 3]}``; single values are allowed."""
    grid: dict[str, list[int]] = {}
    for item in filter(None, (s.strip() for s in text.split(","))):
        match = re.fullmatch(r"([nm])\s*=\s*(\d+)(?:\s*\.\.\s*(\d+))?", item)
        if not match:
            raise ConfigError(f"cannot parse parameter range {item!r}")
        lo = int(match.group(2))
        hi = int(match.group(3) or lo)
        if hi < lo:
            raise ConfigError(f"empty range {item!r}")
        grid[match.group(1)] = list(range(lo, hi + 1))
    return grid


def _settings(args: argparse.Namespace) -> dict:
    merged = dict(_DEFAULTS)
    if getattr(args, "config", None):
        merged.update(read_config(args.config))
    for key in _SETTINGS:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    return merged


def _spec(settings: dict) -> FamilySpec:
    if "family" not in settings or "n" not in settings:
        raise ConfigError("--family and --n are required (on the command line or in --config)")
    return FamilySpec(settings["family"].upper(), settings["n"], settings.get("m"))


def _write(data: bytes | str, out: str | None) -> None:
    raw = data.encode() if isinstance(data, str) else data
    if out in (None, "-"):
        sys.stdout.buffer.write(raw)
        sys.stdout.flush()
    else:
        Path(out).write_bytes(raw)


def _exit_code(report: dict) -> int:
    if report.get("resource_cap"):
        return EXIT_RESOURCE
    return EXIT_OK if report["status"] == "pass" else EXIT_STRUCTURAL


def cmd_build(args: argparse.Namespace) -> int:
    s = _settings(args)
    ball = build_ball(_spec(s), s["radius"], vertex_cap=s["vertex_cap"], rule_cap=s["rule_cap"])
    _write(export(ball, "json"), args.out)
    return EXIT_OK


def cmd_analyze(args: argparse.Namespace) -> int:
    s = _settings(args)
    report = verify_all(_spec(s), s["radius"], s["margin"], s["rule_cap"], s["length_cap"], timings=args.timings)
    _write(report_json(report), args.report)
    return _exit_code(report)


def cmd_classify(args: argparse.Namespace) -> int:
    spec = _spec(_settings(args))
    claim = classify(spec)
    out = {"presentation": spec.presentation(), "claim": claim.as_dict()}
    _write(json.dumps(out, indent=2, sort_keys=True) + "\n", None)
    return EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    if args.format not in FORMATS:
        raise UnknownFormat(f"unknown export format {args.format!r}; expected one of {FORMATS}")
    ball = parse_ball(Path(args.input).read_bytes())
    _write(export(ball, args.format), args.out)
    return EXIT_OK


def _cells(settings: dict, grid_text: str | None) -> list[FamilySpec]:
    if not grid_text:
        return [_spec(settings)]
    if "family" not in settings:
        raise ConfigError("--family is required")
    grid = parse_grid(grid_text)
    ns = grid.get("n", [settings["n"]] if "n" in settings else None)
    if ns is None:
        raise ConfigError("--all-params must give n when --n is absent")
    ms = grid.get("m", [settings.get("m")])
    cells = []
    for n, m in itertools.product(ns, ms):
        try:
            cells.append(FamilySpec(settings["family"].upper(), n, m))
        except InvalidParameters:
            # a family without m, or a cell below the admissible minimum
            if m is not None:
                try:
                    cells.append(FamilySpec(settings["family"].upper(), n, None))
                except InvalidParameters:
                    continue
    return sorted(set(cells), key=lambda c: (c.n, c.m or 0))


def cmd_verify(args: argparse.Namespace) -> int:
    s = _settings(args)
    cells = _cells(s, args.all_params)
    if not cells:
        raise ConfigError("the parameter range contains no admissible cell")
    worst = EXIT_OK
    for spec in cells:
        report = verify_all(spec, s["radius"], s["margin"], s["rule_cap"], s["length_cap"])
        code = _exit_code(report)
        worst = max(worst, code)
        failing = [k for k, v in report.items() if isinstance(v, dict) and v.get("status") in ("fail", "error")]
        extra = f" discrepancy={','.join(report['claim_discrepancy'])}" if report["claim_discrepancy"] else ""
        extra += f" failing={','.join(sorted(failing))}" if failing else ""
        print(f"{spec}: {report['status']}{extra}")
        if args.report_dir:
            out = Path(args.report_dir)
            out.mkdir(parents=True, exist_ok=True)
            name = f"{spec.family.value}_n{spec.n}" + (f"_m{spec.m}" if spec.m is not None else "")
            (out / f"{name}.json").write_text(report_json(report))
    return worst


def _family_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--family", help="P1 .. P7")
    p.add_argument("--n", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--config", help="key = value file; command line flags win")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cubicsplit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="build a Cayley ball and write it as JSON")
    _family_args(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--vertex-cap", dest="vertex_cap", type=int)
    p.add_argument("--rule-cap", dest="rule_cap", type=int)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("analyze", help="run the full verification and write the JSON report")
    _family_args(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--margin", type=int)
    p.add_argument("--rule-cap", dest="rule_cap", type=int)
    p.add_argument("--length-cap", dest="length_cap", type=int)
    p.add_argument("--timings", action="store_true", help="add wall-clock stage times (breaks byte equality)")
    p.add_argument("--report", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("classify", help="print the claimed splitting and the presentation")
    _family_args(p)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("export", help="convert a ball JSON file to dot, graphml or json")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--format", required=True)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("verify", help="verify one cell or a parameter grid, one summary line per cell")
    _family_args(p)
    p.add_argument("--radius", type=int)
    p.add_argument("--margin", type=int)
    p.add_argument("--rule-cap", dest="rule_cap", type=int)
    p.add_argument("--length-cap", dest="length_cap", type=int)
    p.add_argument("--all-params", dest="all_params", help='ranges such as "n=2..4,m=2..3"')
    p.add_argument("--report-dir", dest="report_dir")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, InvalidParameters, UnknownFormat, FileNotFoundError, json.JSONDecodeError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (CompletionOverflow, BallTooLarge) as exc:
        print(f"resource cap exceeded: {exc}", file=sys.stderr)
        return EXIT_RESOURCE


if __name__ == "__main__":
    sys.exit(main())
