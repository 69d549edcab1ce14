"""Command line interface.

Exit codes: 0 success, 1 failed check suite, 2 bad configuration or input,
3 numerical failure, 4 degenerate section zero.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from . import geometry as geo
from .checks import run_checks
from .errors import ConfigError, DegenerateZeroError, GeometryError, LoadError, NumericError
from .euler import MODES, MQContext, euler_integral, hopf_indices, thom_family_scan
from .pfaffian import load_skew_matrix, pfaffian_berezin, pfaffian_expansion

EXIT_OK, EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_NUMERIC, EXIT_DEGENERATE = 0, 1, 2, 3, 4
DEFAULT_GRID = {2: 128, 4: 24}
MANIFOLD_PARAMS = {
    "sphere2": ("radius",),
    "sphere4": ("radius",),
    "torus2": ("major_radius", "minor_radius"),
    "flat_torus2": (),
}


@dataclass
class RunConfig:
    command: str
    manifold: str | None = None
    params: dict = field(default_factory=dict)
    section: str = "zero"
    grid: tuple | None = None
    t: tuple = (1.0,)
    mode: str = "calibrated"
    seed: int = 0
    max_n: int = 6
    method: str = "berezin"
    input: str | None = None
    output: str | None = None
    seeds: int | None = None
    tol: float = 1e-4

    def validate(self):
        """Collect every problem and raise them together."""
        problems = []
        if self.command == "check":
            if self.max_n % 2 or not 2 <= self.max_n <= 10:
                problems.append(f"--max-n must be an even integer in [2, 10], got {self.max_n}")
        if self.command == "pfaffian" and self.method not in ("berezin", "expansion"):
            problems.append(f"--method must be berezin or expansion, got {self.method!r}")
        if self.command in ("euler", "hopf", "scan"):
            if self.manifold not in MANIFOLD_PARAMS:
                problems.append(f"--manifold must be one of {sorted(MANIFOLD_PARAMS)}, got {self.manifold!r}")
            else:
                extra = sorted(set(self.params) - set(MANIFOLD_PARAMS[self.manifold]))
                if extra:
                    problems.append(f"{self.manifold} does not take {', '.join('--' + p.replace('_', '-') for p in extra)}")
                allowed = [s for s, ms in geo.SECTIONS.items() if self.manifold in ms]
                if self.section not in allowed:
                    problems.append(f"section {self.section!r} not available on {self.manifold}; choose from {allowed}")
                if self.grid is not None:
                    dim = 4 if self.manifold == "sphere4" else 2
                    if len(self.grid) not in (1, dim):
                        problems.append(f"--grid needs 1 or {dim} node counts")
            if self.grid is not None and any(k < 8 for k in self.grid):
                problems.append("--grid node counts must be at least 8")
            if self.mode not in MODES:
                problems.append(f"--mode must be one of {list(MODES)}, got {self.mode!r}")
            if any(t < 0 for t in self.t):
                problems.append("--t values must be non-negative")
            if self.command == "euler" and len(self.t) != 1:
                problems.append("euler takes a single --t value")
        if problems:
            raise ConfigError("; ".join(problems))

    def build_context(self) -> MQContext:
        M = geo.builtin_manifold(self.manifold, **self.params)
        s = geo.builtin_section(self.section, M)
        grid = self.grid or (DEFAULT_GRID[M.dim],)
        nodes = grid * M.dim if len(grid) == 1 else grid
        return MQContext(M, s, self.mode, nodes)


def _parse_floats(text: str) -> tuple:
    try:
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from exc


def _parse_ints(text: str) -> tuple:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supereuler", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check", help="run the algebraic identity suites")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-n", type=int, default=6)
    p.add_argument("--output")

    p = sub.add_parser("pfaffian", help="Pfaffian of a skew matrix stored as JSON")
    p.add_argument("input")
    p.add_argument("--method", default="berezin")

    for name, help_text in (("euler", "integrate the Euler form"),
                            ("hopf", "sum Poincare-Hopf indices of a section"),
                            ("scan", "integrate along the family s_t = t s")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--manifold", required=True)
        p.add_argument("--radius", type=float)
        p.add_argument("--major-radius", type=float)
        p.add_argument("--minor-radius", type=float)
        p.add_argument("--section", default="zero")
        p.add_argument("--grid", type=_parse_ints)
        p.add_argument("--mode", default="calibrated")
        p.add_argument("--output")
        if name == "hopf":
            p.add_argument("--seeds", type=int, help="Newton seeds per axis")
        else:
            p.add_argument("--t", type=_parse_floats, default=(1.0,))
        if name == "scan":
            p.add_argument("--tol", type=float, default=1e-4)
    return parser


def config_from_args(args) -> RunConfig:
    params = {k: getattr(args, k) for k in ("radius", "major_radius", "minor_radius")
              if getattr(args, k, None) is not None}
    cfg = RunConfig(command=args.command, params=params)
    for key in ("manifold", "section", "grid", "t", "mode", "seed", "max_n", "method", "input", "output", "seeds", "tol"):
        if getattr(args, key, None) is not None:
            setattr(cfg, key, getattr(args, key))
    return cfg


def _emit(obj, cfg: RunConfig):
    text = json.dumps(obj, indent=2) + "\n"
    sys.stdout.write(text)
    if cfg.output:
        Path(cfg.output).write_text(text)


def _header(ctx: MQContext) -> dict:
    return {
        "manifold": ctx.manifold.name,
        "params": dict(ctx.manifold.params),
        "section": ctx.section.name,
    }


def cmd_check(cfg: RunConfig) -> int:
    report = run_checks(cfg.seed, cfg.max_n)
    _emit(report, cfg)
    return EXIT_OK if report["passed"] else EXIT_CHECK_FAILED


def format_scalar(x) -> str:
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else str(x)
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def cmd_pfaffian(cfg: RunConfig) -> int:
    omega = load_skew_matrix(cfg.input)
    value = pfaffian_berezin(omega) if cfg.method == "berezin" else pfaffian_expansion(omega)
    sys.stdout.write(format_scalar(value) + "\n")
    return EXIT_OK


def cmd_euler(cfg: RunConfig) -> int:
    ctx = cfg.build_context()
    _emit(euler_integral(ctx, cfg.t[0]).to_dict(), cfg)
    return EXIT_OK


def cmd_hopf(cfg: RunConfig) -> int:
    ctx = cfg.build_context()
    report = hopf_indices(ctx, seeds_per_axis=cfg.seeds)
    _emit({**_header(ctx), **report.to_dict()}, cfg)
    return EXIT_OK


def cmd_scan(cfg: RunConfig) -> int:
    ctx = cfg.build_context()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")  # recorded in the report instead
        report = thom_family_scan(ctx, cfg.t, cfg.tol)
    first = report.results[0] if report.results else None
    out = {
        **_header(ctx),
        "mode": ctx.mode,
        "normalization_constant": first.normalization_constant if first else None,
        "node_counts": list(ctx.nodes),
        **report.to_dict(),
    }
    _emit(out, cfg)
    return EXIT_OK


COMMANDS = {"check": cmd_check, "pfaffian": cmd_pfaffian, "euler": cmd_euler, "hopf": cmd_hopf, "scan": cmd_scan}


def _message(exc: Exception) -> str:
    return str(exc.args[0]) if exc.args else type(exc).__name__


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        cfg.validate()
        return COMMANDS[cfg.command](cfg)
    except (ConfigError, LoadError) as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateZeroError as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        return EXIT_DEGENERATE
    except (NumericError, GeometryError) as exc:
        print(f"error: {_message(exc)}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
