"""Command-line interface: ``javelin {optimal,cylinder,sweep,verify,eigen}``.

Exit status is 0 on success, 2 for usage or configuration errors and 3 for
numerical failures; failures also print a one-line JSON record on stderr.
``JAVELIN_LOG`` (``error``, ``info`` or ``debug``) sets the log level.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERICAL = 3

SUBCOMMANDS = ("optimal", "cylinder", "sweep", "verify", "eigen")
LOG_LEVELS = {"error": logging.ERROR, "info": logging.INFO, "debug": logging.DEBUG}

log = logging.getLogger("javelin")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    """Everything one invocation needs; built from defaults, a JSON file and flags."""

    subcommand: str
    # shooting
    epsilon: float = 1e-3
    theta_guess: float = -math.pi / 6
    t_span: float = 10.0
    rtol: float = 1e-9
    atol: float = 1e-11
    y0: float = 1.0
    # sweep / sampling
    samples: int | None = None
    workers: int = 1
    # oracle
    profile: str | None = None
    grid: int = 4000
    tip_cut: float = 0.02
    tip_mode: str = "auto"
    lam: float | None = None
    # outputs
    out: str | None = None
    summary: str | None = None
    detail: str | None = None

    def __post_init__(self):
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError(f"unknown subcommand {self.subcommand!r}")
        for name in ("epsilon", "t_span", "rtol", "atol", "y0", "tip_cut"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and value > 0 and math.isfinite(value)):
                raise ConfigError(f"{name} must be a positive number, got {value!r}")
        if not math.isfinite(self.theta_guess):
            raise ConfigError("theta_guess must be finite")
        if self.samples is not None and self.samples < 2:
            raise ConfigError("samples must be at least 2")
        if self.grid < 50:
            raise ConfigError("grid must be at least 50")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        if self.tip_mode not in ("auto", "truncate", "floor"):
            raise ConfigError("tip_mode must be 'auto', 'truncate' or 'floor'")
        if not self.tip_cut < 1:
            raise ConfigError("tip_cut must be below 1")
        for name in ("out", "summary", "detail"):
            path = getattr(self, name)
            if path is not None:
                parent = Path(path).resolve().parent
                if not parent.is_dir() or not os.access(parent, os.W_OK):
                    raise ConfigError(f"{name}: directory of {path!r} is not writable")

    @classmethod
    def from_mapping(cls, mapping: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(mapping) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        return cls(**mapping)

    def shooting_config(self):
        from .integrator import Tolerances
        from .shooting import ShootingConfig

        return ShootingConfig(epsilon=self.epsilon, theta_guess=self.theta_guess,
                              t_span=self.t_span, tol=Tolerances(rel=self.rtol, abs=self.atol),
                              y0=self.y0)


# ----------------------------------------------------------------------------
# subcommands


def _emit(record: dict) -> None:
    print(json.dumps(record, indent=2))


def cmd_optimal(cfg: RunConfig) -> int:
    from . import serialize, shooting
    from .cylinder import improvement_ratio

    t0 = time.perf_counter()
    result = shooting.solve(cfg.shooting_config())
    record = serialize.summary_record(result)
    record["improvement_ratio"] = improvement_ratio(result.lam)
    record["elapsed_s"] = time.perf_counter() - t0
    if cfg.out:
        serialize.save_profile(result.profile, cfg.out)
    if cfg.summary:
        serialize.write_json(record, cfg.summary)
    _emit(record)
    return EXIT_OK


def cmd_cylinder(cfg: RunConfig) -> int:
    from .cylinder import cylinder_mode

    mode = cylinder_mode(cfg.samples or 201)
    if cfg.out:
        with open(cfg.out, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("s", "y"))
            for s, y in zip(mode.s, mode.y):
                w.writerow((repr(float(s)), repr(float(y))))
    print(f"{mode.lam:.10f}")
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    from .shooting import sweep

    n = cfg.samples or 720
    thetas = np.linspace(0.0, 2 * math.pi, n, endpoint=False)
    outcomes = sweep(thetas, cfg.shooting_config(), workers=cfg.workers)

    def fmt(v):
        return "nan" if v is None else repr(float(v))

    rows = [(repr(float(o.theta)), fmt(o.first_g1), fmt(o.first_g2), int(o.diverged))
            for o in outcomes]
    target = open(cfg.out, "w", newline="") if cfg.out else sys.stdout
    try:
        w = csv.writer(target, lineterminator="\n")
        w.writerow(("theta", "dt_g1_first", "dt_g2_first", "diverged"))
        w.writerows(rows)
    finally:
        if cfg.out:
            target.close()
    if cfg.detail:
        detail = [{"theta": o.theta, "dt_g1": o.dt_g1, "dt_g2": o.dt_g2,
                   "diverged": o.diverged, "status": o.status} for o in outcomes]
        Path(cfg.detail).write_text(json.dumps(detail) + "\n")
    return EXIT_OK


def cmd_verify(cfg: RunConfig) -> int:
    from . import oracle, serialize

    if cfg.profile is None:
        raise ConfigError("verify needs --profile")
    profile = serialize.load_profile(cfg.profile, lam=cfg.lam)
    beam = oracle.DiscreteBeam.from_profile(profile, cfg.grid, cfg.tip_cut, cfg.tip_mode)
    spec = oracle.lowest_frequency(beam, result=True)
    record = {
        "lambda_oracle": spec.lam,
        "lambda_input": profile.lam,
        "relative_gap": abs(spec.lam - profile.lam) / profile.lam,
        "rigid_modes": spec.rigid_modes,
        "mode_asymmetry": spec.asymmetry(),
        "grid": cfg.grid,
        "tip_cut": cfg.tip_cut,
        "tip_mode": cfg.tip_mode,
    }
    if cfg.summary:
        Path(cfg.summary).write_text(json.dumps(record, indent=2) + "\n")
    _emit(record)
    return EXIT_OK


def cmd_eigen(cfg: RunConfig) -> int:
    from .linearization import eigenpairs

    labels = {0.0: "S1", 1.0: "S2", -4.0: "S3", 5.0: "S4"}
    pairs = []
    for p in eigenpairs():
        label = labels.get(p.q, "S5" if p.q > 0 else "S6")
        pairs.append({"label": label, "q": p.q, "direction": [float(v) for v in p.direction],
                      "residual": p.residual()})
    pairs.sort(key=lambda d: d["label"])
    record = {"eigenvalues": sorted(p["q"] for p in pairs), "eigenvectors": pairs}
    if cfg.out:
        Path(cfg.out).write_text(json.dumps(record, indent=2) + "\n")
    _emit(record)
    return EXIT_OK


COMMANDS = {"optimal": cmd_optimal, "cylinder": cmd_cylinder, "sweep": cmd_sweep,
            "verify": cmd_verify, "eigen": cmd_eigen}


# ----------------------------------------------------------------------------
# parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _error_record("usage", message, EXIT_USAGE)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="javelin", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file with RunConfig keys (flags override it)")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def shooting_flags(p):
        p.add_argument("--epsilon", type=float, help="offset from the fixed point (1e-3)")
        p.add_argument("--theta-guess", type=float, dest="theta_guess",
                       help="initial direction in radians (-pi/6)")
        p.add_argument("--t-span", type=float, dest="t_span", help="backward horizon (10)")
        p.add_argument("--rtol", type=float, help="integrator relative tolerance (1e-9)")
        p.add_argument("--atol", type=float, help="integrator absolute tolerance (1e-11)")

    p = sub.add_parser("optimal", help="solve for the optimal taper")
    shooting_flags(p)
    p.add_argument("--out", help="profile CSV (s,a,b,phi,y,s2y)")
    p.add_argument("--summary", help="summary JSON")

    p = sub.add_parser("cylinder", help="uniform-beam frequency and mode")
    p.add_argument("--samples", type=int, help="mode samples on [-1, 1] (201)")
    p.add_argument("--out", help="mode CSV (s,y)")

    p = sub.add_parser("sweep", help="first crossing times over a theta grid")
    shooting_flags(p)
    p.add_argument("--samples", type=int, help="number of directions (720)")
    p.add_argument("--workers", type=int, help="parallel processes (1)")
    p.add_argument("--out", help="CSV (theta,dt_g1_first,dt_g2_first,diverged)")
    p.add_argument("--detail", help="JSON with every crossing of every shot")

    p = sub.add_parser("verify", help="finite-difference cross-check of a profile")
    p.add_argument("--profile", required=True, help="profile CSV")
    p.add_argument("--grid", type=int, help="grid points on the beam (4000)")
    p.add_argument("--tip-cut", type=float, dest="tip_cut", help="tip regularization length (0.02)")
    p.add_argument("--tip-mode", choices=("auto", "truncate", "floor"), dest="tip_mode",
                   help="auto (default): floor a thick tip, truncate a thin one")
    p.add_argument("--lambda", type=float, dest="lam",
                   help="reference frequency (default: Rayleigh quotient of the profile)")
    p.add_argument("--summary", help="also write the JSON record here")

    p = sub.add_parser("eigen", help="linearization eigenvalues and directions")
    p.add_argument("--out", help="JSON output path")
    return parser


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    values = {}
    if args.config:
        try:
            values.update(json.loads(Path(args.config).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config!r}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        values.pop("subcommand", None)
    for key, value in vars(args).items():
        if key in ("config", "subcommand") or value is None:
            continue
        values[key] = value
    values["subcommand"] = args.subcommand
    return RunConfig.from_mapping(values)


def _error_record(kind: str, message: str, code: int, **extra) -> None:
    rec = {"error": kind, "message": message, "exit_code": code}
    rec.update(extra)
    print(json.dumps(rec), file=sys.stderr)


def configure_logging() -> None:
    level_name = os.environ.get("JAVELIN_LOG", "error").lower()
    level = LOG_LEVELS.get(level_name, logging.ERROR)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)
    if level_name not in LOG_LEVELS:
        log.error("ignoring JAVELIN_LOG=%r (use error, info or debug)", level_name)


def run(argv=None) -> int:
    """Execute one invocation and return its exit status."""
    from .model import ModelError
    from .oracle import OracleError, RigidModeError
    from .serialize import ProfileFormatError
    from .shooting import ShootingError

    configure_logging()
    try:
        cfg = parse_config(sys.argv[1:] if argv is None else argv)
    except SystemExit as exc:  # argparse: --help (0) or a usage error (2)
        return int(exc.code or 0)
    except (ConfigError, TypeError) as exc:
        _error_record("config", str(exc), EXIT_USAGE)
        return EXIT_USAGE
    log.info("config: %s", dataclasses.asdict(cfg))
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except ConfigError as exc:
        _error_record("config", str(exc), EXIT_USAGE)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        _error_record("io", str(exc), EXIT_USAGE)
        return EXIT_USAGE
    except ProfileFormatError as exc:
        _error_record("profile_format", str(exc), EXIT_USAGE)
        return EXIT_USAGE
    except ModelError as exc:
        _error_record("validation", str(exc), EXIT_USAGE)
        return EXIT_USAGE
    except RigidModeError as exc:
        _error_record("rigid_mode_count", str(exc), EXIT_NUMERICAL, rigid_modes=exc.count)
        return EXIT_NUMERICAL
    except ShootingError as exc:
        _error_record(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except (OracleError, ArithmeticError) as exc:
        _error_record(type(exc).__name__, str(exc), EXIT_NUMERICAL)
        return EXIT_NUMERICAL
    except ValueError as exc:
        _error_record("invalid_input", str(exc), EXIT_USAGE)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())
