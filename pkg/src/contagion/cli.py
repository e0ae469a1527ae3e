"""Config-driven command line front end.

Subcommands (each reads a JSON scenario config and writes CSV plus a
run manifest into --out):

    contagion limit    --config scenario.json --out results/
    contagion simulate --config scenario.json --out results/
    contagion analyze  --config scenario.json --out results/
    contagion compare  --config scenario.json --out results/

`limit` solves the large-portfolio dynamics, `simulate` runs the exact
finite-portfolio Monte Carlo, `analyze` adds the Gaussian variance and
excess-probability columns, and `compare` joins simulation against the
limit on the shared grid. The CONTAGION_THREADS environment variable
caps Monte-Carlo worker processes; it never changes the numbers.

Exit codes: 0 success, 2 config problem, 3 numerical failure,
4 reciprocity failure.
"""

import argparse
import hashlib
import json
import sys
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .clt import excess_prob, variance_horizon
from .ctmc import monte_carlo
from .errors import (
    ContagionError,
    NumericalError,
    ParseError,
    ReciprocityError,
    ValidationError,
)
from .errors import DimensionMismatch, GridOutOfRange, NotAGridPoint
from .limit import limit_loss, solve_limit
from .model import FirmClass, build_portfolio, check_reciprocity, validate_environment

_CLASS_FIELDS = ("alpha", "beta", "gamma", "exposure", "weight")
_MODES = ("deterministic_proportions", "iid_sample")


@dataclass(frozen=True)
class ScenarioConfig:
    """A parsed, validated scenario."""

    environment: object
    n: int
    horizon: float
    grid_size: int
    replicas: int
    thresholds: tuple
    seed: int
    assignment_mode: str
    ode_tolerance: float

    def canonical(self) -> dict:
        """Semantic content with defaults applied, for hashing."""
        return {
            "classes": [
                {f: getattr(c, f) for f in _CLASS_FIELDS}
                for c in self.environment.classes
            ],
            "n": self.n,
            "horizon": self.horizon,
            "grid_size": self.grid_size,
            "replicas": self.replicas,
            "thresholds": list(self.thresholds),
            "seed": self.seed,
            "assignment_mode": self.assignment_mode,
            "ode_tolerance": self.ode_tolerance,
        }

    def config_hash(self) -> str:
        text = json.dumps(self.canonical(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()


def _require(doc: dict, field: str):
    if field not in doc:
        raise ParseError(f"missing required field {field!r}")
    return doc[field]


def _number(value, field: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"field {field!r} must be a number")
    return float(value)


def _integer(value, field: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError(f"field {field!r} must be an integer")
    return value


def parse_config(path) -> ScenarioConfig:
    """Load and validate a scenario config document.

    Raises ParseError for malformed documents (with line/field
    information) and ValidationError subclasses for semantically
    invalid values.
    """
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise ParseError("config must be a JSON object")

    known = {
        "classes", "n", "horizon", "grid_size", "replicas", "thresholds",
        "seed", "assignment_mode", "ode_tolerance", "description",
    }
    for key in doc:
        if key not in known:
            raise ParseError(f"unknown field {key!r}")

    raw_classes = _require(doc, "classes")
    if not isinstance(raw_classes, list) or not raw_classes:
        raise ParseError("field 'classes' must be a nonempty array")
    classes = []
    for i, entry in enumerate(raw_classes):
        if not isinstance(entry, dict):
            raise ParseError(f"classes[{i}] must be an object")
        extra = set(entry) - set(_CLASS_FIELDS)
        if extra:
            raise ParseError(f"classes[{i}]: unknown field {extra.pop()!r}")
        values = {
            f: _number(_require(entry, f), f"classes[{i}].{f}")
            for f in _CLASS_FIELDS
        }
        classes.append(FirmClass(**values))
    env = validate_environment(classes)

    n = _integer(_require(doc, "n"), "n")
    horizon = _number(_require(doc, "horizon"), "horizon")
    grid_size = _integer(doc.get("grid_size", 4096), "grid_size")
    replicas = _integer(doc.get("replicas", 1000), "replicas")
    seed = _integer(doc.get("seed", 0), "seed")
    tol = _number(doc.get("ode_tolerance", 1e-8), "ode_tolerance")
    mode = doc.get("assignment_mode", "deterministic_proportions")
    if mode not in _MODES:
        raise ParseError(f"field 'assignment_mode' must be one of {_MODES}")
    raw_thresholds = doc.get("thresholds", [])
    if not isinstance(raw_thresholds, list):
        raise ParseError("field 'thresholds' must be an array")
    thresholds = tuple(
        sorted({_number(x, f"thresholds[{i}]") for i, x in enumerate(raw_thresholds)})
    )

    if n < 1:
        raise ValidationError("n must be >= 1")
    if horizon <= 0:
        raise ValidationError("horizon must be positive")
    if grid_size < 1:
        raise ValidationError("grid_size must be >= 1")
    if replicas < 1:
        raise ValidationError("replicas must be >= 1")
    if seed < 0:
        raise ValidationError("seed must be >= 0")
    if tol <= 0:
        raise ValidationError("ode_tolerance must be positive")
    if any(x < 0 or not np.isfinite(x) for x in thresholds):
        raise ValidationError("thresholds must be finite and >= 0")

    return ScenarioConfig(
        environment=env,
        n=n,
        horizon=horizon,
        grid_size=grid_size,
        replicas=replicas,
        thresholds=thresholds,
        seed=seed,
        assignment_mode=mode,
        ode_tolerance=tol,
    )


def _fmt(value) -> str:
    # repr of a float is the shortest decimal that round-trips
    return repr(float(value))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _write_manifest(out_dir: Path, command: str, config: ScenarioConfig,
                    started: str, outputs) -> Path:
    manifest = {
        "command": command,
        "config_hash": config.config_hash(),
        "tool_version": __version__,
        "seed": config.seed,
        "started_utc": started,
        "finished_utc": _now(),
        "outputs": [p.name for p in outputs],
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return path


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _solve(config: ScenarioConfig):
    return solve_limit(
        config.environment, config.horizon, config.grid_size, config.ode_tolerance
    )


def _ensemble(config: ScenarioConfig):
    portfolio = build_portfolio(
        config.environment, config.n, config.assignment_mode, config.seed
    )
    grid = np.linspace(0.0, config.horizon, config.grid_size + 1)
    return monte_carlo(
        portfolio,
        config.horizon,
        grid,
        config.replicas,
        config.thresholds,
        config.seed,
    )


def run_limit(config: ScenarioConfig, out_dir: Path) -> list:
    """Write limit.csv: t, per-class default probabilities, aggregate,
    expected loss, per-class hazards."""
    started = _now()
    sol = _solve(config)
    env = config.environment
    loss = limit_loss(sol, env)
    k = env.k
    header = (
        ["t"]
        + [f"q_{j + 1}" for j in range(k)]
        + ["m", "l"]
        + [f"hazard_{j + 1}" for j in range(k)]
    )
    rows = np.column_stack(
        [sol.t_grid, sol.default_prob, sol.aggregate, loss, sol.hazard]
    )
    path = out_dir / "limit.csv"
    _write_csv(path, header, rows)
    return [path, _write_manifest(out_dir, "limit", config, started, [path])]


def run_simulate(config: ScenarioConfig, out_dir: Path) -> list:
    """Write mc.csv: t, mean class fractions, mean loss, scaled loss
    variance, and one empirical excess column per threshold."""
    started = _now()
    stats = _ensemble(config)
    k = config.environment.k
    header = (
        ["t"]
        + [f"mean_frac_{j + 1}" for j in range(k)]
        + ["mean_loss", "var_scaled_loss"]
        + [f"excess_emp_{_fmt(x)}" for x in config.thresholds]
    )
    cols = [stats.t_grid, stats.mean_class_fractions, stats.mean_loss_fraction,
            stats.var_scaled_loss]
    cols += [stats.excess_prob[x] for x in config.thresholds]
    rows = np.column_stack(cols)
    path = out_dir / "mc.csv"
    _write_csv(path, header, rows)
    return [path, _write_manifest(out_dir, "simulate", config, started, [path])]


def run_analyze(config: ScenarioConfig, out_dir: Path) -> list:
    """Write clt.csv: t, expected loss, loss variance, and one Gaussian
    excess column per threshold. Requires reciprocity."""
    started = _now()
    env = config.environment
    cert = check_reciprocity(env)
    sol = _solve(config)
    rows = []
    for t in sol.t_grid:
        report = variance_horizon(sol, env, float(t), cert)
        rows.append(
            [t, report.mean_loss, report.total]
            + [excess_prob(report, config.n, x) for x in config.thresholds]
        )
    header = ["t", "l", "V"] + [f"excess_{_fmt(x)}" for x in config.thresholds]
    path = out_dir / "clt.csv"
    _write_csv(path, header, rows)
    return [path, _write_manifest(out_dir, "analyze", config, started, [path])]


def run_compare(config: ScenarioConfig, out_dir: Path) -> list:
    """Write compare.csv joining the limit, the Gaussian variance and
    the Monte-Carlo ensemble on the shared grid."""
    started = _now()
    env = config.environment
    cert = check_reciprocity(env)
    sol = _solve(config)
    loss = limit_loss(sol, env)
    stats = _ensemble(config)
    total = np.array(
        [variance_horizon(sol, env, float(t), cert).total for t in sol.t_grid]
    )
    gap = np.abs(sol.default_prob - stats.mean_class_fractions)
    k = env.k
    header = (
        ["t"]
        + [f"q_{j + 1}" for j in range(k)]
        + [f"emp_frac_{j + 1}" for j in range(k)]
        + [f"abs_gap_{j + 1}" for j in range(k)]
        + ["l", "mean_loss", "V", "var_scaled_loss_gap"]
    )
    rows = np.column_stack(
        [
            sol.t_grid,
            sol.default_prob,
            stats.mean_class_fractions,
            gap,
            loss,
            stats.mean_loss_fraction,
            total,
            np.abs(stats.var_scaled_loss - total),
        ]
    )
    path = out_dir / "compare.csv"
    _write_csv(path, header, rows)
    return [path, _write_manifest(out_dir, "compare", config, started, [path])]


_RUNNERS = {
    "limit": run_limit,
    "simulate": run_simulate,
    "analyze": run_analyze,
    "compare": run_compare,
}


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="contagion",
        description="Credit contagion laboratory: exact portfolio "
        "simulation, mean-field limits, Gaussian loss approximations.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, runner in _RUNNERS.items():
        p = sub.add_parser(name, help=runner.__doc__.split("\n")[0].lower())
        p.add_argument("--config", required=True, help="scenario config JSON")
        p.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)

    try:
        config = parse_config(args.config)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = _RUNNERS[args.command](config, out_dir)
    except (ParseError, ValidationError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, GridOutOfRange, NotAGridPoint, DimensionMismatch) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    except ReciprocityError as exc:
        print(f"reciprocity error: {exc}", file=sys.stderr)
        return 4
    except ContagionError as exc:  # pragma: no cover - safety net
        print(f"error: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
