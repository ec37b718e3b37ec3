"""Command-line orchestration: config ingestion, experiment dispatch, and
stable CSV/JSON emission.

Every output carries a provenance sidecar (seed, reps, resolved parameters)
sufficient to regenerate it bit-exactly; worker count never affects bytes.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import io
import json
import secrets
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional, Sequence

from . import __version__
from .engine import run_replications
from .scenarios import (
    AUTHOR_COUNT_RANGE,
    CASE_IDS,
    CaseSampler,
    ExperimentGrid,
    SweepKind,
    TableDefaults,
    fig1_grid,
    fig2_sweep,
)
from .stats import log_fit, ols_fit_planar

COMMANDS = ("run", "fig1", "fig2", "fig3", "case", "fit")

SCHEMAS: dict[str, tuple[str, ...]] = {
    "run": ("n", "iau_rate", "rate_std"),
    "fig1": ("authors", "u_width", "c_width", "iau_rate", "n"),
    "fig2a": ("authors", "duration_weeks", "mean", "std", "n"),
    "fig2b": ("authors", "progress", "mean", "std", "n"),
    "fig2c": ("authors", "position", "rate", "n"),
    "fig3": ("case", "mean", "std", "n"),
    "events": ("rep", "round", "issuer", "from", "to", "outcome"),
}

DEFAULT_REPS = {"run": 10_000, "fig1": 10_000, "fig2": 100_000, "fig3": 100_000, "case": 100_000}

_FIG2_KINDS = ("all", "duration", "progress", "position")


class ParseError(ValueError):
    """A config document failed validation; `key` names the offender."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class ProjectOverrides:
    """Optional pins applied on top of the stock sampling policy."""

    n_authors: Optional[int] = None
    horizon_weeks: Optional[int] = None
    start_progress: Optional[float] = None
    utility_width: Optional[float] = None
    contribution_width: Optional[float] = None
    discount_rate: Optional[float] = None
    withdrawal_penalty: Optional[float] = None
    contribution_noise: Optional[float] = None

    def to_sampler(self) -> TableDefaults:
        kwargs = {}
        if self.n_authors is not None:
            kwargs["n_authors"] = self.n_authors
        if self.horizon_weeks is not None:
            kwargs["horizon"] = self.horizon_weeks
        if self.start_progress is not None:
            kwargs["start_progress"] = self.start_progress
        if self.utility_width is not None:
            kwargs["utility_width"] = self.utility_width
        if self.contribution_width is not None:
            kwargs["contribution_width"] = self.contribution_width
        if self.discount_rate is not None:
            kwargs["discount_rate"] = self.discount_rate
        if self.withdrawal_penalty is not None:
            kwargs["withdrawal_penalty"] = self.withdrawal_penalty
        if self.contribution_noise is not None:
            kwargs["contribution_noise"] = self.contribution_noise
        return TableDefaults(**kwargs)


@dataclass(frozen=True)
class RunSpec:
    command: str = "run"
    master_seed: Optional[int] = None
    reps: Optional[int] = None
    output_dir: str = "results"
    workers: int = 1
    log_events: bool = False
    case: Optional[str] = None
    fig2_kind: str = "all"
    fit_input: Optional[str] = None
    fit_authors: int = 5
    overrides: ProjectOverrides = field(default_factory=ProjectOverrides)


@dataclass(frozen=True)
class ResultTable:
    schema: str
    name: str
    columns: tuple[str, ...]
    rows: tuple[tuple, ...]
    provenance: dict

    def __post_init__(self) -> None:
        if self.schema not in SCHEMAS:
            raise ValueError(f"unknown schema {self.schema!r}")
        if self.columns != SCHEMAS[self.schema]:
            raise ValueError(f"columns do not match schema {self.schema!r}")
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError("table is not rectangular")


# ---------------------------------------------------------------------------
# Config document handling


_RUN_KEYS = {
    "command", "seed", "reps", "out", "workers", "log_events",
    "case", "fig2_kind", "input", "fit_authors",
}
_PROJECT_KEYS = {
    "n_authors", "horizon_weeks", "start_progress", "utility_width",
    "contribution_width", "discount_rate", "withdrawal_penalty",
    "contribution_noise",
}


def _parse_int(section: str, key: str, raw: str, low: Optional[int] = None,
               high: Optional[int] = None) -> int:
    try:
        value = int(raw)
    except ValueError:
        raise ParseError(f"[{section}] {key}", f"expected an integer, got {raw!r}") from None
    if low is not None and value < low:
        raise ParseError(f"[{section}] {key}", f"must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ParseError(f"[{section}] {key}", f"must be <= {high}, got {value}")
    return value


def _parse_float(section: str, key: str, raw: str, low: Optional[float] = None,
                 high: Optional[float] = None) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"[{section}] {key}", f"expected a number, got {raw!r}") from None
    if low is not None and value < low:
        raise ParseError(f"[{section}] {key}", f"must be >= {low}, got {value}")
    if high is not None and value > high:
        raise ParseError(f"[{section}] {key}", f"must be <= {high}, got {value}")
    return value


def _parse_bool(section: str, key: str, raw: str) -> bool:
    lowered = raw.strip().lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ParseError(f"[{section}] {key}", f"expected a boolean, got {raw!r}")


def parse_config(text: str) -> RunSpec:
    """Parse and validate a config document; unknown or duplicate keys fail."""
    parser = configparser.ConfigParser(strict=True, interpolation=None)
    try:
        parser.read_string(text)
    except configparser.DuplicateOptionError as exc:
        raise ParseError(f"[{exc.section}] {exc.option}", "duplicate key") from None
    except configparser.DuplicateSectionError as exc:
        raise ParseError(f"[{exc.section}]", "duplicate section") from None
    except configparser.Error as exc:
        raise ParseError("document", str(exc)) from None

    for section in parser.sections():
        if section not in ("run", "project"):
            raise ParseError(f"[{section}]", "unknown section")
    run_items = dict(parser.items("run")) if parser.has_section("run") else {}
    project_items = dict(parser.items("project")) if parser.has_section("project") else {}
    for key in run_items:
        if key not in _RUN_KEYS:
            raise ParseError(f"[run] {key}", "unknown key")
    for key in project_items:
        if key not in _PROJECT_KEYS:
            raise ParseError(f"[project] {key}", "unknown key")

    command = run_items.get("command", "run")
    if command not in COMMANDS:
        raise ParseError("[run] command", f"expected one of {COMMANDS}, got {command!r}")

    spec = RunSpec(
        command=command,
        master_seed=(
            _parse_int("run", "seed", run_items["seed"], low=0)
            if "seed" in run_items else None
        ),
        reps=(
            _parse_int("run", "reps", run_items["reps"], low=1)
            if "reps" in run_items else None
        ),
        output_dir=run_items.get("out", "results"),
        workers=(
            _parse_int("run", "workers", run_items["workers"], low=1)
            if "workers" in run_items else 1
        ),
        log_events=(
            _parse_bool("run", "log_events", run_items["log_events"])
            if "log_events" in run_items else False
        ),
        case=run_items.get("case"),
        fig2_kind=run_items.get("fig2_kind", "all"),
        fit_input=run_items.get("input"),
        fit_authors=(
            _parse_int("run", "fit_authors", run_items["fit_authors"], low=2, high=8)
            if "fit_authors" in run_items else 5
        ),
        overrides=ProjectOverrides(
            n_authors=(
                _parse_int("project", "n_authors", project_items["n_authors"], low=1)
                if "n_authors" in project_items else None
            ),
            horizon_weeks=(
                _parse_int("project", "horizon_weeks", project_items["horizon_weeks"], low=1)
                if "horizon_weeks" in project_items else None
            ),
            start_progress=(
                _parse_float("project", "start_progress", project_items["start_progress"],
                             low=0.0, high=1.0)
                if "start_progress" in project_items else None
            ),
            utility_width=(
                _parse_float("project", "utility_width", project_items["utility_width"], low=1.0)
                if "utility_width" in project_items else None
            ),
            contribution_width=(
                _parse_float("project", "contribution_width",
                             project_items["contribution_width"], low=1.0)
                if "contribution_width" in project_items else None
            ),
            discount_rate=(
                _parse_float("project", "discount_rate", project_items["discount_rate"],
                             low=0.0, high=1.0)
                if "discount_rate" in project_items else None
            ),
            withdrawal_penalty=(
                _parse_float("project", "withdrawal_penalty",
                             project_items["withdrawal_penalty"], low=0.0, high=1.0)
                if "withdrawal_penalty" in project_items else None
            ),
            contribution_noise=(
                _parse_float("project", "contribution_noise",
                             project_items["contribution_noise"], low=0.0)
                if "contribution_noise" in project_items else None
            ),
        ),
    )
    validate_spec(spec)
    return spec


def validate_spec(spec: RunSpec) -> None:
    if spec.command not in COMMANDS:
        raise ParseError("command", f"expected one of {COMMANDS}, got {spec.command!r}")
    if spec.command == "case":
        if spec.case is None:
            raise ParseError("case", "command 'case' needs a case id")
        if spec.case not in CASE_IDS:
            raise ParseError("case", f"unknown case {spec.case!r}; expected one of {CASE_IDS}")
    if spec.command == "fit" and spec.fit_input is None:
        raise ParseError("input", "command 'fit' needs an input CSV path")
    if spec.fig2_kind not in _FIG2_KINDS:
        raise ParseError("fig2_kind", f"expected one of {_FIG2_KINDS}, got {spec.fig2_kind!r}")
    n = spec.overrides.n_authors
    if n is not None and spec.command in ("fig1", "fig2", "fig3"):
        lo, hi = AUTHOR_COUNT_RANGE
        if not (lo <= n <= hi):
            raise ParseError(
                "[project] n_authors",
                f"command {spec.command!r} requires {lo} <= n_authors <= {hi}, got {n}",
            )


def render_config(spec: RunSpec) -> str:
    """Canonical config text; parse_config(render_config(s)) == s for valid s."""
    lines = ["[run]", f"command = {spec.command}"]
    if spec.master_seed is not None:
        lines.append(f"seed = {spec.master_seed}")
    if spec.reps is not None:
        lines.append(f"reps = {spec.reps}")
    lines.append(f"out = {spec.output_dir}")
    lines.append(f"workers = {spec.workers}")
    lines.append(f"log_events = {'true' if spec.log_events else 'false'}")
    if spec.case is not None:
        lines.append(f"case = {spec.case}")
    lines.append(f"fig2_kind = {spec.fig2_kind}")
    if spec.fit_input is not None:
        lines.append(f"input = {spec.fit_input}")
    lines.append(f"fit_authors = {spec.fit_authors}")
    project_lines = []
    for key in sorted(_PROJECT_KEYS):
        value = getattr(spec.overrides, key)
        if value is not None:
            project_lines.append(f"{key} = {value!r}" if isinstance(value, str) else f"{key} = {value}")
    if project_lines:
        lines.append("")
        lines.append("[project]")
        lines.extend(project_lines)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Output emission


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_results(table: ResultTable, out_dir: str | Path) -> Path:
    """Write <name>.csv plus a <name>.provenance.json sidecar; byte-stable."""
    directory = Path(out_dir)
    try:
        directory.mkdir(parents=True, exist_ok=True)
        csv_path = directory / f"{table.name}.csv"
        buffer = io.StringIO()
        buffer.write(",".join(table.columns) + "\n")
        for row in table.rows:
            buffer.write(",".join(_format_cell(v) for v in row) + "\n")
        csv_path.write_bytes(buffer.getvalue().encode("utf-8"))
        sidecar = directory / f"{table.name}.provenance.json"
        sidecar.write_bytes(
            (json.dumps(table.provenance, sort_keys=True, indent=2) + "\n").encode("utf-8")
        )
    except OSError as exc:
        raise OSError(f"cannot write results under {directory}: {exc}") from exc
    return csv_path


def _provenance(spec: RunSpec, schema: str, reps: int) -> dict:
    overrides = {
        key: getattr(spec.overrides, key)
        for key in sorted(_PROJECT_KEYS)
        if getattr(spec.overrides, key) is not None
    }
    return {
        "tool": f"bylinesim {__version__}",
        "schema": schema,
        "command": spec.command,
        "seed": spec.master_seed,
        "reps": reps,
        "case": spec.case,
        "fig2_kind": spec.fig2_kind,
        "log_events": spec.log_events,
        "overrides": overrides,
        "columns": list(SCHEMAS[schema]),
    }


def spec_from_provenance(provenance: dict) -> RunSpec:
    """Rebuild the RunSpec that produced a results file from its sidecar."""
    overrides = ProjectOverrides(**provenance.get("overrides", {}))
    return RunSpec(
        command=provenance["command"],
        master_seed=provenance["seed"],
        reps=provenance["reps"],
        workers=1,
        log_events=provenance.get("log_events", False),
        case=provenance.get("case"),
        fig2_kind=provenance.get("fig2_kind", "all"),
        overrides=overrides,
    )


# ---------------------------------------------------------------------------
# Command execution


def _events_table(spec: RunSpec, records, reps: int) -> ResultTable:
    rows = []
    for rep_index, record in enumerate(records):
        for event in record.events:
            rows.append(
                (
                    rep_index,
                    event.round,
                    event.issuer,
                    event.from_position,
                    event.to_position,
                    event.outcome.value,
                )
            )
    return ResultTable(
        schema="events",
        name="events",
        columns=SCHEMAS["events"],
        rows=tuple(rows),
        provenance=_provenance(spec, "events", reps),
    )


def _grid_tables(spec: RunSpec, grid: ExperimentGrid, reps: int) -> ResultTable:
    rows = []
    for cell_index, cell in enumerate(grid.cells):
        stats, _ = run_replications(
            cell.sampler, spec.master_seed, reps, workers=spec.workers, path=(cell_index,)
        )
        labels = cell.labels()
        if grid.schema == "fig1":
            rows.append(
                (labels["authors"], labels["u_width"], labels["c_width"], stats.iau_rate, reps)
            )
        elif grid.schema == "fig2a":
            rows.append(
                (labels["authors"], labels["duration_weeks"], stats.iau_rate, stats.rate_std, reps)
            )
        elif grid.schema == "fig2b":
            rows.append(
                (labels["authors"], labels["progress"], stats.iau_rate, stats.rate_std, reps)
            )
        elif grid.schema == "fig2c":
            n = int(labels["authors"])
            for position in range(1, n + 1):
                rows.append((n, position, stats.per_position_rates[position - 1], reps))
        else:
            raise ValueError(f"unhandled grid schema {grid.schema!r}")
    return ResultTable(
        schema=grid.schema,
        name=grid.schema,
        columns=SCHEMAS[grid.schema],
        rows=tuple(rows),
        provenance=_provenance(spec, grid.schema, reps),
    )


def _cmd_run(spec: RunSpec, reps: int) -> list[ResultTable]:
    sampler = spec.overrides.to_sampler()
    stats, records = run_replications(
        sampler, spec.master_seed, reps, workers=spec.workers, keep_events=spec.log_events
    )
    table = ResultTable(
        schema="run",
        name="run",
        columns=SCHEMAS["run"],
        rows=((reps, stats.iau_rate, stats.rate_std),),
        provenance=_provenance(spec, "run", reps),
    )
    tables = [table]
    if spec.log_events:
        tables.append(_events_table(spec, records, reps))
    return tables


def _cmd_case(spec: RunSpec, reps: int) -> list[ResultTable]:
    sampler = CaseSampler(spec.case)
    if spec.overrides.discount_rate is not None:
        sampler = replace(sampler, discount_rate=spec.overrides.discount_rate)
    if spec.overrides.withdrawal_penalty is not None:
        sampler = replace(sampler, withdrawal_penalty=spec.overrides.withdrawal_penalty)
    if spec.overrides.contribution_noise is not None:
        sampler = replace(sampler, contribution_noise=spec.overrides.contribution_noise)
    stats, records = run_replications(
        sampler, spec.master_seed, reps, workers=spec.workers, keep_events=spec.log_events
    )
    table = ResultTable(
        schema="fig3",
        name=f"case_{spec.case}",
        columns=SCHEMAS["fig3"],
        rows=((spec.case, stats.iau_rate, stats.rate_std, reps),),
        provenance=_provenance(spec, "fig3", reps),
    )
    tables = [table]
    if spec.log_events:
        tables.append(_events_table(spec, records, reps))
    return tables


def _cmd_fig1(spec: RunSpec, reps: int) -> list[ResultTable]:
    counts = (
        (spec.overrides.n_authors,) if spec.overrides.n_authors is not None else None
    )
    grid = fig1_grid(author_counts=counts or (2, 5, 8), reps=reps)
    return [_grid_tables(spec, grid, reps)]


def _cmd_fig2(spec: RunSpec, reps: int) -> list[ResultTable]:
    kinds = {
        "duration": (SweepKind.DURATION,),
        "progress": (SweepKind.PROGRESS,),
        "position": (SweepKind.POSITION_MATRIX,),
        "all": (SweepKind.DURATION, SweepKind.PROGRESS, SweepKind.POSITION_MATRIX),
    }[spec.fig2_kind]
    return [_grid_tables(spec, fig2_sweep(kind, reps=reps), reps) for kind in kinds]


def _cmd_fig3(spec: RunSpec, reps: int) -> list[ResultTable]:
    rows = []
    for cell_index, case_id in enumerate(CASE_IDS):
        stats, _ = run_replications(
            CaseSampler(case_id), spec.master_seed, reps,
            workers=spec.workers, path=(cell_index,),
        )
        rows.append((case_id, stats.iau_rate, stats.rate_std, reps))
    return [
        ResultTable(
            schema="fig3",
            name="fig3",
            columns=SCHEMAS["fig3"],
            rows=tuple(rows),
            provenance=_provenance(spec, "fig3", reps),
        )
    ]


def _cmd_fit(spec: RunSpec, out: Path) -> dict:
    path = Path(spec.fit_input)
    if not path.exists():
        raise OSError(f"fit input not found: {path}")
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None or tuple(reader.fieldnames) != SCHEMAS["fig1"]:
            raise ValueError(
                f"fit expects the fig1 schema {SCHEMAS['fig1']}, got {reader.fieldnames}"
            )
        rows = [
            (int(r["authors"]), float(r["u_width"]), float(r["c_width"]), float(r["iau_rate"]))
            for r in reader
        ]
    planar_points = [
        (u, c, rate) for authors, u, c, rate in rows if authors == spec.fit_authors
    ]
    if not planar_points:
        raise ValueError(f"no rows with authors == {spec.fit_authors} in {path}")
    planar = ols_fit_planar(planar_points)
    result = {
        "planar": {
            "authors": spec.fit_authors,
            **planar.coefficients,
            "r_squared": planar.r_squared,
            "n_points": planar.n_points,
        }
    }
    by_count: dict[int, list[float]] = {}
    for authors, _, _, rate in rows:
        by_count.setdefault(authors, []).append(rate)
    if len(by_count) >= 3:
        log_points = [
            (float(authors), sum(rates) / len(rates))
            for authors, rates in sorted(by_count.items())
        ]
        logistic = log_fit(log_points)
        result["log"] = {
            **logistic.coefficients,
            "r_squared": logistic.r_squared,
            "n_points": logistic.n_points,
        }
    out.mkdir(parents=True, exist_ok=True)
    (out / "fit.json").write_bytes(
        (json.dumps(result, sort_keys=True, indent=2) + "\n").encode("utf-8")
    )
    return result


def orchestrate(spec: RunSpec) -> int:
    """Dispatch a validated RunSpec; returns a process exit status."""
    validate_spec(spec)
    if spec.master_seed is None:
        # Record an entropy-derived seed rather than running unseeded.
        spec = replace(spec, master_seed=secrets.randbits(63))
        print(f"seed: {spec.master_seed} (entropy-derived; recorded in provenance)")
    out = Path(spec.output_dir)
    if spec.command == "fit":
        result = _cmd_fit(spec, out)
        planar = result["planar"]
        print(
            f"planar fit (authors={planar['authors']}): "
            f"P = {planar['intercept']:.4f} + {planar['u_slope']:.4f}*U "
            f"+ {planar['c_slope']:.4f}*C  (R^2 = {planar['r_squared']:.4f})"
        )
        if "log" in result:
            log_part = result["log"]
            print(
                f"log fit: P = {log_part['log_slope']:.4f}*ln(A) "
                f"+ {log_part['intercept']:.4f}  (R^2 = {log_part['r_squared']:.4f})"
            )
        return 0

    reps = spec.reps if spec.reps is not None else DEFAULT_REPS[spec.command]
    runner = {
        "run": _cmd_run,
        "case": _cmd_case,
        "fig1": _cmd_fig1,
        "fig2": _cmd_fig2,
        "fig3": _cmd_fig3,
    }[spec.command]
    for table in runner(spec, reps):
        path = write_results(table, out)
        print(f"wrote {path} ({len(table.rows)} rows)")
    return 0


# ---------------------------------------------------------------------------
# Argument parsing


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bylinesim",
        description="Monte Carlo simulator of byline-position ultimatum dynamics.",
    )
    parser.add_argument("--config", help="config file (key = value sections)")
    sub = parser.add_subparsers(dest="command")

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--seed", type=int, help="master seed (64-bit unsigned)")
        p.add_argument("--reps", type=int, help="replications per cell")
        p.add_argument("--out", help="output directory")
        p.add_argument("--workers", type=int, help="parallel worker processes")
        p.add_argument("--log-events", action="store_true", default=None,
                       help="also emit events.csv (run/case)")

    for name in ("run", "fig1", "fig3"):
        add_common(sub.add_parser(name))
    fig2 = sub.add_parser("fig2")
    add_common(fig2)
    case = sub.add_parser("case")
    case.add_argument("case_id", choices=CASE_IDS)
    add_common(case)
    fit = sub.add_parser("fit")
    fit.add_argument("--input", required=True, help="fig1-schema CSV to fit")
    fit.add_argument("--authors", type=int, default=None, help="author count for the planar fit")
    fit.add_argument("--out", help="output directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.config:
            config_path = Path(args.config)
            if not config_path.exists():
                raise OSError(f"config file not found: {config_path}")
            spec = parse_config(config_path.read_text(encoding="utf-8"))
        else:
            spec = RunSpec()
        if args.command:
            spec = replace(spec, command=args.command)
        if getattr(args, "seed", None) is not None:
            spec = replace(spec, master_seed=args.seed)
        if getattr(args, "reps", None) is not None:
            if args.reps < 1:
                raise ParseError("--reps", f"must be >= 1, got {args.reps}")
            spec = replace(spec, reps=args.reps)
        if getattr(args, "out", None) is not None:
            spec = replace(spec, output_dir=args.out)
        if getattr(args, "workers", None) is not None:
            if args.workers < 1:
                raise ParseError("--workers", f"must be >= 1, got {args.workers}")
            spec = replace(spec, workers=args.workers)
        if getattr(args, "log_events", None):
            spec = replace(spec, log_events=True)
        if getattr(args, "case_id", None) is not None:
            spec = replace(spec, case=args.case_id)
        if getattr(args, "input", None) is not None:
            spec = replace(spec, fit_input=args.input)
        if getattr(args, "authors", None) is not None:
            spec = replace(spec, fit_authors=args.authors)
        return orchestrate(spec)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
