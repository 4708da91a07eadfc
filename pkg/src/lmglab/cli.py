"""Command-line driver: parameter sweeps, numeric-vs-analytic comparison,
figure data files, and peak scans.

Subcommands
-----------
sweep-h    chi_g, chi_r, eta and entropy over an h grid, per system size.
sweep-tau  the same quantities over a subsystem-fraction grid at fixed h.
compare    per-point relative deviation of numeric results from the
           closed forms, plus critical-exponent fits.
peak-scan  location and height of the chi_r peak per system size.

Exit codes: 0 success, 1 usage error, 2 I/O error, 3 numerical failure
at one or more points (suppressed by --skip-errors).

Configuration may come from a flat ``key=value`` file (--config); command
line flags override config-file keys, which override built-in defaults.
Grid points are independent and are dispatched to a process pool sized
by --jobs; output rows are sorted by (N, h, tau, method) after
collection, so the result is deterministic regardless of scheduling.
There is no randomness anywhere in the pipeline (--seedless is accepted
and recorded for provenance, but runs are always seedless).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import (
    CriticalPointError,
    DERIVATIVE_STEP,
    IsotropicPointError,
    chi_g_analytic,
    chi_r_analytic,
    entropy_analytic,
    loglog_slope,
)
from .fidelity import FidelityError, sweep_point
from .model import EigensolverError, ModelParams
from .reduced import Bipartition, ReducedDensityError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_NUMERICAL = 3

COLUMNS = ("h", "N", "tau", "chi_g", "chi_r", "eta", "entropy", "method", "delta", "status")
NUMERIC_METHODS = ("finite-difference", "spectral")
ALL_METHODS = NUMERIC_METHODS + ("analytic",)
ALL_FORMATS = ("csv", "json", "plotscript")

# Window |h - 1| used for the critical-exponent fits in compare reports.
EXPONENT_WINDOW = (1e-5, 1e-4)
EXPONENT_POINTS = 10
# Large N so the intensive part of the broken-phase chi_r is negligible
# when fitting the extensive divergence law of chi_r / N.
EXPONENT_FIT_N = 10**12


class UsageError(ValueError):
    """Bad flags, bad config values, or an unusable grid."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with status 2 on bad flags; the contract here is 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


@dataclass
class SweepConfig:
    command: str
    gamma: float = 0.5
    tau: float = 0.5
    m_sub: int | None = None
    n_list: list[int] = field(default_factory=lambda: [64, 128, 256, 512])
    h_values: list[float] = field(default_factory=list)
    tau_values: list[float] = field(default_factory=list)
    delta: float | None = None  # None means the automatic step
    methods: list[str] = field(default_factory=lambda: ["finite-difference"])
    out: str = "out"
    formats: list[str] = field(default_factory=lambda: ["csv", "json"])
    jobs: int = 1  # resolved to machine parallelism by config_from_args
    skip_errors: bool = False
    seedless: bool = False
    check: bool = False

    def echo(self) -> dict:
        delta = "auto" if self.delta is None else self.delta
        echo = {
            "command": self.command,
            "gamma": self.gamma,
            "tau": self.tau,
            "m": self.m_sub,
            "n": ",".join(str(n) for n in self.n_list),
            "h_values": ",".join(repr(h) for h in self.h_values),
            "delta": delta,
            "methods": ",".join(self.methods),
            "formats": ",".join(self.formats),
            "skip_errors": self.skip_errors,
            "seedless": self.seedless,
        }
        # jobs is an execution detail, not a scientific input: leaving it
        # out keeps outputs byte-identical across worker counts.
        if self.command == "sweep-tau":
            echo["tau_values"] = ",".join(repr(t) for t in self.tau_values)
        if self.command == "peak-scan":
            echo["check"] = self.check
        return echo


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_bool(text: str) -> bool:
    low = text.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"cannot parse boolean value {text!r}")


def _parse_delta(text: str) -> float | None:
    if text.strip().lower() == "auto":
        return None
    value = float(text)
    if value <= 0.0:
        raise UsageError(f"delta must be positive or 'auto', got {text!r}")
    return value


# Converters for config-file strings, keyed by destination name.
_CONFIG_PARSERS = {
    "gamma": float,
    "tau": float,
    "m": int,
    "n": _parse_int_list,
    "h_start": float,
    "h_stop": float,
    "h_count": int,
    "h_list": _parse_float_list,
    "tau_start": float,
    "tau_stop": float,
    "tau_count": int,
    "tau_list": _parse_float_list,
    "delta": _parse_delta,
    "methods": lambda s: [tok.strip() for tok in s.split(",") if tok.strip()],
    "out": str,
    "formats": lambda s: [tok.strip() for tok in s.split(",") if tok.strip()],
    "jobs": int,
    "skip_errors": _parse_bool,
    "seedless": _parse_bool,
    "check": _parse_bool,
}


def read_config_file(path: str) -> dict:
    """Flat key=value file; '#' starts a comment, blank lines ignored."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if key not in _CONFIG_PARSERS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value.strip())
        except (ValueError, UsageError) as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def build_parser() -> _Parser:
    parser = _Parser(
        prog="lmglab",
        description=__doc__,
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument("--version", action="version", version=f"lmglab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_shared(p: _Parser) -> None:
        p.add_argument("--gamma", type=float, default=None, help="anisotropy in [0, 1]")
        p.add_argument("--tau", type=float, default=None, help="subsystem fraction M/N")
        p.add_argument("--m", type=int, default=None, dest="m",
                       help="explicit subsystem size M (overrides --tau)")
        p.add_argument("--n", action="append", default=None, metavar="N[,N...]",
                       help="system size; repeatable or comma separated")
        p.add_argument("--h-start", type=float, default=None)
        p.add_argument("--h-stop", type=float, default=None)
        p.add_argument("--h-count", type=int, default=None)
        p.add_argument("--h-list", type=str, default=None, metavar="H[,H...]",
                       help="explicit h values (overrides --h-start/stop/count)")
        p.add_argument("--delta", type=str, default=None,
                       help="finite-difference step, or 'auto' for 1e-3*max(1,|h|)")
        p.add_argument("--methods", type=str, default=None,
                       help=f"comma list from {{{','.join(ALL_METHODS)}}}")
        p.add_argument("--out", type=str, default=None, help="output directory")
        p.add_argument("--formats", type=str, default=None,
                       help=f"comma list from {{{','.join(ALL_FORMATS)}}}")
        p.add_argument("--jobs", type=int, default=None,
                       help="worker processes for the grid (default: machine parallelism)")
        p.add_argument("--skip-errors", action="store_const", const=True, default=None,
                       help="record failed points and exit 0 instead of 3")
        p.add_argument("--config", type=str, default=None,
                       help="flat key=value config file; flags override it")
        p.add_argument("--seedless", action="store_const", const=True, default=None,
                       help="assert the deterministic, RNG-free run mode (always on)")

    p_h = sub.add_parser("sweep-h", help="sweep the field h at fixed tau")
    add_shared(p_h)

    p_tau = sub.add_parser("sweep-tau", help="sweep tau at fixed h values")
    add_shared(p_tau)
    p_tau.add_argument("--tau-start", type=float, default=None)
    p_tau.add_argument("--tau-stop", type=float, default=None)
    p_tau.add_argument("--tau-count", type=int, default=None)
    p_tau.add_argument("--tau-list", type=str, default=None, metavar="T[,T...]")

    p_cmp = sub.add_parser("compare", help="numeric vs closed-form deviation report")
    add_shared(p_cmp)

    p_peak = sub.add_parser("peak-scan", help="chi_r peak location per system size")
    add_shared(p_peak)
    p_peak.add_argument("--check", action="store_const", const=True, default=None,
                        help="assert peak migration toward h=1 and growing height")
    return parser


def _pick(cli_value, config: dict, key: str, default):
    if cli_value is not None:
        return cli_value
    if key in config:
        return config[key]
    return default


def _monotone(values: list[float], what: str) -> list[float]:
    if not values:
        raise UsageError(f"empty {what} grid")
    diffs = np.diff(values)
    if len(values) > 1 and not (np.all(diffs > 0) or np.all(diffs < 0)):
        raise UsageError(f"{what} grid must be strictly monotone")
    return values


def _grid_from_args(start, stop, count, explicit, what: str) -> list[float]:
    if explicit is not None:
        return _monotone(list(explicit), what)
    if start is None or stop is None or count is None:
        raise UsageError(
            f"no {what} grid: give --{what}-list or --{what}-start/--{what}-stop/--{what}-count"
        )
    if count < 1:
        raise UsageError(f"--{what}-count must be >= 1, got {count}")
    return _monotone([float(x) for x in np.linspace(start, stop, count)], what)


def config_from_args(args: argparse.Namespace) -> SweepConfig:
    file_values = read_config_file(args.config) if args.config else {}

    n_raw = args.n
    if n_raw is not None:
        n_list = []
        for item in n_raw:
            n_list.extend(_parse_int_list(item))
    else:
        n_list = _pick(None, file_values, "n", [64, 128, 256, 512])
    if not n_list:
        raise UsageError("empty system-size list")
    if any(n < 2 for n in n_list):
        raise UsageError(f"system sizes must be >= 2, got {n_list}")

    h_list = _parse_float_list(args.h_list) if args.h_list is not None else None
    h_values = _grid_from_args(
        _pick(args.h_start, file_values, "h_start", None),
        _pick(args.h_stop, file_values, "h_stop", None),
        _pick(args.h_count, file_values, "h_count", None),
        h_list if h_list is not None else file_values.get("h_list"),
        "h",
    )

    delta = _parse_delta(args.delta) if args.delta is not None else file_values.get("delta")

    methods_cli = (
        [tok.strip() for tok in args.methods.split(",") if tok.strip()]
        if args.methods is not None
        else None
    )
    default_methods = (
        ["finite-difference", "analytic"] if args.command == "compare"
        else ["finite-difference"]
    )
    methods = _pick(methods_cli, file_values, "methods", default_methods)
    for method in methods:
        if method not in ALL_METHODS:
            raise UsageError(f"unknown method {method!r}")
    if not methods:
        raise UsageError("empty method list")

    formats_cli = (
        [tok.strip() for tok in args.formats.split(",") if tok.strip()]
        if args.formats is not None
        else None
    )
    formats = _pick(formats_cli, file_values, "formats", ["csv", "json"])
    for fmt in formats:
        if fmt not in ALL_FORMATS:
            raise UsageError(f"unknown format {fmt!r}")

    config = SweepConfig(
        command=args.command,
        gamma=_pick(args.gamma, file_values, "gamma", 0.5),
        tau=_pick(args.tau, file_values, "tau", 0.5),
        m_sub=_pick(args.m, file_values, "m", None),
        n_list=list(n_list),
        h_values=h_values,
        delta=delta,
        methods=list(methods),
        out=_pick(args.out, file_values, "out", "out"),
        formats=list(formats),
        jobs=_pick(args.jobs, file_values, "jobs", os.cpu_count() or 1),
        skip_errors=bool(_pick(args.skip_errors, file_values, "skip_errors", False)),
        seedless=bool(_pick(args.seedless, file_values, "seedless", False)),
    )
    if config.jobs < 1:
        raise UsageError(f"--jobs must be >= 1, got {config.jobs}")

    if args.command == "sweep-tau":
        tau_list = (
            _parse_float_list(args.tau_list) if args.tau_list is not None
            else file_values.get("tau_list")
        )
        config.tau_values = _grid_from_args(
            _pick(args.tau_start, file_values, "tau_start", None),
            _pick(args.tau_stop, file_values, "tau_stop", None),
            _pick(args.tau_count, file_values, "tau_count", None),
            tau_list,
            "tau",
        )
        if any(not 0.0 < t <= 1.0 for t in config.tau_values):
            raise UsageError("tau grid values must lie in (0, 1]")
    if args.command == "peak-scan":
        config.check = bool(_pick(args.check, file_values, "check", False))
        if "analytic" in config.methods:
            raise UsageError("peak-scan works on numeric methods only")
    if args.command == "compare":
        if "analytic" not in config.methods or not any(
            m in NUMERIC_METHODS for m in config.methods
        ):
            raise UsageError("compare needs 'analytic' plus at least one numeric method")
    return config


def _resolve_m_sub(n: int, tau: float, m_sub: int | None) -> tuple[int, str | None]:
    """Subsystem size for one n, with a warning when tau*n must be rounded."""
    if m_sub is not None:
        if not 1 <= m_sub <= n:
            raise UsageError(f"--m {m_sub} outside [1, {n}]")
        return m_sub, None
    exact = tau * n
    m = int(round(exact))
    m = min(max(m, 1), n)
    warning = None
    if abs(exact - m) > 1e-9:
        warning = (
            f"tau*N = {exact:.6g} is not integral for N={n}; "
            f"rounded to M={m} (realized tau={m / n:.12g})"
        )
    return m, warning


# ---------------------------------------------------------------------------
# Per-point evaluation (runs inside worker processes; must stay top level)
# ---------------------------------------------------------------------------

def _evaluate_task(task: tuple) -> list[dict]:
    n, gamma, h, m_sub, delta, methods = task
    tau_real = m_sub / n
    rows = []
    for method in methods:
        base = {
            "h": h,
            "N": n,
            "tau": tau_real,
            "chi_g": math.nan,
            "chi_r": math.nan,
            "eta": math.nan,
            "entropy": math.nan,
            "method": method,
            "delta": math.nan,
            "status": "ok",
        }
        try:
            if method == "analytic":
                base["chi_g"] = chi_g_analytic(h, gamma, n)
                base["chi_r"] = chi_r_analytic(h, gamma, tau_real, n)
                base["eta"] = base["chi_r"] / base["chi_g"]
                base["entropy"] = entropy_analytic(h, gamma, tau_real)
                base["delta"] = DERIVATIVE_STEP
            else:
                point = sweep_point(
                    ModelParams(n, gamma, h),
                    Bipartition(n, m_sub),
                    delta=delta,
                    method=method,
                )
                base.update(
                    chi_g=point.chi_g,
                    chi_r=point.chi_r,
                    eta=point.eta,
                    entropy=point.entropy,
                    delta=point.delta,
                )
        except CriticalPointError as exc:
            base["status"] = f"singular: {exc}"
        except (
            EigensolverError,
            ReducedDensityError,
            FidelityError,
            IsotropicPointError,
            ValueError,
        ) as exc:
            base["status"] = f"failed: {exc}"
        rows.append(base)
    return rows


def _run_tasks(tasks: list[tuple], jobs: int) -> list[dict]:
    if jobs <= 1 or len(tasks) <= 1:
        nested = [_evaluate_task(t) for t in tasks]
    else:
        chunk = max(1, len(tasks) // (4 * jobs))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            nested = list(pool.map(_evaluate_task, tasks, chunksize=chunk))
    rows = [row for group in nested for row in group]
    rows.sort(key=lambda r: (r["N"], r["h"], r["tau"], r["method"]))
    return rows


# ---------------------------------------------------------------------------
# Output writers
# ---------------------------------------------------------------------------

def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return f"{float(value):.12e}"


def _timestamp() -> str:
    return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime())


def _csv_quote(text: str) -> str:
    if any(ch in text for ch in ",\"\n"):
        return '"' + text.replace('"', '""') + '"'
    return text


def write_csv(path: Path, rows: list[dict], config: SweepConfig,
              warnings_list: list[str], columns=COLUMNS) -> None:
    lines = [
        f"# lmglab {__version__} {config.command}",
        f"# timestamp: {_timestamp()}",
        "# config: " + " ".join(f"{k}={v}" for k, v in sorted(config.echo().items())),
    ]
    lines.extend(f"# warning: {w}" for w in warnings_list)
    lines.append(",".join(columns))
    for row in rows:
        lines.append(",".join(_csv_quote(_fmt(row[c])) for c in columns))
    path.write_text("\n".join(lines) + "\n")


def _json_clean(value):
    # Strict JSON has no NaN/Infinity; failed fields become null.
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _json_clean(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_clean(v) for v in value]
    return value


def write_json(path: Path, rows: list[dict], config: SweepConfig,
               warnings_list: list[str], extra: dict | None = None) -> None:
    doc = {
        "tool": "lmglab",
        "version": __version__,
        "command": config.command,
        "timestamp": _timestamp(),
        "config": config.echo(),
        "warnings": warnings_list,
        "rows": rows,
    }
    if extra:
        doc.update(extra)
    path.write_text(
        json.dumps(_json_clean(doc), indent=2, sort_keys=True, allow_nan=False) + "\n"
    )


def _series_keys(rows: list[dict]) -> list[tuple[int, str]]:
    return sorted({(row["N"], row["method"]) for row in rows})


def write_plotscript(path: Path, csv_name: str, rows: list[dict],
                     x_column: int, y_column: int,
                     x_label: str, y_label: str, logscale: bool) -> None:
    header = [
        f"# lmglab {__version__} gnuplot commands: {y_label} vs {x_label}",
        "set datafile separator ','",
        "set key top left",
        f"set xlabel '{x_label}'",
        f"set ylabel '{y_label}'",
    ]
    if logscale:
        header.append("set logscale y")
    plots = []
    for n, method in _series_keys(rows):
        selector = (
            f"(column(2)=={n} && strcol(8) eq '{method}' ? column({x_column}) : NaN)"
        )
        plots.append(
            f"  '{csv_name}' using {selector}:(column({y_column})) "
            f"with linespoints title 'N={n} {method}'"
        )
    header.append("plot \\")
    header.append(", \\\n".join(plots))
    path.write_text("\n".join(header) + "\n")


def _prepare_outdir(config: SweepConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    probe = out / ".write_probe"
    probe.write_text("")
    probe.unlink()
    return out


def _col(name: str) -> int:
    return COLUMNS.index(name) + 1


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _sweep_tasks(config: SweepConfig) -> tuple[list[tuple], list[str]]:
    tasks = []
    warnings_list = []
    for n in config.n_list:
        m_sub, warning = _resolve_m_sub(n, config.tau, config.m_sub)
        if warning:
            warnings_list.append(warning)
        for h in config.h_values:
            tasks.append((n, config.gamma, h, m_sub, config.delta, tuple(config.methods)))
    return tasks, warnings_list


def _finish_rows(config: SweepConfig, rows: list[dict], warnings_list: list[str],
                 stem: str, plots: list[tuple]) -> int:
    out = _prepare_outdir(config)
    files = []
    if "csv" in config.formats:
        csv_path = out / f"{stem}.csv"
        write_csv(csv_path, rows, config, warnings_list)
        files.append(csv_path)
    if "json" in config.formats:
        json_path = out / f"{stem}.json"
        write_json(json_path, rows, config, warnings_list)
        files.append(json_path)
    if "plotscript" in config.formats:
        for suffix, x_col, y_col, x_label, y_label, logscale in plots:
            gp_path = out / f"{stem}_{suffix}.gp"
            write_plotscript(gp_path, f"{stem}.csv", rows, x_col, y_col,
                             x_label, y_label, logscale)
            files.append(gp_path)
    for w in warnings_list:
        print(f"warning: {w}", file=sys.stderr)
    for f in files:
        print(f"wrote {f}")
    bad = [row for row in rows if row["status"] != "ok"]
    if bad:
        for row in bad:
            print(
                f"point N={row['N']} h={row['h']} tau={row['tau']:.6g} "
                f"[{row['method']}]: {row['status']}",
                file=sys.stderr,
            )
        if not config.skip_errors:
            return EXIT_NUMERICAL
    return EXIT_OK


def cmd_sweep_h(config: SweepConfig) -> int:
    tasks, warnings_list = _sweep_tasks(config)
    rows = _run_tasks(tasks, config.jobs)
    plots = [
        ("chi_r", _col("h"), _col("chi_r"), "h", "chi_r", True),
        ("eta", _col("h"), _col("eta"), "h", "eta", False),
        ("entropy", _col("h"), _col("entropy"), "h", "entropy", False),
    ]
    return _finish_rows(config, rows, warnings_list, "sweep_h", plots)


def cmd_sweep_tau(config: SweepConfig) -> int:
    tasks = []
    warnings_list = []
    for n in config.n_list:
        for tau in config.tau_values:
            m_sub, warning = _resolve_m_sub(n, tau, None)
            if warning:
                warnings_list.append(warning)
            for h in config.h_values:
                tasks.append((n, config.gamma, h, m_sub, config.delta, tuple(config.methods)))
    rows = _run_tasks(tasks, config.jobs)
    plots = [
        ("eta", _col("tau"), _col("eta"), "tau", "eta", False),
        ("entropy", _col("tau"), _col("entropy"), "tau", "entropy", False),
    ]
    return _finish_rows(config, rows, warnings_list, "sweep_tau", plots)


def _relative_deviation(numeric: float, reference: float) -> float:
    scale = abs(reference)
    if scale == 0.0:
        return math.inf if numeric != reference else 0.0
    return abs(numeric - reference) / scale


def _exponent_fits(gamma: float, tau: float) -> dict:
    lo, hi = EXPONENT_WINDOW
    u = np.logspace(math.log10(lo), math.log10(hi), EXPONENT_POINTS)
    broken = np.array(
        [chi_r_analytic(1.0 - x, gamma, tau, EXPONENT_FIT_N) for x in u]
    ) / EXPONENT_FIT_N
    symmetric = np.array([chi_r_analytic(1.0 + x, gamma, tau, EXPONENT_FIT_N) for x in u])
    entropy = np.array([entropy_analytic(1.0 + x, gamma, tau) for x in u])
    return {
        "window_abs_h_minus_1": [lo, hi],
        "broken_chi_r_over_n_vs_1_minus_h": loglog_slope(u, broken),
        "symmetric_chi_r_vs_h_minus_1": loglog_slope(u, symmetric),
        "entropy_vs_log_abs_h_minus_1": float(np.polyfit(np.log(u), entropy, 1)[0]),
    }


def cmd_compare(config: SweepConfig) -> int:
    tasks, warnings_list = _sweep_tasks(config)
    rows = _run_tasks(tasks, config.jobs)

    by_key: dict[tuple, dict] = {}
    for row in rows:
        by_key.setdefault((row["N"], row["h"]), {})[row["method"]] = row

    numeric_methods = [m for m in config.methods if m != "analytic"]
    table = []
    for (n, h), group in sorted(by_key.items()):
        ana = group.get("analytic")
        for method in numeric_methods:
            num = group.get(method)
            if num is None:
                continue
            entry = {
                "N": n,
                "h": h,
                "tau": num["tau"],
                "method": method,
                "status": "ok",
                "chi_g_numeric": num["chi_g"],
                "chi_g_analytic": ana["chi_g"] if ana else math.nan,
                "chi_r_numeric": num["chi_r"],
                "chi_r_analytic": ana["chi_r"] if ana else math.nan,
            }
            if num["status"] != "ok":
                entry["status"] = num["status"]
            elif ana is None or ana["status"] != "ok":
                entry["status"] = ana["status"] if ana else "failed: no analytic row"
            else:
                for name in ("chi_g", "chi_r", "eta", "entropy"):
                    entry[f"{name}_rel_dev"] = _relative_deviation(num[name], ana[name])
            table.append(entry)

    summary = {}
    for n in config.n_list:
        devs = [e["chi_r_rel_dev"] for e in table if e["N"] == n and e["status"] == "ok"]
        if devs:
            summary[str(n)] = {
                "points": len(devs),
                "max_chi_r_rel_dev": max(devs),
                "median_chi_r_rel_dev": statistics.median(devs),
            }
    try:
        fits = _exponent_fits(config.gamma, config.tau)
    except ValueError as exc:  # gamma = 1 or a bad tau make the fits singular
        fits = {"error": str(exc)}

    out = _prepare_outdir(config)
    text_lines = [
        f"lmglab {__version__} compare report",
        "config: " + " ".join(f"{k}={v}" for k, v in sorted(config.echo().items())),
        "",
        f"{'N':>6} {'h':>12} {'method':>18} {'chi_r num':>14} {'chi_r analytic':>14} "
        f"{'rel dev':>10}  status",
    ]
    for entry in table:
        dev = entry.get("chi_r_rel_dev")
        dev_text = "-" if dev is None else f"{dev:.3e}"
        text_lines.append(
            f"{entry['N']:>6} {entry['h']:>12.6g} {entry['method']:>18} "
            f"{entry['chi_r_numeric']:>14.6e} {entry['chi_r_analytic']:>14.6e} "
            f"{dev_text:>10}  {entry['status']}"
        )
    text_lines.append("")
    for n, block in summary.items():
        text_lines.append(
            f"N={n}: {block['points']} points, max chi_r rel dev "
            f"{block['max_chi_r_rel_dev']:.3e}, median {block['median_chi_r_rel_dev']:.3e}"
        )
    text_lines.append("")
    text_lines.append(
        "critical-exponent fits over |h-1| in "
        f"[{EXPONENT_WINDOW[0]:g}, {EXPONENT_WINDOW[1]:g}]:"
    )
    if "error" in fits:
        text_lines.append(f"  not available: {fits['error']}")
    else:
        text_lines.append(
            f"  chi_r/N (broken) slope    {fits['broken_chi_r_over_n_vs_1_minus_h']:+.4f}"
            "  (law: -0.5)"
        )
        text_lines.append(
            f"  chi_r (symmetric) slope   {fits['symmetric_chi_r_vs_h_minus_1']:+.4f}"
            "  (law: -2)"
        )
        text_lines.append(
            f"  entropy vs ln|h-1| slope  {fits['entropy_vs_log_abs_h_minus_1']:+.4f}"
            "  (law: -0.25)"
        )
    (out / "compare.txt").write_text("\n".join(text_lines) + "\n")
    write_json(
        out / "compare.json",
        rows,
        config,
        warnings_list,
        extra={"deviations": table, "summary": summary, "exponent_fits": fits},
    )
    print(f"wrote {out / 'compare.txt'}")
    print(f"wrote {out / 'compare.json'}")

    for w in warnings_list:
        print(f"warning: {w}", file=sys.stderr)
    bad = [e for e in table if e["status"] != "ok"]
    if bad:
        for entry in bad:
            print(
                f"point N={entry['N']} h={entry['h']}: {entry['status']}",
                file=sys.stderr,
            )
        if not config.skip_errors:
            return EXIT_NUMERICAL
    return EXIT_OK


PEAK_COLUMNS = ("N", "tau", "h_peak", "chi_r_peak", "h_grid_max", "chi_r_grid_max",
                "delta", "status")


def _parabolic_vertex(h3: np.ndarray, y3: np.ndarray) -> tuple[float, float]:
    a, b, c = np.polyfit(h3, y3, 2)
    vertex = -b / (2.0 * a)
    return float(vertex), float(np.polyval([a, b, c], vertex))


def cmd_peak_scan(config: SweepConfig) -> int:
    if len(config.h_values) < 3:
        raise UsageError("peak-scan needs at least 3 h grid points")
    method = next(m for m in config.methods if m in NUMERIC_METHODS)
    tasks = []
    warnings_list = []
    for n in config.n_list:
        m_sub, warning = _resolve_m_sub(n, config.tau, config.m_sub)
        if warning:
            warnings_list.append(warning)
        for h in config.h_values:
            tasks.append((n, config.gamma, h, m_sub, config.delta, (method,)))
    rows = _run_tasks(tasks, config.jobs)

    peak_rows = []
    had_failure = False
    hs = np.array(sorted(config.h_values))
    for n in sorted(config.n_list):
        n_rows = sorted((r for r in rows if r["N"] == n), key=lambda r: r["h"])
        chis = np.array([r["chi_r"] for r in n_rows])
        statuses = [r["status"] for r in n_rows]
        entry = {
            "N": n,
            "tau": n_rows[0]["tau"],
            "h_peak": math.nan,
            "chi_r_peak": math.nan,
            "h_grid_max": math.nan,
            "chi_r_grid_max": math.nan,
            "delta": n_rows[0]["delta"],
            "status": "ok",
        }
        if any(s != "ok" for s in statuses):
            entry["status"] = next(s for s in statuses if s != "ok")
            had_failure = True
            peak_rows.append(entry)
            continue
        imax = int(np.argmax(chis))
        if imax == 0 or imax == len(hs) - 1:
            print(
                f"peak for N={n} sits on the grid boundary (h={hs[imax]}); "
                "widen the h grid to bracket it",
                file=sys.stderr,
            )
            raise UsageError(f"peak not bracketed for N={n}")
        entry["h_grid_max"] = float(hs[imax])
        entry["chi_r_grid_max"] = float(chis[imax])
        h_peak, chi_peak = _parabolic_vertex(hs[imax - 1 : imax + 2],
                                             chis[imax - 1 : imax + 2])
        entry["h_peak"] = h_peak
        entry["chi_r_peak"] = chi_peak
        peak_rows.append(entry)

    out = _prepare_outdir(config)
    write_csv(out / "peaks.csv", peak_rows, config, warnings_list, columns=PEAK_COLUMNS)
    write_json(out / "peaks.json", peak_rows, config, warnings_list)
    print(f"wrote {out / 'peaks.csv'}")
    print(f"wrote {out / 'peaks.json'}")
    for w in warnings_list:
        print(f"warning: {w}", file=sys.stderr)

    if had_failure and not config.skip_errors:
        return EXIT_NUMERICAL

    if config.check and len(peak_rows) > 1:
        ok_rows = [r for r in peak_rows if r["status"] == "ok"]
        distances = [abs(r["h_peak"] - 1.0) for r in ok_rows]
        heights = [r["chi_r_peak"] for r in ok_rows]
        if any(b >= a for a, b in zip(distances, distances[1:])):
            print(f"peak-migration check failed: |h*-1| not strictly decreasing: "
                  f"{distances}", file=sys.stderr)
            return EXIT_NUMERICAL
        if any(b <= a for a, b in zip(heights, heights[1:])):
            print(f"peak-height check failed: heights not strictly increasing: "
                  f"{heights}", file=sys.stderr)
            return EXIT_NUMERICAL
        print("peak checks passed: |h*-1| decreasing, heights increasing")
    return EXIT_OK


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "sweep-h": cmd_sweep_h,
    "sweep-tau": cmd_sweep_tau,
    "compare": cmd_compare,
    "peak-scan": cmd_peak_scan,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        config = config_from_args(args)
    except UsageError as exc:
        print(f"lmglab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return _COMMANDS[args.command](config)
    except UsageError as exc:
        print(f"lmglab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"lmglab: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
