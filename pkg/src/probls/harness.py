"""Experiment runner: config parsing, replicate grids, CSV traces and summaries."""

from __future__ import annotations

import configparser
import csv
import glob as globlib
import hashlib
import io
import itertools
import math
import os
import re
import statistics
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .linesearch import SearchConfig
from .optimizer import OptimizerTrace, sgd_fixed_rate, sgd_with_line_search
from .problems import (
    load_csv_dataset,
    make_logistic_regression,
    make_noisy_quadratic,
    make_small_mlp,
    make_synthetic_blobs,
)

TRACE_COLUMNS = (
    "step", "cum_evals", "accepted_alpha", "evals_in_search",
    "train_loss", "sigma_f", "sigma_df", "termination",
)
METHODS = ("problinesearch", "fixed")
SEARCH_GRID_KEYS = ("c2", "c_W", "alpha_ext")


class ConfigError(ValueError):
    pass


class TraceError(ValueError):
    pass


@dataclass(frozen=True)
class RunSpec:
    method: str
    alpha: float
    seed: int
    search_params: tuple[tuple[str, float], ...] = ()

    @property
    def grid(self) -> dict:
        return {"alpha": self.alpha, **dict(self.search_params)}

    @property
    def stem(self) -> str:
        parts = [self.method] + [f"{k}={_fmt(v)}" for k, v in self.grid.items()] + [f"seed={self.seed}"]
        return "__".join(parts)


@dataclass
class ExperimentConfig:
    problem: dict
    methods: tuple[str, ...]
    batch_size: int
    budget: int
    seeds: tuple[int, ...]
    alphas: tuple[float, ...]
    search_grid: dict = field(default_factory=dict)
    search_fixed: dict = field(default_factory=dict)
    output_dir: str | None = None
    config_hash: str = ""

    def runs(self, seed_offset: int = 0) -> list[RunSpec]:
        keys = sorted(self.search_grid)
        out = []
        for method in self.methods:
            combos = itertools.product(*(self.search_grid[k] for k in keys)) if method == "problinesearch" else [()]
            for combo in combos:
                params = tuple(zip(keys, combo))
                for alpha in self.alphas:
                    for seed in self.seeds:
                        out.append(RunSpec(method, alpha, seed + seed_offset, params))
        return out


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, float) else str(v)


def _floats(text: str, what: str) -> tuple[float, ...]:
    text = text.strip()
    m = re.fullmatch(r"logspace\(\s*([^,]+),\s*([^,]+),\s*(\d+)\s*\)", text)
    try:
        if m:
            lo, hi, n = float(m[1]), float(m[2]), int(m[3])
            return tuple(float(v) for v in np.logspace(lo, hi, n))
        return tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {what}: {text!r}") from None


def _ints(text: str, what: str) -> tuple[int, ...]:
    text = text.strip()
    try:
        m = re.fullmatch(r"(\d+)\s*-\s*(\d+)", text)
        if m:
            return tuple(range(int(m[1]), int(m[2]) + 1))
        return tuple(int(v) for v in text.split(",") if v.strip())
    except ValueError:
        raise ConfigError(f"cannot parse {what}: {text!r}") from None


def parse_config(text: str) -> ExperimentConfig:
    """Parse an INI-style experiment description.

    Sections: ``[problem]`` (kind plus constructor arguments), ``[run]``
    (methods, batch_size, budget, seeds, output_dir), ``[grid]`` (alpha and
    optional c2 / c_W / alpha_ext lists) and an optional ``[linesearch]``
    section overriding single search constants.
    """
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError(str(exc)) from None
    for sec in ("problem", "run", "grid"):
        if not cp.has_section(sec):
            raise ConfigError(f"missing [{sec}] section")
    run, grid = cp["run"], cp["grid"]
    problem = dict(cp["problem"])
    if problem.get("kind") not in ("logistic", "quadratic", "mlp", "csv"):
        raise ConfigError(f"unknown problem kind {problem.get('kind')!r}")

    methods = tuple(m.strip() for m in run.get("methods", "problinesearch").split(",") if m.strip())
    bad = set(methods) - set(METHODS)
    if bad or not methods:
        raise ConfigError(f"unknown methods {sorted(bad)}")
    try:
        batch_size = run.getint("batch_size", 10)
        budget = run.getint("budget", 1000)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    seeds = _ints(run.get("seeds", "0"), "seeds")
    if "alpha" not in grid:
        raise ConfigError("[grid] needs an alpha list")
    alphas = _floats(grid["alpha"], "alpha")
    if not alphas or any(not a > 0 or not math.isfinite(a) for a in alphas):
        raise ConfigError("alpha grid must contain positive finite values")
    if batch_size < 2 or budget < 2 or not seeds:
        raise ConfigError("need batch_size >= 2, budget >= 2 and at least one seed")

    search_grid = {k: _floats(grid[k], k) for k in SEARCH_GRID_KEYS if k in grid}
    search_fixed = {}
    known = {f.name: f.type for f in fields(SearchConfig)}
    if cp.has_section("linesearch"):
        for k, v in cp["linesearch"].items():
            if k not in known:
                raise ConfigError(f"unknown line search option {k!r}")
            if k == "acquisition_mode":
                search_fixed[k] = v.strip()
            elif k == "exact_noise":
                search_fixed[k] = cp["linesearch"].getboolean(k)
            elif k == "budget_l":
                search_fixed["budget_L"] = int(v)
            else:
                search_fixed[k] = float(v)
    cfg = ExperimentConfig(
        problem=problem,
        methods=methods,
        batch_size=batch_size,
        budget=budget,
        seeds=seeds,
        alphas=alphas,
        search_grid=search_grid,
        search_fixed=search_fixed,
        output_dir=run.get("output_dir"),
        config_hash=hashlib.sha256(text.encode()).hexdigest()[:16],
    )
    # validate every search configuration up front
    for spec in cfg.runs():
        if spec.method == "problinesearch":
            _search_config(cfg, spec)
    return cfg


def _search_config(cfg: ExperimentConfig, spec: RunSpec) -> SearchConfig:
    try:
        return SearchConfig(**{**cfg.search_fixed, **dict(spec.search_params)})
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid line search settings: {exc}") from None


def build_problem(p: dict):
    """Construct the problem and its initial point from a ``[problem]`` section."""
    prob, x0 = _build_problem(p)
    prob.finite_population = p.get("finite_population", "false").strip().lower() in ("1", "true", "yes", "on")
    return prob, x0


def _build_problem(p: dict):
    kind = p["kind"]
    try:
        data_seed = int(p.get("data_seed", 0))
        if kind == "quadratic":
            dim = int(p.get("dim", 10))
            spectrum = _floats(p.get("spectrum", "1.0"), "spectrum")
            if len(spectrum) not in (1, dim):
                raise ConfigError("spectrum must have 1 or dim entries")
            prob = make_noisy_quadratic(
                dim, spectrum, float(p.get("noise_scale", 1.0)), int(p.get("size", 1000)), data_seed
            )
            x0 = np.full(dim, float(p.get("x_init", 1.0)))
            return prob, x0
        if kind in ("logistic", "csv"):
            if kind == "csv":
                X, y = load_csv_dataset(p["path"], header=p.get("header", "false").lower() == "true")
            else:
                X, y = make_synthetic_blobs(
                    int(p.get("dim", 20)), int(p.get("size", 2000)), float(p.get("separation", 4.0)), data_seed
                )
            prob = make_logistic_regression(X, y, float(p.get("l2", 0.0)))
            return prob, np.zeros(prob.dim)
        if kind == "mlp":
            dim = int(p.get("dim", 10))
            hidden = _ints(p.get("hidden", "16"), "hidden")
            X, y = make_synthetic_blobs(dim, int(p.get("size", 1000)), float(p.get("separation", 4.0)), data_seed)
            prob = make_small_mlp(
                [dim, *hidden, 1], p.get("activation", "tanh"), "cross-entropy", (X, (y + 1) / 2), data_seed
            )
            return prob, prob.initial_params
    except KeyError as exc:
        raise ConfigError(f"[problem] is missing {exc}") from None
    except ValueError as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid [problem] settings: {exc}") from None
    raise ConfigError(f"unknown problem kind {kind!r}")


def execute_run(cfg: ExperimentConfig, spec: RunSpec) -> tuple[OptimizerTrace, float]:
    prob, x0 = build_problem(cfg.problem)
    if spec.method == "fixed":
        trace = sgd_fixed_rate(prob, x0, spec.alpha, cfg.budget, spec.seed, cfg.batch_size)
    else:
        trace = sgd_with_line_search(
            prob, x0, spec.alpha, cfg.budget, _search_config(cfg, spec), spec.seed, cfg.batch_size
        )
    with np.errstate(over="ignore", invalid="ignore"):
        final = prob.full_loss(trace.x_final)
    return trace, final


def render_trace(spec: RunSpec, trace: OptimizerTrace, final_full_loss: float, config_hash: str) -> str:
    buf = io.StringIO()
    buf.write(f"# method={spec.method}\n")
    for k, v in spec.grid.items():
        buf.write(f"# {k}={_fmt(v)}\n")
    buf.write(f"# seed={spec.seed}\n")
    buf.write(f"# config_hash={config_hash}\n")
    buf.write(f"# final_full_loss={_fmt(float(final_full_loss))}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(TRACE_COLUMNS)
    for i, r in enumerate(trace.records):
        w.writerow([
            i, r.cum_evals, _fmt(float(r.accepted_alpha)), r.evals_in_search,
            _fmt(float(r.train_loss)), _fmt(float(r.sigma_f)), _fmt(float(r.sigma_df)), r.termination,
        ])
    return buf.getvalue()


def write_atomic(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _run_and_write(cfg: ExperimentConfig, spec: RunSpec, out_dir: Path) -> Path:
    trace, final = execute_run(cfg, spec)
    path = out_dir / "traces" / f"{spec.stem}.csv"
    write_atomic(path, render_trace(spec, trace, final, cfg.config_hash))
    return path


def run_experiment(cfg: ExperimentConfig, out_dir, jobs: int = 1, seed_offset: int = 0) -> list[Path]:
    """Run every (method, grid point, seed) cell; write traces and ``summary.csv``."""
    out_dir = Path(out_dir)
    specs = cfg.runs(seed_offset)
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            paths = list(pool.map(_run_and_write, itertools.repeat(cfg), specs, itertools.repeat(out_dir)))
    else:
        paths = [_run_and_write(cfg, s, out_dir) for s in specs]
    write_atomic(out_dir / "summary.csv", render_summary(summarize(paths)))
    return paths


# ---------------------------------------------------------------------------
# summaries


@dataclass
class TraceData:
    meta: dict
    rows: list[dict]


def read_trace(path) -> TraceData:
    try:
        with open(path, newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise TraceError(f"{path}: {exc}") from None
    meta, body = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, sep, v = line[2:].partition("=")
            if not sep:
                raise TraceError(f"{path}: malformed metadata line {line!r}")
            meta[k] = v
        else:
            body.append(line)
    rows = list(csv.DictReader(body))
    if not body or tuple(csv.reader(body[:1]).__next__()) != TRACE_COLUMNS:
        raise TraceError(f"{path}: missing or unexpected header")
    for key in ("method", "seed", "final_full_loss"):
        if key not in meta:
            raise TraceError(f"{path}: missing metadata {key!r}")
    return TraceData(meta, rows)


SUMMARY_COLUMNS = (
    "row", "method", "alpha", "c2", "c_W", "alpha_ext", "seed", "n_runs",
    "final_loss", "final_loss_std", "final_train_loss", "mean_alpha", "max_alpha",
    "mean_evals_per_search", "n_searches",
)


def summarize(paths) -> list[dict]:
    """Per-run statistics followed by per-grid-cell aggregates over seeds."""
    paths = sorted(str(p) for p in paths)
    if not paths:
        raise TraceError("no trace files given")
    runs = []
    for p in paths:
        td = read_trace(p)
        try:
            alphas = [float(r["accepted_alpha"]) for r in td.rows]
            evals = [int(r["evals_in_search"]) for r in td.rows]
            losses = [float(r["train_loss"]) for r in td.rows]
        except (KeyError, ValueError, TypeError) as exc:
            raise TraceError(f"{p}: corrupt row ({exc})") from None
        runs.append({
            "row": "run",
            "method": td.meta["method"],
            "alpha": td.meta.get("alpha", ""),
            "c2": td.meta.get("c2", ""),
            "c_W": td.meta.get("c_W", ""),
            "alpha_ext": td.meta.get("alpha_ext", ""),
            "seed": td.meta["seed"],
            "n_runs": 1,
            "final_loss": float(td.meta["final_full_loss"]),
            "final_loss_std": 0.0,
            "final_train_loss": losses[-1] if losses else math.nan,
            "mean_alpha": statistics.fmean(alphas) if alphas else math.nan,
            "max_alpha": max(alphas) if alphas else math.nan,
            "mean_evals_per_search": statistics.fmean(evals) if evals else math.nan,
            "n_searches": len(td.rows),
        })
    cell_key = lambda r: (r["method"], r["alpha"], r["c2"], r["c_W"], r["alpha_ext"])
    cells = []
    for key, group in itertools.groupby(sorted(runs, key=cell_key), key=cell_key):
        group = list(group)
        fl = [g["final_loss"] for g in group]
        cells.append({
            "row": "cell",
            **dict(zip(("method", "alpha", "c2", "c_W", "alpha_ext"), key)),
            "seed": "",
            "n_runs": len(group),
            "final_loss": statistics.fmean(fl),
            "final_loss_std": statistics.stdev(fl) if len(fl) > 1 else 0.0,
            "final_train_loss": statistics.fmean(g["final_train_loss"] for g in group),
            "mean_alpha": statistics.fmean(g["mean_alpha"] for g in group),
            "max_alpha": max(g["max_alpha"] for g in group),
            "mean_evals_per_search": statistics.fmean(g["mean_evals_per_search"] for g in group),
            "n_searches": sum(g["n_searches"] for g in group),
        })
    return runs + cells


def render_summary(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, SUMMARY_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({k: _fmt(v) if isinstance(v, float) else v for k, v in r.items()})
    return buf.getvalue()


def expand_globs(patterns) -> list[str]:
    out = []
    for pat in patterns:
        hits = globlib.glob(pat, recursive=True)
        out.extend(hits if hits else [pat] if not globlib.has_magic(pat) else [])
    return sorted(set(out))
