"""Command-line experiment runner.

``hilbert-ksd run --experiment exp1 --kernel se --t t1 --reps 200 --seed 7``

Settings come from an optional JSON file (``--config``) overridden by flags.
Power experiments write a CSV with columns::

    experiment, kernel, t, n, reps, seed, reject_rate, mean_stat, runtime_s

plus a JSON sidecar (same stem, ``.json``) holding the resolved config and
every per-repetition statistic, threshold, bandwidth and decision.

Exit codes: 0 success, 1 runtime failure, 2 config error.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import __version__
from ._backend import BACKEND
from .errors import ConfigError
from .experiments import (
    BROWNIAN_EXPERIMENTS,
    CELLS,
    TABLE3_DELTAS,
    brownian_setting,
    em_study,
    gibbs_setting,
    run_brownian_table,
    run_gibbs_table,
)
from .gof import PowerStudyResult, TestConfig, substream
from .spectral1d import (
    Kernel1D,
    SpectralKind,
    SpectralMeasure,
    cubic_demo_model,
    diagonal_corrected,
    emit_testfunction_data,
    gaussian_model,
    spectral_ksd_mc,
    stein_gram_1d,
)

POWER_COLUMNS = ("experiment", "kernel", "t", "n", "reps", "seed", "reject_rate", "mean_stat", "runtime_s")

TABLES = {
    "table1": ("exp1", "exp2", "exp3", "exp4", "exp5"),
    "table2": ("exp6", "exp7"),
}
EXPERIMENTS = tuple(BROWNIAN_EXPERIMENTS) + tuple(TABLES) + ("gibbs", "table3", "em_study", "testfns", "oracle1d")

PRESETS = {
    # repetitions per experiment group
    "paper": {"brownian": 500, "gibbs": 100},
    "desk": {"brownian": 200, "gibbs": 100},
}

KNOWN_KEYS = {
    "experiment", "kernel", "t", "n", "reps", "bootstrap", "alpha", "seed", "grid_m", "out",
    "steps", "delta", "mu", "n_mc", "n_curves", "preset", "timing", "jobs",
}

ORACLE_SHIFT = 0.5


@dataclass
class ExperimentConfig:
    experiment: str
    kernel_family: Tuple[str, ...]
    t_choice: Tuple[str, ...]
    n_samples: Optional[int]
    repetitions: int
    n_bootstrap: int
    alpha: float
    seed: int
    grid_m: int
    output_path: str
    steps: Tuple[int, ...] = ()
    deltas: Tuple[float, ...] = ()
    mu: str = "gaussian"
    n_mc: int = 100_000
    n_curves: int = 10
    timing: bool = True
    jobs: int = 1
    preset: str = "paper"

    @property
    def cells(self) -> List[Tuple[str, str]]:
        return [(k, t) for k, t in CELLS if k in self.kernel_family and t in self.t_choice]

    @property
    def group(self) -> str:
        if self.experiment in BROWNIAN_EXPERIMENTS or self.experiment in TABLES:
            return "brownian"
        if self.experiment in ("gibbs", "table3"):
            return "gibbs"
        return self.experiment


# ---------------------------------------------------------------------------
# config validation


def _as_int(v, name, errs, minimum=1):
    try:
        if isinstance(v, bool):
            raise ValueError
        if isinstance(v, float) and not v.is_integer():
            raise ValueError
        out = int(v)
    except (TypeError, ValueError):
        errs.append(f"{name}: expected an integer, got {v!r}")
        return None
    if out < minimum:
        errs.append(f"{name}: must be >= {minimum}, got {out}")
        return None
    return out


def _as_float(v, name, errs):
    try:
        if isinstance(v, bool):
            raise ValueError
        out = float(v)
    except (TypeError, ValueError):
        errs.append(f"{name}: expected a number, got {v!r}")
        return None
    if not math.isfinite(out):
        errs.append(f"{name}: must be finite, got {v!r}")
        return None
    return out


def _as_list(v):
    if isinstance(v, str):
        return [p.strip() for p in v.split(",") if p.strip()]
    if isinstance(v, (list, tuple)):
        return list(v)
    return [v]


def _choice(v, name, allowed, errs):
    """Upper-cased single choice, or all of ``allowed`` when ``v`` is None."""
    if v is None:
        return tuple(allowed)
    s = str(v).upper()
    if s not in allowed:
        errs.append(f"{name}: expected one of {', '.join(a.lower() for a in allowed)}, got {v!r}")
        return tuple(allowed)
    return (s,)


def validate_config(source: Dict) -> ExperimentConfig:
    """Resolve a raw mapping into an :class:`ExperimentConfig`.

    Collects every problem before raising :class:`ConfigError`.
    """
    errs: List[str] = []
    unknown = sorted(set(source) - KNOWN_KEYS)
    for k in unknown:
        errs.append(f"unknown key {k!r}")
    raw = {k: v for k, v in source.items() if v is not None}

    exp = raw.get("experiment")
    if exp is None:
        errs.append("experiment: required")
    elif str(exp).lower() not in EXPERIMENTS:
        errs.append(f"experiment: unknown {exp!r}; expected one of {', '.join(EXPERIMENTS)}")
        exp = None
    else:
        exp = str(exp).lower()

    preset = str(raw.get("preset", "paper")).lower()
    if preset not in PRESETS:
        errs.append(f"preset: expected one of {', '.join(PRESETS)}, got {raw['preset']!r}")
        preset = "paper"

    kernels = _choice(raw.get("kernel"), "kernel", ("SE", "IMQ"), errs)
    ts = _choice(raw.get("t"), "t", ("T1", "T2"), errs)

    n_bootstrap = _as_int(raw.get("bootstrap", 2000), "bootstrap", errs)
    alpha = _as_float(raw.get("alpha", 0.05), "alpha", errs)
    if alpha is not None and not 0.0 < alpha < 1.0:
        errs.append(f"alpha: must lie in (0, 1), got {alpha}")
    seed = _as_int(raw.get("seed", 0), "seed", errs, minimum=0)
    jobs = _as_int(raw.get("jobs", 1), "jobs", errs)
    n_mc = _as_int(raw.get("n_mc", 100_000), "n_mc", errs)
    n_curves = _as_int(raw.get("n_curves", 10), "n_curves", errs, minimum=0)
    timing = raw.get("timing", True)
    if not isinstance(timing, bool):
        errs.append(f"timing: expected true/false, got {timing!r}")

    n = None
    if "n" in raw:
        n = _as_int(raw["n"], "n", errs, minimum=2)

    group = "brownian"
    if exp in ("gibbs", "table3"):
        group = "gibbs"
    elif exp in ("em_study", "testfns", "oracle1d"):
        group = exp

    if "reps" in raw:
        reps = _as_int(raw["reps"], "reps", errs)
    else:
        reps = PRESETS[preset].get(group, 1)

    default_m = 129 if group == "gibbs" else 100
    grid_m = _as_int(raw.get("grid_m", default_m), "grid_m", errs, minimum=2)

    steps: Tuple[int, ...] = ()
    if exp == "em_study":
        vals = [_as_int(s, "steps", errs, minimum=2) for s in _as_list(raw.get("steps", "5,10,15,20,25"))]
        steps = tuple(v for v in vals if v is not None)
        if not steps:
            errs.append("steps: at least one step count is required")
        if "kernel" not in raw:
            kernels = ("IMQ",)
        if "t" not in raw:
            ts = ("T2",)
        if n is None:
            n = 2000
    elif "steps" in raw:
        errs.append("steps: only valid for em_study")

    deltas: Tuple[float, ...] = ()
    if exp == "gibbs":
        if "delta" not in raw:
            errs.append("delta: required for the gibbs experiment")
        else:
            vals = [_as_float(d, "delta", errs) for d in _as_list(raw["delta"])]
            deltas = tuple(v for v in vals if v is not None)
            if not deltas:
                errs.append("delta: at least one value is required")
    elif exp == "table3":
        if "delta" in raw:
            vals = [_as_float(d, "delta", errs) for d in _as_list(raw["delta"])]
            deltas = tuple(v for v in vals if v is not None)
        else:
            deltas = TABLE3_DELTAS
    elif "delta" in raw:
        errs.append("delta: only valid for gibbs and table3")
    if group == "gibbs" and n is None:
        n = 100
    if exp in BROWNIAN_EXPERIMENTS and n is None:
        n = BROWNIAN_EXPERIMENTS[exp].n

    mu = str(raw.get("mu", "gaussian")).lower()
    try:
        mu_kind = SpectralMeasure.parse(mu).kind
    except ValueError:
        errs.append(f"mu: expected gaussian, student2 or cauchy, got {raw.get('mu')!r}")
        mu_kind = None
    if exp == "oracle1d":
        if mu_kind not in (None, SpectralKind.GAUSSIAN):
            errs.append("mu: oracle1d pairs the SE kernel with the gaussian spectral measure only")
        if n is None:
            n = 500
    elif "mu" in raw and exp != "testfns":
        errs.append("mu: only valid for testfns and oracle1d")

    out = raw.get("out") or f"results/{exp or 'run'}.csv"

    if errs:
        raise ConfigError(errs)
    return ExperimentConfig(
        experiment=exp,
        kernel_family=kernels,
        t_choice=ts,
        n_samples=n,
        repetitions=reps,
        n_bootstrap=n_bootstrap,
        alpha=alpha,
        seed=seed,
        grid_m=grid_m,
        output_path=str(out),
        steps=steps,
        deltas=deltas,
        mu=mu,
        n_mc=n_mc,
        n_curves=n_curves,
        timing=bool(timing),
        jobs=jobs,
        preset=preset,
    )


# ---------------------------------------------------------------------------
# runners


def _fmt(x) -> str:
    if x is None:
        return ""
    if isinstance(x, float):
        return repr(x)
    return str(x)


def _write_csv(path: Path, header: Sequence[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])


def _write_json(path: Path, payload) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _detail(res: PowerStudyResult):
    return [
        {"index": i, "statistic": s, "threshold": th, "reject": bool(r), "gamma": g}
        for i, (s, th, r, g) in enumerate(zip(res.statistics, res.thresholds, res.rejections, res.gammas))
    ]


def _power_rows(cfg: ExperimentConfig, cfgt: TestConfig):
    """(csv rows, json rows) for the Brownian and Gibbs power experiments."""
    rows = []
    blocks = []
    if cfg.group == "brownian":
        setting = brownian_setting(cfg.grid_m)
        names = TABLES.get(cfg.experiment, (cfg.experiment,))
        for name in names:
            t0 = time.perf_counter()
            res = run_brownian_table([name], cfg.cells, cfg.repetitions, cfgt, cfg.n_samples,
                                     setting, n_jobs=cfg.jobs)
            elapsed = time.perf_counter() - t0
            n = cfg.n_samples or BROWNIAN_EXPERIMENTS[name].n
            blocks.append(([(name, k, t) for k, t in cfg.cells], name, n, res, elapsed))
    else:
        setting = gibbs_setting(cfg.grid_m)
        t0 = time.perf_counter()
        res = run_gibbs_table(cfg.deltas, cfg.cells, cfg.repetitions, cfgt, cfg.n_samples,
                              setting, n_jobs=cfg.jobs)
        elapsed = time.perf_counter() - t0
        for d in cfg.deltas:
            blocks.append(([(float(d), k, t) for k, t in cfg.cells], f"gibbs(delta={d:g})",
                           cfg.n_samples, res, elapsed))
    out_rows = []
    for keys, label, n, res, elapsed in blocks:
        for key in keys:
            r = res[key]
            runtime = round(elapsed, 3) if cfg.timing else 0.0
            row = (label, key[1], key[2], n, r.repetitions, cfg.seed, r.rate,
                   float(np.mean(r.statistics)), runtime)
            rows.append(row)
            rec = dict(zip(POWER_COLUMNS, row))
            rec["repetitions"] = _detail(r)
            out_rows.append(rec)
    return rows, out_rows


def _run(cfg: ExperimentConfig) -> Tuple[List[str], list, dict]:
    """Execute ``cfg``; returns (csv header, csv rows, json extras)."""
    if cfg.group in ("brownian", "gibbs"):
        cfgt = TestConfig(cfg.n_bootstrap, cfg.alpha, cfg.seed)
        rows, detail = _power_rows(cfg, cfgt)
        return list(POWER_COLUMNS), rows, {"results": detail}

    if cfg.experiment == "em_study":
        rows, detail = [], []
        for fam, tc in cfg.cells:
            t0 = time.perf_counter()
            pairs = em_study(cfg.steps, cfg.n_samples, fam, tc, 1.0, cfg.grid_m, cfg.seed)
            elapsed = time.perf_counter() - t0
            rows.extend(pairs)
            detail.append({"kernel": fam, "t": tc, "gamma": 1.0,
                           "pairs": [{"steps": s, "v_statistic": v} for s, v in pairs],
                           "runtime_s": round(elapsed, 3) if cfg.timing else 0.0})
        return ["steps", "v_statistic"], rows, {"results": detail}

    if cfg.experiment == "testfns":
        table = emit_testfunction_data(cubic_demo_model(), SpectralMeasure.parse(cfg.mu),
                                       n_curves=cfg.n_curves, seed=cfg.seed)
        return ["curve_index", "s_value", "x", "real_part", "score"], table.rows(), {
            "model": cubic_demo_model().label, "s_values": [float(s) for s in table.s_values]}

    # oracle1d
    n = cfg.n_samples
    x = substream(cfg.seed, 0).standard_normal(n) + ORACLE_SHIFT
    model = gaussian_model()
    est = spectral_ksd_mc(x, model, SpectralMeasure(), cfg.n_mc, seed=substream(cfg.seed, 1),
                          return_stderr=True)
    H = stein_gram_1d(x, model, Kernel1D("SE", 1.0))
    u = float((H.sum() - np.trace(H)) / (n * (n - 1)))
    dmean = float(np.mean(np.diag(H)))
    corrected = diagonal_corrected(u, dmean, n)
    diff = abs(est.value - corrected)
    row = (n, cfg.n_mc, cfg.seed, est.value, est.stderr, u, dmean, corrected, diff,
           bool(diff <= 3.0 * est.stderr))
    header = ["n", "n_mc", "seed", "spectral", "spectral_stderr", "u_statistic", "diag_mean",
              "corrected", "abs_diff", "within_3se"]
    return header, [row], {}


def run(cfg: ExperimentConfig) -> Path:
    """Run an experiment and write its CSV and JSON sidecar; returns the CSV path."""
    t0 = time.perf_counter()
    header, rows, extras = _run(cfg)
    elapsed = time.perf_counter() - t0
    path = Path(cfg.output_path)
    _write_csv(path, header, rows)
    payload = {
        "config": asdict(cfg),
        "version": __version__,
        "backend": BACKEND if cfg.timing else None,
        "runtime_s": round(elapsed, 3) if cfg.timing else 0.0,
        "columns": header,
    }
    payload.update(extras)
    _write_json(path.with_suffix(".json"), payload)
    return path


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hilbert-ksd", description="Kernel Stein discrepancy experiments.")
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="run one experiment or table")
    # values stay strings here so validate_config can report every problem at once
    r.add_argument("--config", help="JSON file with settings; flags override it")
    r.add_argument("--experiment", help=", ".join(EXPERIMENTS))
    r.add_argument("--kernel", help="se or imq (default: both)")
    r.add_argument("--t", dest="t", help="t1 or t2 (default: both)")
    r.add_argument("--n", help="sample size")
    r.add_argument("--reps", help="repetitions")
    r.add_argument("--bootstrap", help="bootstrap replicates (default 2000)")
    r.add_argument("--alpha", help="test level (default 0.05)")
    r.add_argument("--seed", help="base seed (default 0)")
    r.add_argument("--grid-m", dest="grid_m", help="observation grid size")
    r.add_argument("--out", help="CSV output path; the JSON sidecar shares its stem")
    r.add_argument("--steps", help="comma-separated EM step counts (em_study)")
    r.add_argument("--delta", help="drift size, comma-separated allowed (gibbs, table3)")
    r.add_argument("--mu", help="gaussian, student2 or cauchy (testfns)")
    r.add_argument("--n-mc", dest="n_mc", help="spectral draws (oracle1d)")
    r.add_argument("--n-curves", dest="n_curves", help="test-function curves (testfns)")
    r.add_argument("--preset", help="paper (500 reps) or desk (200 reps)")
    r.add_argument("--jobs", help="worker threads for repetitions")
    r.add_argument("--no-timing", dest="timing", action="store_const", const=False,
                   help="write 0 for wall-clock fields so reruns are byte-identical")
    return p


def _numeric(v):
    """Best-effort conversion of a flag string; validation happens later."""
    if not isinstance(v, str):
        return v
    for conv in (int, float):
        try:
            return conv(v)
        except ValueError:
            pass
    return v


def config_from_args(args: argparse.Namespace, extra: Sequence[str] = ()) -> ExperimentConfig:
    raw: Dict = {}
    unknown = [f"unknown flag {a!r}" for a in extra if a.startswith("-")]
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                loaded = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError([f"config: cannot read {args.config}: {exc}"]) from exc
        if not isinstance(loaded, dict):
            raise ConfigError(["config: top level must be a JSON object"])
        raw.update(loaded)
    for k, v in vars(args).items():
        if k in ("command", "config") or v is None:
            continue
        raw[k] = v if k in ("steps", "delta", "experiment", "kernel", "t", "mu", "out", "preset") else _numeric(v)
    try:
        cfg = validate_config(raw)
    except ConfigError as exc:
        raise ConfigError(unknown + exc.violations) from None
    if unknown:
        raise ConfigError(unknown)
    return cfg


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args, extra = parser.parse_known_args(argv)
    try:
        cfg = config_from_args(args, extra)
    except ConfigError as exc:
        print("config error:", file=sys.stderr)
        for v in exc.violations:
            print(f"  - {v}", file=sys.stderr)
        return 2
    try:
        path = run(cfg)
    except Exception as exc:  # surfaced as exit status 1
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
