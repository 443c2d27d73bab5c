"""Seeded Monte Carlo experiments and their CSV/JSON outputs.

Trial ``i`` of every experiment draws its data, tone map, channel and noise from
``(master_seed, i, stream)``, so results do not depend on worker count or on the
order in which trials run.
"""
from __future__ import annotations

import csv
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from .clipper import Scheme
from .metrics import (
    aggregate,
    capacity_condition,
    capacity_from_records,
    empirical_ccdf,
    papr_reduction_ccdf,
    papr_reduction_db,
    support_included,
)
from .ofdm import OfdmConfig
from .recovery import Method, ps_distances
from .simulation import ReceiverSettings, draw_trial, evaluate, run_trial, transmit

__all__ = [
    "ExperimentSpec",
    "SWEEP_COLUMNS",
    "run_cells",
    "run_sweep",
    "write_sweep",
    "timing_ccdf",
    "inclusion_probability",
    "inclusion_sweep",
    "nmse_zeta",
    "papr_ccdf",
    "capacity_sweep",
]

log = logging.getLogger(__name__)

SWEEP_COLUMNS = ["gamma", "method", "trials", "ser", "ser_ci95", "nmse", "papr_red_db_mean", "resid_var",
                 "wall_ms_median"]


@dataclass(frozen=True)
class ExperimentSpec:
    """One experiment. ``gamma_grid`` and ``zeta`` are in units of the envelope parameter.

    ``timing`` controls whether wall times are written; without it the CSV column
    holds NaN so that repeated runs produce identical bytes.
    """

    cfg: OfdmConfig = field(default_factory=OfdmConfig)
    gamma_grid: tuple = (1.9, 2.0, 2.1, 2.2, 2.3, 2.4, 2.5)
    methods: tuple = ("none", "lasso", "wl", "wpal", "oracle_ls")
    n_trials: int = 100
    scheme: str = "PS"
    zeta: float | None = None
    output_path: str | None = None
    settings: ReceiverSettings = field(default_factory=ReceiverSettings)
    timing: bool = False
    workers: int = 1

    def __post_init__(self):
        object.__setattr__(self, "gamma_grid", tuple(float(g) for g in self.gamma_grid))
        object.__setattr__(self, "methods", tuple(Method(m).value for m in self.methods))
        object.__setattr__(self, "scheme", Scheme(str(getattr(self.scheme, "value", self.scheme)).upper()).value)
        if not self.gamma_grid or min(self.gamma_grid) <= 0:
            raise ValueError("gamma_grid must be nonempty and positive")
        if not self.methods:
            raise ValueError("methods must be nonempty")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.scheme == Scheme.DMC.value and (self.zeta is None or self.zeta <= 0):
            raise ValueError("DMC needs a positive zeta")

    @property
    def sigma(self) -> float:
        return self.cfg.envelope_sigma

    def gamma_abs(self, g: float) -> float:
        return g * self.sigma

    @property
    def zeta_abs(self) -> float | None:
        return None if self.zeta is None else self.zeta * self.sigma

    def replace(self, **changes) -> "ExperimentSpec":
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d.update(changes)
        return ExperimentSpec(**d)

    def to_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        d["cfg"] = asdict(self.cfg)
        d["settings"] = asdict(self.settings)
        d["gamma_grid"] = list(self.gamma_grid)
        d["methods"] = list(self.methods)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentSpec":
        d = dict(d)
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown experiment keys: {sorted(unknown)}")
        if "cfg" in d:
            d["cfg"] = OfdmConfig(**d["cfg"])
        if "settings" in d:
            d["settings"] = ReceiverSettings(**d["settings"])
        return cls(**d)

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        with open(path) as f:
            return cls.from_dict(json.load(f))


# ---------------------------------------------------------------- sweep

def _run_chunk(spec: ExperimentSpec, indices, capacity: bool) -> list:
    out = []
    for i in indices:
        for g in spec.gamma_grid:
            out += run_trial(spec.cfg, i, spec.gamma_abs(g), spec.methods, spec.scheme, spec.zeta_abs,
                             spec.settings, capacity)
    return out


def run_cells(spec: ExperimentSpec, capacity: bool = False) -> dict:
    """All trial records, keyed by (gamma in sigma units, method)."""
    indices = list(range(spec.n_trials))
    workers = 1 if spec.timing else spec.workers
    if workers == 1:
        records = _run_chunk(spec, indices, capacity)
    else:
        chunks = [indices[w::workers] for w in range(workers)]
        with ProcessPoolExecutor(workers) as pool:
            parts = pool.map(_run_chunk, [spec] * workers, chunks, [capacity] * workers)
            records = [r for part in parts for r in part]
    cells: dict = {}
    sigma = spec.sigma
    for r in records:
        g = _grid_value(spec, r.gamma / sigma)
        cells.setdefault((g, r.method), []).append(r)
    for recs in cells.values():
        recs.sort(key=lambda r: r.trial)
    return cells


def _grid_value(spec: ExperimentSpec, g: float) -> float:
    return min(spec.gamma_grid, key=lambda v: abs(v - g))


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    return str(v)


def sweep_rows(spec: ExperimentSpec, cells: dict) -> list[dict]:
    rows = []
    for g in spec.gamma_grid:
        for m in spec.methods:
            a = aggregate(cells[(g, m)])
            rows.append({
                "gamma": g,
                "method": m,
                "trials": a["trials"],
                "ser": a["ser"],
                "ser_ci95": a["ser_ci95"],
                "nmse": a["nmse"],
                "papr_red_db_mean": a["papr_red_db_mean"],
                "resid_var": a["resid_var"],
                "wall_ms_median": a["wall_ms_median"] if spec.timing else math.nan,
            })
    return rows


def _write_csv(path: Path, columns, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(row[c]) for c in columns])


def _write_sidecar(path: Path, spec: ExperimentSpec, kind: str, extra: dict | None = None):
    meta = {"experiment": kind, "spec": spec.to_dict(), "sigma_envelope": spec.sigma}
    if extra:
        meta.update(extra)
    with open(path.with_suffix(".json"), "w") as f:
        json.dump(meta, f, indent=2, sort_keys=True, default=_json_default)
        f.write("\n")


def _json_default(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    raise TypeError(f"not serializable: {type(v)}")


def _output(spec: ExperimentSpec, default: str) -> Path:
    path = Path(spec.output_path or default)
    if path.exists() and path.is_dir():
        raise ValueError(f"output path {path} is a directory")
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ValueError(f"cannot create {path.parent}: {e}") from e
    return path


def write_sweep(spec: ExperimentSpec, rows, path: Path) -> Path:
    _write_csv(path, SWEEP_COLUMNS, rows)
    _write_sidecar(path, spec, "sweep")
    return path


def run_sweep(spec: ExperimentSpec) -> Path:
    """SER/NMSE against gamma for every method; returns the CSV path."""
    path = _output(spec, "sweep.csv")
    cells = run_cells(spec)
    return write_sweep(spec, sweep_rows(spec, cells), path)


# ---------------------------------------------------------------- timing

def timing_ccdf(spec: ExperimentSpec) -> dict:
    """Per-method CCDF of wall times normalized by the largest time of any method.

    Runs serially whatever ``spec.workers`` says. Returns ``{method: (t, ccdf)}``.
    """
    times: dict = {m: [] for m in spec.methods}
    for i in range(spec.n_trials):
        for g in spec.gamma_grid:
            trial = draw_trial(spec.cfg, i, spec.gamma_abs(g), spec.scheme, spec.zeta_abs, spec.settings)
            for m in spec.methods:
                times[m].append(evaluate(trial, m, spec.settings).wall_time)
    top = max(max(v) for v in times.values())
    return {m: empirical_ccdf(np.asarray(v) / top) for m, v in times.items()}


def write_timing(spec: ExperimentSpec, table: dict) -> Path:
    path = _output(spec, "timing.csv")
    rows = [{"method": m, "normalized_time": float(t), "ccdf": float(p)}
            for m, (ts, ps) in table.items() for t, p in zip(ts, ps)]
    _write_csv(path, ["method", "normalized_time", "ccdf"], rows)
    medians = {m: float(np.median(ts)) for m, (ts, _) in table.items()}
    _write_sidecar(path, spec, "timing", {"median_normalized_time": medians})
    return path


# ---------------------------------------------------------------- inclusion

def inclusion_probability(cfg: OfdmConfig, gamma: float, beta_fraction: float, trials: int,
                          settings: ReceiverSettings | None = None, master_seed: int | None = None) -> float:
    """Monte Carlo probability that the whole clip support lies in the beta-pool.

    ``gamma`` is absolute; the pool is the ``round(beta_fraction * N)`` samples
    whose equalized envelope is nearest to gamma.
    """
    return float(np.mean(_inclusion_hits(cfg, gamma, [beta_fraction], trials, settings, master_seed)[0]))


def _inclusion_hits(cfg, gamma, fractions, trials, settings, master_seed):
    for b in fractions:
        if not 0 < b <= 1:
            raise ValueError("beta_fraction must lie in (0, 1]")
    n = cfg.n_subcarriers
    betas = [max(1, int(round(b * n))) for b in fractions]
    hits = np.zeros((len(betas), trials), dtype=bool)
    for i in range(trials):
        t = draw_trial(cfg, i, gamma, Scheme.PS, None, settings, master_seed)
        rank = ps_distances(t.xbar_hat, gamma)
        for j, beta in enumerate(betas):
            hits[j, i] = support_included(rank, t.outcome.support, beta)
    return hits


def inclusion_sweep(spec: ExperimentSpec, fractions) -> Path:
    """Inclusion probability for each gamma in the grid and each beta fraction."""
    path = _output(spec, "inclusion.csv")
    rows = []
    for g in spec.gamma_grid:
        hits = _inclusion_hits(spec.cfg, spec.gamma_abs(g), fractions, spec.n_trials, spec.settings, None)
        rows += [{"gamma": g, "beta_fraction": float(b), "trials": spec.n_trials, "probability": float(h.mean())}
                 for b, h in zip(fractions, hits)]
    _write_csv(path, ["gamma", "beta_fraction", "trials", "probability"], rows)
    _write_sidecar(path, spec, "inclusion", {"beta_fractions": list(map(float, fractions))})
    return path


# ---------------------------------------------------------------- nmse vs zeta

def nmse_zeta(spec: ExperimentSpec, zeta_grid) -> list[dict]:
    """Mean NMSE of each method under DMC clipping for each zeta (sigma units).

    Uses the first gamma of the grid. Trials without clipping are skipped by the
    NMSE average.
    """
    g = spec.gamma_grid[0]
    rows = []
    for z in zeta_grid:
        s = spec.replace(scheme="dmc", zeta=float(z), gamma_grid=(g,))
        cells = run_cells(s)
        for m in s.methods:
            recs = cells[(g, m)]
            a = aggregate(recs)
            rows.append({"zeta": float(z), "gamma": g, "method": m, "trials": a["trials"], "nmse": a["nmse"],
                         "ser": a["ser"]})
    return rows


def write_nmse_zeta(spec: ExperimentSpec, rows) -> Path:
    path = _output(spec, "nmse_zeta.csv")
    _write_csv(path, ["zeta", "gamma", "method", "trials", "nmse", "ser"], rows)
    _write_sidecar(path, spec, "nmse-zeta")
    return path


# ---------------------------------------------------------------- papr

def papr_values(cfg: OfdmConfig, gamma: float, trials: int, master_seed: int | None = None) -> np.ndarray:
    """10 log10(max|x|^2 / gamma^2) for ``trials`` fresh blocks (gamma absolute)."""
    return np.array([papr_reduction_db(transmit(cfg, i, master_seed)[2], gamma) for i in range(trials)])


def papr_ccdf(spec: ExperimentSpec) -> dict:
    """``{gamma: (reduction_db, ccdf)}`` for each gamma of the grid."""
    out = {}
    for g in spec.gamma_grid:
        out[g] = papr_reduction_ccdf(papr_values(spec.cfg, spec.gamma_abs(g), spec.n_trials))
    return out


def write_papr_ccdf(spec: ExperimentSpec, table: dict) -> Path:
    path = _output(spec, "papr_ccdf.csv")
    rows = [{"gamma": g, "papr_red_db": float(v), "ccdf": float(p)}
            for g, (vs, ps) in table.items() for v, p in zip(vs, ps)]
    _write_csv(path, ["gamma", "papr_red_db", "ccdf"], rows)
    means = {str(g): float(np.mean(vs)) for g, (vs, _) in table.items()}
    _write_sidecar(path, spec, "papr-ccdf", {"mean_reduction_db": means})
    return path


# ---------------------------------------------------------------- capacity

def capacity_sweep(spec: ExperimentSpec, snr_grid=None) -> list[dict]:
    """C1 (all tones carry data) and C2 (tones reserved, clipper removed) per gamma and SNR."""
    snrs = [spec.cfg.snr_db] if snr_grid is None else list(snr_grid)
    rows = []
    for snr in snrs:
        s = spec.replace(cfg=spec.cfg.replace(snr_db=float(snr)))
        cells = run_cells(s, capacity=True)
        for g in s.gamma_grid:
            for m in s.methods:
                recs = cells[(g, m)]
                c1, c2 = capacity_from_records(recs, s.cfg)
                resid = float(np.mean([r.resid_var for r in recs]))
                full = float(np.mean([r.clip_var_full for r in recs]))
                gain = float(np.mean([r.channel_gain for r in recs]))
                rows.append({"snr_db": float(snr), "gamma": g, "method": m, "trials": len(recs), "c1": c1, "c2": c2,
                             "justified": capacity_condition(resid, full, s.cfg, gain)})
    return rows


def write_capacity(spec: ExperimentSpec, rows) -> Path:
    path = _output(spec, "capacity.csv")
    _write_csv(path, ["snr_db", "gamma", "method", "trials", "c1", "c2", "justified"], rows)
    _write_sidecar(path, spec, "capacity")
    return path


def timed(fn, *args, **kwargs):
    """Call ``fn`` and log its wall time."""
    start = time.perf_counter()
    out = fn(*args, **kwargs)
    log.info("%s finished in %.1f s", getattr(fn, "__name__", "run"), time.perf_counter() - start)
    return out
