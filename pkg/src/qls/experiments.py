"""Experiment harness: seeded ensembles in, CSV/JSONL datasets out.

Every output embeds the configuration hash and the seeds it was produced
from, commands refuse to overwrite existing files unless forced, and all
randomness flows from recorded seeds so re-runs reproduce files bitwise.
Plotting is out of scope: the emitted tables are the deliverable.
"""

from __future__ import annotations

import csv
import hashlib
import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .graphs import build_cost_diagonal, generate_regular_graph
from .statevector import ParameterVector, plus_state, energy_variance
from . import derivatives as dv
from . import transition_states as ts_mod
from . import slices as sl
from . import optimize as opt

SCHEMA_VERSION = 1


@dataclass
class ExperimentConfig:
    """Inputs shared by the dataset-producing commands."""

    experiment: str
    n_values: list[int] = field(default_factory=lambda: [10])
    seeds: list[int] = field(default_factory=lambda: list(range(10)))
    p_max: int = 5
    degree: int = 3
    weighted: bool = False
    strategy: str = "single-ts"
    num_perturbations: int = 10
    eps_max: float = 0.3
    eps_points: int = 61
    target_p: int = 3
    out: str = "out.csv"
    force: bool = False
    parallelism: int = 0
    schema_version: int = SCHEMA_VERSION

    def hashed_payload(self) -> dict:
        """The science-relevant fields (not output path or worker count)."""
        payload = asdict(self)
        for key in ("out", "force", "parallelism"):
            payload.pop(key)
        return payload

    def hash(self) -> str:
        blob = json.dumps(self.hashed_payload(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def resolve_workers(config: ExperimentConfig, num_jobs: int) -> int:
    workers = config.parallelism if config.parallelism > 0 else (os.cpu_count() or 1)
    cap = os.environ.get("QLS_THREADS")
    if cap:
        workers = min(workers, max(int(cap), 1))
    return max(min(workers, num_jobs), 1)


def check_output_path(path: str | Path, force: bool) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise FileExistsError(f"refusing to overwrite {path} (use --force)")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path: Path, config: ExperimentConfig, header: list[str], rows: list[list]):
    """CSV with a single comment line embedding the config and its hash."""
    with open(path, "w", newline="") as fh:
        fh.write(f"# config_hash={config.hash()} "
                 f"config={json.dumps(config.hashed_payload(), sort_keys=True)}\n")
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _map_jobs(worker, jobs: list, config: ExperimentConfig) -> list:
    """Instance-level parallel map with deterministic (submit-order) results."""
    workers = resolve_workers(config, len(jobs))
    if workers <= 1 or len(jobs) <= 1:
        return [worker(job) for job in jobs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, jobs))


def _instance_trace(args) -> dict:
    """Worker: build one instance and run the configured strategy."""
    n, seed, cfg = args
    graph = generate_regular_graph(n, cfg["degree"], cfg["weighted"], seed)
    cost = build_cost_diagonal(graph)
    if cfg["strategy"] == "fourier":
        trace = opt.fourier_strategy(
            cost, cfg["p_max"], num_perturbations=cfg["num_perturbations"],
            seed=seed, graph_seed=seed,
        )
    else:
        trace = opt.run_ts_strategy(cost, cfg["p_max"], cfg["strategy"], graph_seed=seed)
    return {
        "n": n,
        "seed": seed,
        "records": [r.to_dict() for r in trace.records],
    }


def _trace_cfg(config: ExperimentConfig) -> dict:
    return {
        "degree": config.degree,
        "weighted": config.weighted,
        "strategy": config.strategy,
        "p_max": config.p_max,
        "num_perturbations": config.num_perturbations,
    }


def run_strategy_command(config: ExperimentConfig) -> Path:
    """JSONL of per-depth records for each (n, seed) instance."""
    path = check_output_path(config.out, config.force)
    jobs = [(n, seed, _trace_cfg(config)) for n in config.n_values for seed in config.seeds]
    results = _map_jobs(_instance_trace, jobs, config)
    with open(path, "w") as fh:
        meta = {
            "type": "meta",
            "config_hash": config.hash(),
            "config": config.hashed_payload(),
            "seeds": config.seeds,
        }
        fh.write(json.dumps(meta, sort_keys=True) + "\n")
        for res in results:
            for record in res["records"]:
                row = {
                    "type": "record",
                    "n": res["n"],
                    "seed": res["seed"],
                    "config_hash": config.hash(),
                    **record,
                }
                fh.write(json.dumps(row, sort_keys=True) + "\n")
    return path


def _instance_minima(args) -> tuple[int, int, object, list]:
    """Worker: instance plus the per-depth minima of the strategy run."""
    n, seed, cfg = args
    graph = generate_regular_graph(n, cfg["degree"], cfg["weighted"], seed)
    cost = build_cost_diagonal(graph)
    trace = opt.run_ts_strategy(cost, cfg["p_max"], cfg["strategy"], graph_seed=seed)
    return n, seed, graph, trace.records


TS_ACCURACY_HEADER = [
    "n", "seed", "p", "beta_slot", "gamma_slot", "kind",
    "rel_error", "overlap_deviation", "b_or_bbar", "kappa1", "degenerate",
]


def _ts_accuracy_instance(args) -> list[list]:
    n, seed, graph, records = _instance_minima(args)
    cost = build_cost_diagonal(graph)
    rows = []
    for rec in records:
        params = ParameterVector.from_flat(np.array(rec.params.flat()))
        kappa1 = float(np.linalg.eigvalsh(dv.hessian(cost, params).entries)[0])
        for rep in ts_mod.all_transition_states(cost, params, compute_exact=True):
            rows.append([
                n, seed, rec.p, rep.index.beta_slot, rep.index.gamma_slot, rep.kind,
                rep.rel_error, None if rep.overlap is None else 1.0 - rep.overlap,
                rep.b_or_bbar, kappa1, rep.degenerate,
            ])
    return rows


def ts_accuracy_command(config: ExperimentConfig) -> Path:
    """Per-saddle estimate accuracy against exact Hessian eigenpairs."""
    path = check_output_path(config.out, config.force)
    jobs = [(n, seed, _trace_cfg(config)) for n in config.n_values for seed in config.seeds]
    rows = [row for chunk in _map_jobs(_ts_accuracy_instance, jobs, config) for row in chunk]
    write_csv(path, config, TS_ACCURACY_HEADER, rows)
    return path


CURVATURE_VARIANCE_HEADER = [
    "n", "p", "mean_abs_lambda_ts", "mean_variance", "mean_one_minus_r", "num_seeds",
]


def curvature_variance_command(config: ExperimentConfig) -> Path:
    """Ensemble means of |lambda_TS|, energy variance and 1-r per depth.

    Includes the depth-0 diagnostic row: in the bare |+> state the variance
    equals n_c and 1-r equals one.
    """
    path = check_output_path(config.out, config.force)
    jobs = [(n, seed, _trace_cfg(config)) for n in config.n_values for seed in config.seeds]
    results = _map_jobs(_instance_trace, jobs, config)
    rows = []
    for n in config.n_values:
        chunks = [r for r in results if r["n"] == n]
        lam0, var0, oneminus0 = [], [], []
        for res in chunks:
            seed = res["seed"]
            graph = generate_regular_graph(n, config.degree, config.weighted, seed)
            cost = build_cost_diagonal(graph)
            b0 = dv.scalar_b(cost, ParameterVector.zeros(0), check_stationary=False)
            lam0.append(abs(b0.value) / np.sqrt(2.0))
            var0.append(energy_variance(cost, plus_state(n)))
            oneminus0.append(1.0)
        if chunks:
            rows.append([n, 0, float(np.mean(lam0)), float(np.mean(var0)),
                         float(np.mean(oneminus0)), len(chunks)])
        for p in range(1, config.p_max + 1):
            lam, var, oneminus = [], [], []
            for res in chunks:
                rec = next((r for r in res["records"] if r["p"] == p), None)
                if rec is None:
                    continue
                lam.append(abs(rec["lambda_ts_estimate"]))
                var.append(rec["variance"])
                oneminus.append(rec["one_minus_r"])
            if lam:
                rows.append([n, p, float(np.mean(lam)), float(np.mean(var)),
                             float(np.mean(oneminus)), len(lam)])
    write_csv(path, config, CURVATURE_VARIANCE_HEADER, rows)
    return path


BOUND_VS_OPTIM_HEADER = [
    "n", "p", "seed", "delta_e_bound", "best_ts_bound", "delta_e_optimized", "degenerate",
]


def _bound_instance(args) -> list[list]:
    n, seed, graph, records = _instance_minima(args)
    cost = build_cost_diagonal(graph)
    rows = []
    for rec, rec_next in zip(records, records[1:]):
        params = ParameterVector.from_flat(np.array(rec.params.flat()))
        de_optimized = rec_next.energy - rec.energy
        try:
            model = sl.build_slice_model(graph, cost, params, include_cubic=False)
            bound = sl.delta_e_bound(model)
            degenerate = False
        except (sl.DegenerateSaddleError, sl.NoMinimumError):
            bound, degenerate = None, True
        best, _ = sl.best_ts_bound(graph, cost, params)
        rows.append([n, rec.p, seed, bound, best, de_optimized, degenerate])
    return rows


def bound_vs_optim_command(config: ExperimentConfig) -> Path:
    """Closed-form bound vs best saddle slice vs optimized improvement."""
    path = check_output_path(config.out, config.force)
    jobs = [(n, seed, _trace_cfg(config)) for n in config.n_values for seed in config.seeds]
    rows = [row for chunk in _map_jobs(_bound_instance, jobs, config) for row in chunk]
    write_csv(path, config, BOUND_VS_OPTIM_HEADER, rows)
    return path


QUARTIC_HEADER = ["n", "seed", "p", "quartic_exact", "quartic_approx"]


def _quartic_instance(args) -> list[list]:
    n, seed, graph, records = _instance_minima(args)
    cost = build_cost_diagonal(graph)
    rows = []
    for rec in records:
        params = ParameterVector.from_flat(np.array(rec.params.flat()))
        qc = dv.quartic_coefficient(cost, params)
        rows.append([n, seed, rec.p, qc.exact, qc.approx])
    return rows


def quartic_command(config: ExperimentConfig) -> Path:
    """Exact vs approximate quartic slice coefficient along the ensemble."""
    path = check_output_path(config.out, config.force)
    jobs = [(n, seed, _trace_cfg(config)) for n in config.n_values for seed in config.seeds]
    rows = [row for chunk in _map_jobs(_quartic_instance, jobs, config) for row in chunk]
    write_csv(path, config, QUARTIC_HEADER, rows)
    return path


SLICE_HEADER = ["epsilon", "exact_delta_e", "model_delta_e", "model_with_cubic_delta_e"]


def slice_command(config: ExperimentConfig) -> Path:
    """Slice scan at the first-layer saddle of one instance's target depth."""
    path = check_output_path(config.out, config.force)
    n = config.n_values[0]
    seed = config.seeds[0]
    graph = generate_regular_graph(n, config.degree, config.weighted, seed)
    cost = build_cost_diagonal(graph)
    trace = opt.run_ts_strategy(cost, config.target_p, config.strategy, graph_seed=seed)
    params = trace.records[-1].params
    model = sl.build_slice_model(graph, cost, params, include_cubic=True)
    est = ts_mod.approx_eigenpair(cost, params, ts_mod.TsIndex(1, 1))
    ts_params = ts_mod.construct_ts(params, ts_mod.TsIndex(1, 1))
    rows = []
    for eps in np.linspace(-config.eps_max, config.eps_max, config.eps_points):
        rows.append([
            float(eps),
            sl.exact_slice_energy(cost, ts_params, est.delta, float(eps)),
            model.delta_e(float(eps), "symmetric"),
            model.delta_e(float(eps), "cubic"),
        ])
    write_csv(path, config, SLICE_HEADER, rows)
    return path


# ---------------------------------------------------------------------------
# small analysis helpers shared by tests and downstream consumers
# ---------------------------------------------------------------------------

def log_linear_fit(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope and R^2 of log(y) against x (y must be positive)."""
    x = np.asarray(x, dtype=float)
    logy = np.log(np.asarray(y, dtype=float))
    slope, intercept = np.polyfit(x, logy, 1)
    fitted = slope * x + intercept
    ss_res = float(np.sum((logy - fitted) ** 2))
    ss_tot = float(np.sum((logy - np.mean(logy)) ** 2))
    r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2
