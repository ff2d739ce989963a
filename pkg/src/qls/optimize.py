"""Quasi-Newton minimization and the depth-increasing search strategies.

Minimization is BFGS with strong-Wolfe line search and the analytic
gradient, run to an infinity-norm gradient tolerance of 1e-9 (with restarts
when the line search stalls early). Depth p+1 starts are generated either
from the zero-insertion saddles of the depth-p minimum (greedy over all
2p+1, or the first-layer saddle alone) or by the frequency-space strategy
that extends the amplitude vector by one zero component per depth.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize as scipy_minimize

from .graphs import CostDiagonal, approximation_ratio
from .statevector import ParameterVector, energy_variance, prepare_qaoa_state
from . import derivatives as dv
from . import transition_states as ts_mod

GRAD_TOL = 1e-9
MAX_ITERATIONS = 10_000
DEFAULT_TS_STEP = 1e-3
BOOTSTRAP_GRID = 32


@dataclass
class OptimizationRecord:
    energy: float
    grad_inf_norm: float
    iterations: int
    converged: bool


@dataclass
class TraceRecord:
    """One depth of a strategy run."""

    p: int
    params: ParameterVector
    energy: float
    one_minus_r: float
    variance: float
    gradient_norm: float
    iterations: int
    strategy_tag: str
    lambda_ts_estimate: float | None = None
    fraction_to_best: float | None = None
    halted: bool = False

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "params": [float(x) for x in self.params.flat()],
            "energy": self.energy,
            "one_minus_r": self.one_minus_r,
            "variance": self.variance,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "strategy_tag": self.strategy_tag,
            "lambda_ts_estimate": self.lambda_ts_estimate,
            "fraction_to_best": self.fraction_to_best,
            "halted": self.halted,
        }


@dataclass
class OptimizationTrace:
    strategy: str
    num_qubits: int
    graph_seed: int | None
    records: list[TraceRecord] = field(default_factory=list)

    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.records])


def minimize(
    cost: CostDiagonal,
    initial: ParameterVector,
    gtol: float = GRAD_TOL,
    maxiter: int = MAX_ITERATIONS,
    restarts: int = 2,
) -> tuple[ParameterVector, OptimizationRecord]:
    """BFGS with analytic gradients; returns flagged record if not converged.

    scipy's line search can stall on function-value precision loss a decade
    or two above the gradient tolerance; a restart (fresh inverse-Hessian
    approximation) and a final Newton polish on the finite-difference
    Hessian recover the last digits without loosening the tolerance.
    """

    def fun(flat):
        return dv.energy_and_gradient(cost, ParameterVector.from_flat(flat))

    x = initial.flat()
    total_iters = 0
    for _ in range(restarts + 1):
        res = scipy_minimize(
            fun, x, jac=True, method="BFGS",
            options={"gtol": gtol, "maxiter": max(maxiter - total_iters, 1)},
        )
        x = res.x
        total_iters += max(res.nit, 1)
        gnorm = float(np.max(np.abs(fun(x)[1])))
        if gnorm <= gtol or total_iters >= maxiter:
            break
    if gnorm > gtol and total_iters < maxiter:
        x, gnorm, polish_iters = _newton_polish(cost, x, gnorm, gtol)
        total_iters += polish_iters
    params = ParameterVector.from_flat(x)
    return params, OptimizationRecord(
        energy=fun(x)[0],
        grad_inf_norm=gnorm,
        iterations=total_iters,
        converged=gnorm <= gtol,
    )


def _newton_polish(
    cost: CostDiagonal, x: np.ndarray, gnorm: float, gtol: float, max_steps: int = 5
) -> tuple[np.ndarray, float, int]:
    """Newton steps on the finite-difference Hessian near a stalled minimum.

    Steps are accepted only if the gradient norm shrinks and the energy does
    not increase beyond round-off, so the descent contract is preserved.
    """
    energy = dv.energy_of(cost, ParameterVector.from_flat(x))
    steps = 0
    # one Hessian is enough: near the minimum Newton converges in 1-2 steps
    h = dv.hessian(cost, ParameterVector.from_flat(x)).entries
    for _ in range(max_steps):
        if gnorm <= gtol:
            break
        g = dv.gradient(cost, ParameterVector.from_flat(x))
        try:
            dx = np.linalg.solve(h, -g)
        except np.linalg.LinAlgError:
            dx = np.linalg.lstsq(h, -g, rcond=None)[0]
        accepted = False
        for scale in (1.0, 0.5, 0.25):
            cand = x + scale * dx
            cand_e, cand_grad = dv.energy_and_gradient(cost, ParameterVector.from_flat(cand))
            cand_g = float(np.max(np.abs(cand_grad)))
            if cand_g < gnorm and cand_e <= energy + 1e-12:
                x, gnorm, energy, accepted = cand, cand_g, cand_e, True
                break
        steps += 1
        if not accepted:
            break
    return x, gnorm, steps


@dataclass
class DescentResult:
    params: ParameterVector
    record: OptimizationRecord
    branch_energies: tuple[float, float]
    branch_iterations: tuple[int, int]


def descend_from_ts(
    cost: CostDiagonal,
    ts_params: ParameterVector,
    delta: np.ndarray,
    step: float = DEFAULT_TS_STEP,
) -> DescentResult:
    """Launch minimization from ts +- step*delta and keep the better branch."""
    flat = ts_params.flat()
    branches = []
    for sense in (-1.0, 1.0):
        start = ParameterVector.from_flat(flat + sense * step * delta)
        branches.append(minimize(cost, start))
    (pm, rm), (pp, rp) = branches
    best_params, best_rec = (pm, rm) if rm.energy <= rp.energy else (pp, rp)
    return DescentResult(
        params=best_params,
        record=best_rec,
        branch_energies=(rm.energy, rp.energy),
        branch_iterations=(rm.iterations, rp.iterations),
    )


@dataclass
class StepResult:
    params: ParameterVector
    record: OptimizationRecord
    optimizations_launched: int
    fraction_to_best: float | None
    halted: bool


def greedy_step(cost: CostDiagonal, min_params: ParameterVector) -> StepResult:
    """Descend from all 2p+1 saddles (both senses) and keep the lowest minimum.

    Directions are the Hessian-free estimates. If every saddle is degenerate
    the zero-padded configuration itself is returned with a halted flag.
    """
    results = []
    launched = 0
    for index in ts_mod.admissible_indices(min_params.p):
        est = ts_mod.approx_eigenpair(cost, min_params, index)
        if est.degenerate:
            continue
        ts_params = ts_mod.construct_ts(min_params, index)
        results.append(descend_from_ts(cost, ts_params, est.delta))
        launched += 2
    if not results:
        padded = ts_mod.construct_ts(min_params, ts_mod.TsIndex(1, 1))
        rec = OptimizationRecord(
            energy=dv.energy_of(cost, padded),
            grad_inf_norm=dv.gradient_inf_norm(cost, padded),
            iterations=0,
            converged=True,
        )
        return StepResult(padded, rec, 0, None, True)
    energies = np.array([r.record.energy for r in results])
    best = int(np.argmin(energies))
    fraction = float(np.mean(np.abs(energies - energies[best]) < 1e-8))
    return StepResult(
        params=results[best].params,
        record=results[best].record,
        optimizations_launched=launched,
        fraction_to_best=fraction,
        halted=False,
    )


def single_ts_step(cost: CostDiagonal, min_params: ParameterVector) -> StepResult:
    """Greedy step restricted to the first-layer saddle (two optimizations)."""
    est = ts_mod.approx_eigenpair(cost, min_params, ts_mod.TsIndex(1, 1))
    if est.degenerate:
        padded = ts_mod.construct_ts(min_params, ts_mod.TsIndex(1, 1))
        rec = OptimizationRecord(
            energy=dv.energy_of(cost, padded),
            grad_inf_norm=dv.gradient_inf_norm(cost, padded),
            iterations=0,
            converged=True,
        )
        return StepResult(padded, rec, 0, None, True)
    ts_params = ts_mod.construct_ts(min_params, ts_mod.TsIndex(1, 1))
    res = descend_from_ts(cost, ts_params, est.delta)
    return StepResult(res.params, res.record, 2, None, False)


def bootstrap_depth_one(
    cost: CostDiagonal, grid: int = BOOTSTRAP_GRID
) -> tuple[ParameterVector, OptimizationRecord]:
    """Depth-1 minimum from a coarse (beta, gamma) grid plus local refinement."""
    angles = -np.pi / 2 + np.pi * np.arange(grid) / grid
    best = (np.inf, 0.0, 0.0)
    for beta in angles:
        for gamma in angles:
            e = dv.energy_of(cost, ParameterVector([beta], [gamma]))
            if e < best[0]:
                best = (e, beta, gamma)
    return minimize(cost, ParameterVector([best[1]], [best[2]]))


def _trace_record(
    cost: CostDiagonal,
    p: int,
    params: ParameterVector,
    record: OptimizationRecord,
    tag: str,
    **extra,
) -> TraceRecord:
    psi = prepare_qaoa_state(cost, params)
    lam_est = -abs(dv.scalar_b(cost, params, check_stationary=False).value) / np.sqrt(2.0)
    return TraceRecord(
        p=p,
        params=params,
        energy=record.energy,
        one_minus_r=approximation_ratio(record.energy, cost),
        variance=energy_variance(cost, psi),
        gradient_norm=record.grad_inf_norm,
        iterations=record.iterations,
        strategy_tag=tag,
        lambda_ts_estimate=lam_est,
        **extra,
    )


def run_ts_strategy(
    cost: CostDiagonal,
    p_max: int,
    strategy: str = "greedy",
    graph_seed: int | None = None,
) -> OptimizationTrace:
    """Run the greedy or single-ts strategy up to depth p_max."""
    if strategy not in ("greedy", "single-ts"):
        raise ValueError(f"unknown strategy {strategy!r}")
    step = greedy_step if strategy == "greedy" else single_ts_step
    trace = OptimizationTrace(strategy, cost.num_qubits, graph_seed)
    params, record = bootstrap_depth_one(cost)
    trace.records.append(_trace_record(cost, 1, params, record, strategy))
    for p in range(2, p_max + 1):
        result = step(cost, params)
        params, record = result.params, result.record
        trace.records.append(
            _trace_record(
                cost, p, params, record, strategy,
                fraction_to_best=result.fraction_to_best,
                halted=result.halted,
            )
        )
        if result.halted:
            break
    return trace


# ---------------------------------------------------------------------------
# frequency-space strategy
# ---------------------------------------------------------------------------

@dataclass
class FourierAmplitudes:
    """Frequency amplitudes (v for betas, u for gammas), full basis q = p."""

    v: np.ndarray
    u: np.ndarray

    @property
    def p(self) -> int:
        return self.v.size


def _fourier_matrices(p: int) -> tuple[np.ndarray, np.ndarray]:
    i = np.arange(1, p + 1)[:, None] - 0.5
    k = np.arange(1, p + 1)[None, :] - 0.5
    return np.cos(i * k * np.pi / p), np.sin(i * k * np.pi / p)


def amplitudes_to_angles(amps: FourierAmplitudes) -> ParameterVector:
    mc, ms = _fourier_matrices(amps.p)
    return ParameterVector(mc @ amps.v, ms @ amps.u)


def angles_to_amplitudes(params: ParameterVector) -> FourierAmplitudes:
    mc, ms = _fourier_matrices(params.p)
    return FourierAmplitudes(
        np.linalg.solve(mc, params.betas), np.linalg.solve(ms, params.gammas)
    )


def _minimize_amplitudes(
    cost: CostDiagonal, amps: FourierAmplitudes
) -> tuple[FourierAmplitudes, OptimizationRecord]:
    """Optimize in amplitude space, then polish in angle space and map back.

    The amplitude-to-angle transform is a bijection at full frequency count,
    so the angle-space polish keeps the same minimum while guaranteeing the
    recorded gradient tolerance in angle coordinates.
    """
    p = amps.p
    mc, ms = _fourier_matrices(p)

    def unpack(flat):
        return amplitudes_to_angles(FourierAmplitudes(flat[:p], flat[p:]))

    def fun(flat):
        e, g = dv.energy_and_gradient(cost, unpack(flat))
        return e, np.concatenate([mc.T @ g[:p], ms.T @ g[p:]])

    x = np.concatenate([amps.v, amps.u])
    res = scipy_minimize(fun, x, jac=True, method="BFGS",
                         options={"gtol": 1e-8, "maxiter": MAX_ITERATIONS})
    params, record = minimize(cost, unpack(res.x))
    record.iterations += res.nit
    return angles_to_amplitudes(params), record


def fourier_strategy(
    cost: CostDiagonal,
    p_max: int,
    num_perturbations: int = 10,
    perturbation_scale: float = 0.1,
    seed: int = 0,
    graph_seed: int | None = None,
) -> OptimizationTrace:
    """Frequency-space strategy with R random perturbed restarts per depth.

    Each depth extends the best amplitudes by one zero frequency and
    optimizes; with R > 0 it additionally optimizes R starts perturbed by
    zero-mean normals scaled to a fraction of each block's rms amplitude.
    """
    rng = np.random.default_rng(seed)
    tag = f"fourier[inf,{num_perturbations}]"
    trace = OptimizationTrace(tag, cost.num_qubits, graph_seed)
    params1, rec1 = bootstrap_depth_one(cost)
    best = angles_to_amplitudes(params1)
    trace.records.append(_trace_record(cost, 1, params1, rec1, tag))
    for p in range(2, p_max + 1):
        base = FourierAmplitudes(np.append(best.v, 0.0), np.append(best.u, 0.0))
        candidates = [base]
        for _ in range(num_perturbations):
            sv = perturbation_scale * max(float(np.sqrt(np.mean(base.v**2))), 1e-3)
            su = perturbation_scale * max(float(np.sqrt(np.mean(base.u**2))), 1e-3)
            candidates.append(
                FourierAmplitudes(
                    base.v + rng.normal(0.0, sv, p), base.u + rng.normal(0.0, su, p)
                )
            )
        outcomes = [_minimize_amplitudes(cost, c) for c in candidates]
        idx = int(np.argmin([r.energy for _, r in outcomes]))
        best, record = outcomes[idx]
        trace.records.append(
            _trace_record(cost, p, amplitudes_to_angles(best), record, tag)
        )
    return trace
