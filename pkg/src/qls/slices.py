"""Energy along the descent direction of a saddle, exact and modeled.

The first-layer saddle admits closed small-step models of the energy change
E(saddle + eps * delta) - E(min): a symmetric quadratic-plus-quartic
polynomial, and trigonometric refinements that add the cubic 2-local
contraction and the remaining 2-/4-local contractions of the squared cost
operator. Minimizing the symmetric model yields the recursive lower bound
on the improvement available at the next depth.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .graphs import CostDiagonal, hc_squared_decomposition, ProblemGraph
from .statevector import ParameterVector, apply_circuit, plus_state
from . import derivatives as dv
from . import transition_states as ts_mod


class DegenerateSaddleError(RuntimeError):
    """Raised when the curvature scalar vanishes and no model exists."""


class NoMinimumError(ValueError):
    """Raised when the model has no interior minimum (wrong-sign coefficients)."""


@dataclass
class SliceModel:
    """Coefficients of the energy models along the first-layer descent slice.

    `lambda_ts` is the quadratic coefficient source -|b|/sqrt(2);
    `quartic_coeff` the exact second derivative along the inserted cost
    angle; `cubic_coeff` the Im 2-local contraction (None when the model is
    built without it); the t4 fields carry the remaining contractions used
    by the full trigonometric variant.
    """

    lambda_ts: float
    quartic_coeff: float
    sign_b: float
    b: float
    cubic_coeff: float | None = None
    im_t4: float | None = None
    re_t2: float | None = None
    re_t4: float | None = None
    quartic_positive: bool = True

    def delta_e(self, epsilon: float, variant: str = "symmetric") -> float:
        """Model energy change at displacement `epsilon` along the slice."""
        eps = float(epsilon)
        if variant == "symmetric":
            return 0.5 * self.lambda_ts * eps**2 + self.quartic_coeff * eps**4
        s = self.sign_b
        x = 2.0 * np.sqrt(2.0) * s * eps
        out = -eps * np.sin(x) * (self.b / 8.0)
        out += 0.5 * eps**2 * np.sin(x / 2.0) ** 2 * self.quartic_coeff
        if self.cubic_coeff is not None:
            out += -(eps**2 / 4.0) * np.sin(x) * self.cubic_coeff
        if variant == "cubic":
            return float(out)
        if variant != "full":
            raise ValueError(f"unknown model variant {variant!r}")
        out += -(eps**2 / 2.0) * np.sin(x) * (1.0 - np.cos(x)) * self.im_t4
        out += (eps**2 / 2.0) * np.sin(x / 2.0) ** 2 * self.re_t2
        out += (eps**2 / 2.0) * np.sin(x) ** 2 * self.re_t4
        return float(out)


def exact_slice_energy(
    cost: CostDiagonal,
    ts_params: ParameterVector,
    delta: np.ndarray,
    epsilon: float,
) -> float:
    """E(ts + eps*delta) - E(ts) by full statevector evaluation."""
    flat = ts_params.flat()
    if delta.shape != flat.shape:
        raise ValueError("direction and parameter dimensions differ")
    displaced = ParameterVector.from_flat(flat + epsilon * delta)
    return dv.energy_of(cost, displaced) - dv.energy_of(cost, ts_params)


def build_slice_model(
    graph: ProblemGraph,
    cost: CostDiagonal,
    min_params: ParameterVector,
    include_cubic: bool = True,
) -> SliceModel:
    """Assemble the slice model coefficients at the first-layer saddle.

    All contractions are exact statevector evaluations; the 2- and 4-local
    pieces come from the term-wise decomposition of the squared cost
    operator applied to |+>.
    """
    b = dv.scalar_b(cost, min_params, check_stationary=False).value
    if abs(b) < ts_mod.DEGENERACY_REL_TOL * cost.n_c:
        raise DegenerateSaddleError("vanishing curvature scalar: no slice model")
    quartic = dv.quartic_coefficient(cost, min_params).exact
    plus = plus_state(cost.num_qubits)
    omega = apply_circuit(plus, cost, min_params)

    _, t2, t4 = hc_squared_decomposition(graph)
    t2_diag = t2.evaluate(cost.num_qubits)
    t4_diag = t4.evaluate(cost.num_qubits)

    def contraction(diag):  # <+| U^ H_C U  T |+>
        evolved = apply_circuit(diag * plus, cost, min_params)
        return complex(np.vdot(omega, cost.values * evolved))

    c2 = contraction(t2_diag)
    c4 = contraction(t4_diag)
    return SliceModel(
        lambda_ts=-abs(b) / np.sqrt(2.0),
        quartic_coeff=quartic,
        sign_b=float(np.sign(b)),
        b=b,
        cubic_coeff=c2.imag if include_cubic else None,
        im_t4=c4.imag,
        re_t2=c2.real,
        re_t4=c4.real,
        quartic_positive=quartic > 0,
    )


def epsilon_star(model: SliceModel) -> float:
    """Positive minimizer of the symmetric model: sqrt(-lambda / (4 c))."""
    if model.lambda_ts >= 0 or model.quartic_coeff <= 0:
        raise NoMinimumError(
            "symmetric model has no interior minimum "
            f"(lambda={model.lambda_ts:.3e}, quartic={model.quartic_coeff:.3e})"
        )
    return float(np.sqrt(-model.lambda_ts / (4.0 * model.quartic_coeff)))


def delta_e_bound(model: SliceModel) -> float:
    """Model value at the minimizer: -lambda^2 / (16 c), strictly negative."""
    if model.lambda_ts >= 0 or model.quartic_coeff <= 0:
        raise NoMinimumError("bound requires negative curvature and positive quartic")
    return float(-(model.lambda_ts**2) / (16.0 * model.quartic_coeff))


def slice_minimum(
    cost: CostDiagonal,
    ts_params: ParameterVector,
    delta: np.ndarray,
    half_width: float = 1.0,
) -> tuple[float, float]:
    """Bracketed 1-d minimization of the exact slice over [-w, w].

    Searches both half-intervals and returns (eps_min, delta_e_min).
    """
    e_ts = dv.energy_of(cost, ts_params)
    flat = ts_params.flat()

    def f(eps):
        return dv.energy_of(cost, ParameterVector.from_flat(flat + eps * delta)) - e_ts

    best = (0.0, 0.0)
    for lo, hi in ((-half_width, 0.0), (0.0, half_width)):
        res = minimize_scalar(f, bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        if res.fun < best[1]:
            best = (float(res.x), float(res.fun))
    return best


def best_ts_bound(
    graph: ProblemGraph, cost: CostDiagonal, min_params: ParameterVector
) -> tuple[float | None, list[dict]]:
    """Best slice improvement over all 2p+1 saddles.

    The closed-form bound exists only for the first-layer insertion; every
    other saddle is scanned along its estimated direction with a bracketed
    1-d minimization. Returns (most negative improvement or None if all
    saddles are degenerate, per-saddle detail rows).
    """
    rows = []
    best = None
    for index in ts_mod.admissible_indices(min_params.p):
        est = ts_mod.approx_eigenpair(cost, min_params, index)
        row = {
            "beta_slot": index.beta_slot,
            "gamma_slot": index.gamma_slot,
            "kind": est.kind,
            "degenerate": est.degenerate,
            "slice_delta_e": None,
        }
        if not est.degenerate:
            ts_params = ts_mod.construct_ts(min_params, index)
            _, de = slice_minimum(cost, ts_params, est.delta)
            row["slice_delta_e"] = de
            if best is None or de < best:
                best = de
        rows.append(row)
    return best, rows
