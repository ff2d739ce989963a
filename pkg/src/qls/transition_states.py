"""Zero-insertion saddle points built from a converged local minimum.

Inserting a pair of zero angles into a depth-p minimum yields 2p+1 distinct
stationary points of the depth-(p+1) landscape, each with a unique descent
direction. The admissible insertions are the symmetric ones (l, l) for
l = 1..p+1 plus the staggered ones (l, l+1) for l = 1..p; the construction
keeps the circuit unitary (and hence the energy) unchanged.

For each saddle this module computes a Hessian-free estimate of the negative
eigenvalue and its eigenvector, rigorous eigenvalue bounds from the
congruence with a block-diagonal matrix, and (optionally) the exact dense
eigenpair for validation.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .graphs import CostDiagonal
from .statevector import ParameterVector
from . import derivatives as dv

DEGENERACY_REL_TOL = 1e-10

# extreme eigenvalues of R R^T for the two-row elementary transformation
RR_EIG_HIGH = (3.0 + np.sqrt(5.0)) / 2.0
RR_EIG_LOW = (3.0 - np.sqrt(5.0)) / 2.0


@dataclass(frozen=True)
class TsIndex:
    """Insertion slots (1-based) of the zero beta and zero gamma angles."""

    beta_slot: int
    gamma_slot: int

    def kind(self, p: int) -> str:
        b, g = self.beta_slot, self.gamma_slot
        if b == g == 1:
            return "edge-first"
        if b == g == p + 1:
            return "edge-last"
        if b == g:
            return "bulk"
        if g == b + 1:
            return "staggered"
        raise ValueError(f"inadmissible insertion index ({b}, {g})")

    def validate(self, p: int) -> None:
        self.kind(p)
        if not (1 <= self.beta_slot <= p + 1 and 1 <= self.gamma_slot <= p + 1):
            raise ValueError(f"insertion index {self} out of range for depth {p}")


def admissible_indices(p: int) -> list[TsIndex]:
    """All 2p+1 admissible insertion indices, interleaved canonically."""
    out = []
    for l in range(1, p + 1):
        out.append(TsIndex(l, l))
        out.append(TsIndex(l, l + 1))
    out.append(TsIndex(p + 1, p + 1))
    assert len(out) == 2 * p + 1
    return out


def construct_ts(min_params: ParameterVector, index: TsIndex) -> ParameterVector:
    """Depth-(p+1) saddle configuration for a converged depth-p minimum."""
    index.validate(min_params.p)
    return min_params.insert_zeros(index.beta_slot, index.gamma_slot)


def _merge_partners(index: TsIndex, p: int) -> tuple[int, int]:
    """Minimum-coordinate (beta, gamma) indices (1-based) whose circuit
    positions coincide with the inserted pair when the zeros are removed."""
    kind = index.kind(p)
    if kind == "bulk":
        return index.beta_slot - 1, index.gamma_slot
    if kind == "staggered":
        return index.beta_slot, index.beta_slot
    raise ValueError(f"no interior merge partners for {kind} insertion")


# ---------------------------------------------------------------------------
# eigenpair estimates
# ---------------------------------------------------------------------------

@dataclass
class ApproxEigenpair:
    lambda_estimate: float | None
    delta: np.ndarray | None
    scalar: float
    kind: str
    degenerate: bool


def _delta_from_weights(p_new: int, weights: dict[str, float]) -> np.ndarray:
    """Assemble a flat direction of depth p_new from {'b3': w, 'g1': w} keys."""
    delta = np.zeros(2 * p_new)
    for key, w in weights.items():
        slot = int(key[1:])
        delta[slot - 1 if key[0] == "b" else p_new + slot - 1] = w
    return delta


def _delta_variants(
    index: TsIndex, p: int, sign: float
) -> list[np.ndarray]:
    """Candidate unit descent directions, analytically preferred one first.

    The alternate differs by the documented block swap (edge insertions) or
    by the relative sign of the two weight pairs (interior insertions).
    """
    s = 1.0 if sign >= 0 else -1.0
    r2 = np.sqrt(2.0)
    kind = index.kind(p)
    if kind == "edge-first":
        primary = {"b1": -s / r2, "g1": -0.5, "g2": 0.5}
        alternate = {"b1": -0.5, "b2": 0.5, "g1": -s / r2}
    elif kind == "edge-last":
        primary = {f"b{p}": -s / 2, f"b{p + 1}": s / 2, f"g{p + 1}": 1 / r2}
        alternate = {f"g{p}": -s / 2, f"g{p + 1}": s / 2, f"b{p + 1}": 1 / r2}
    elif kind == "bulk":
        l = index.beta_slot
        primary = {f"b{l - 1}": -0.5, f"b{l}": 0.5, f"g{l}": -s / 2, f"g{l + 1}": s / 2}
        alternate = {f"b{l - 1}": -0.5, f"b{l}": 0.5, f"g{l}": s / 2, f"g{l + 1}": -s / 2}
    else:  # staggered
        i = index.beta_slot
        primary = {f"b{i}": 0.5, f"b{i + 1}": -0.5, f"g{i}": s / 2, f"g{i + 1}": -s / 2}
        alternate = {f"b{i}": 0.5, f"b{i + 1}": -0.5, f"g{i}": -s / 2, f"g{i + 1}": s / 2}
    return [_delta_from_weights(p + 1, primary), _delta_from_weights(p + 1, alternate)]


def ts_scalar(cost: CostDiagonal, min_params: ParameterVector, index: TsIndex) -> float:
    """The curvature scalar (b for edge insertions, b-bar otherwise)."""
    p = min_params.p
    kind = index.kind(p)
    if kind == "edge-first":
        return dv.scalar_b(cost, min_params, check_stationary=False).value
    if kind == "edge-last":
        return dv.scalar_b_last(cost, min_params)
    if kind == "bulk":
        return dv.scalar_b_bar(cost, min_params, index.beta_slot)
    return dv.scalar_b_bar_staggered(cost, min_params, index.beta_slot)


def approx_eigenpair(
    cost: CostDiagonal, min_params: ParameterVector, index: TsIndex
) -> ApproxEigenpair:
    """Hessian-free estimate of the negative eigenvalue and its direction.

    Edge insertions scale as -|b|/sqrt(2) with a three-weight direction;
    interior insertions as -|b-bar|/2 with four +-1/2 weights on the angles
    adjacent to the insertion. Returns a degenerate marker (no eigenpair)
    when the scalar vanishes on the Hamiltonian scale.
    """
    p = min_params.p
    kind = index.kind(p)
    scalar = ts_scalar(cost, min_params, index)
    if abs(scalar) < DEGENERACY_REL_TOL * cost.n_c:
        return ApproxEigenpair(None, None, scalar, kind, True)
    prefactor = np.sqrt(2.0) if kind.startswith("edge") else 2.0
    delta = _delta_variants(index, p, np.sign(scalar))[0]
    return ApproxEigenpair(-abs(scalar) / prefactor, delta, scalar, kind, False)


@dataclass
class OstrowskiBounds:
    """Eigenvalue sandwich from the congruence transform's spectral range."""

    lower: float
    upper: float
    refined_upper: float


def ostrowski_bounds(b_bar: float, refined_prefactor: float = 2.0) -> OstrowskiBounds:
    """Bounds on the negative eigenvalue implied by the scalar magnitude.

    lower = -(3+sqrt5)/2 |b|, upper = -2/(3+sqrt5) |b|; the refined upper
    bound is the Rayleigh value of the ansatz direction, -|b|/prefactor.
    """
    mag = abs(b_bar)
    return OstrowskiBounds(
        lower=-RR_EIG_HIGH * mag,
        upper=-mag / RR_EIG_HIGH,
        refined_upper=-mag / refined_prefactor,
    )


# ---------------------------------------------------------------------------
# congruence diagnostic
# ---------------------------------------------------------------------------

@dataclass
class CongruenceDiagnostic:
    off_block_residual: float
    min_block_residual: float
    corner_diag_residual: float
    b_bar_from_corner: float
    rr_eigenvalues: np.ndarray
    negatives_ts: int
    negatives_min: int
    signature_ok: bool
    structural_ok: bool


def _reorder_permutation(index: TsIndex, p: int) -> list[int]:
    """TS flat indices arranged as [min coords in min layout, inserted pair]."""
    perm = []
    for k in range(1, p + 1):  # min betas
        slot = k if k < index.beta_slot else k + 1
        perm.append(slot - 1)
    for k in range(1, p + 1):  # min gammas
        slot = k if k < index.gamma_slot else k + 1
        perm.append((p + 1) + slot - 1)
    perm.append(index.beta_slot - 1)
    perm.append((p + 1) + index.gamma_slot - 1)
    return perm


def congruence_check(
    hessian_ts: dv.HessianMatrix,
    hessian_min: dv.HessianMatrix,
    index: TsIndex,
    tol: float = 1e-6,
) -> CongruenceDiagnostic:
    """Verify the block structure relating the saddle and minimum Hessians.

    Reorders the saddle Hessian so the inserted pair comes last, subtracts
    the merge-partner rows/columns, and checks that the result is block
    diagonal with the minimum's Hessian and a 2x2 block [[0, bbar], [bbar, 0]].
    A residual above tolerance signals a convention error, not a math failure.
    """
    p = hessian_min.origin.p
    h_ts = hessian_ts.entries
    h_min = hessian_min.entries
    if h_ts.shape != (2 * p + 2, 2 * p + 2):
        raise ValueError("saddle Hessian must have two more rows than the minimum's")
    pb, pg = _merge_partners(index, p)
    perm = _reorder_permutation(index, p)
    h_re = h_ts[np.ix_(perm, perm)]
    r = np.eye(2 * p + 2)
    r[2 * p, pb - 1] = -1.0
    r[2 * p + 1, p + pg - 1] = -1.0
    h_block = r @ h_re @ r.T
    scale = max(float(np.max(np.abs(h_ts))), 1e-300)

    off = float(np.max(np.abs(h_block[: 2 * p, 2 * p :])))
    min_res = float(np.max(np.abs(h_block[: 2 * p, : 2 * p] - h_min)))
    corner = h_block[2 * p :, 2 * p :]
    corner_diag = float(max(abs(corner[0, 0]), abs(corner[1, 1])))
    b_bar = float((corner[0, 1] + corner[1, 0]) / 2.0)

    neg_ts = hessian_ts.num_negative()
    neg_min = hessian_min.num_negative()
    expected_neg = neg_min + (1 if abs(b_bar) > tol * scale else 0)

    return CongruenceDiagnostic(
        off_block_residual=off / scale,
        min_block_residual=min_res / scale,
        corner_diag_residual=corner_diag / scale,
        b_bar_from_corner=b_bar,
        rr_eigenvalues=np.sort(np.linalg.eigvalsh(r @ r.T)),
        negatives_ts=neg_ts,
        negatives_min=neg_min,
        signature_ok=neg_ts == expected_neg,
        structural_ok=(off / scale < tol and corner_diag / scale < tol),
    )


# ---------------------------------------------------------------------------
# full per-saddle reports
# ---------------------------------------------------------------------------

@dataclass
class TransitionStateReport:
    """Everything measured about one zero-insertion saddle."""

    index: TsIndex
    kind: str
    ts_params: ParameterVector
    energy: float
    grad_inf_norm: float
    b_or_bbar: float
    degenerate: bool
    lambda_estimate: float | None = None
    delta_estimate: np.ndarray | None = None
    lambda_exact: float | None = None
    eigvec_exact: np.ndarray | None = None
    num_negative: int | None = None
    rel_error: float | None = None
    overlap: float | None = None
    ostrowski_lower: float | None = None
    ostrowski_upper: float | None = None
    refined_upper: float | None = None
    variant_swapped: bool = False

    def to_dict(self) -> dict:
        def vec(v):
            return None if v is None else [float(x) for x in v]

        return {
            "beta_slot": self.index.beta_slot,
            "gamma_slot": self.index.gamma_slot,
            "kind": self.kind,
            "ts_params": vec(self.ts_params.flat()),
            "energy": self.energy,
            "grad_inf_norm": self.grad_inf_norm,
            "b_or_bbar": self.b_or_bbar,
            "degenerate": self.degenerate,
            "lambda_estimate": self.lambda_estimate,
            "delta_estimate": vec(self.delta_estimate),
            "lambda_exact": self.lambda_exact,
            "eigvec_exact": vec(self.eigvec_exact),
            "num_negative": self.num_negative,
            "rel_error": self.rel_error,
            "overlap": self.overlap,
            "ostrowski_lower": self.ostrowski_lower,
            "ostrowski_upper": self.ostrowski_upper,
            "refined_upper": self.refined_upper,
            "variant_swapped": self.variant_swapped,
        }


def all_transition_states(
    cost: CostDiagonal,
    min_params: ParameterVector,
    compute_exact: bool = True,
) -> list[TransitionStateReport]:
    """Reports for all 2p+1 saddles of a converged depth-p minimum.

    With `compute_exact` the dense Hessian eigenpair is solved per saddle
    and the direction estimate is validated against it: if the absolute
    overlap falls below 0.5 the documented alternate weight layout is tried
    and the better one reported. Without it only the Hessian-free estimates
    are produced.
    """
    p = min_params.p
    reports = []
    for index in admissible_indices(p):
        ts_params = construct_ts(min_params, index)
        e_ts = dv.energy_of(cost, ts_params)
        g_ts = dv.gradient_inf_norm(cost, ts_params)
        est = approx_eigenpair(cost, min_params, index)
        report = TransitionStateReport(
            index=index,
            kind=est.kind,
            ts_params=ts_params,
            energy=e_ts,
            grad_inf_norm=g_ts,
            b_or_bbar=est.scalar,
            degenerate=est.degenerate,
            lambda_estimate=est.lambda_estimate,
            delta_estimate=est.delta,
        )
        if not est.degenerate:
            prefactor = np.sqrt(2.0) if est.kind.startswith("edge") else 2.0
            bounds = ostrowski_bounds(est.scalar, refined_prefactor=prefactor)
            report.ostrowski_lower = bounds.lower
            report.ostrowski_upper = bounds.upper
            report.refined_upper = bounds.refined_upper
        if compute_exact:
            h_ts = dv.hessian(cost, ts_params)
            eigvals, eigvecs = h_ts.eigenpairs()
            lam = float(eigvals[0])
            vec = eigvecs[:, 0]
            report.lambda_exact = lam
            scale = max(float(np.max(np.abs(eigvals))), 1e-300)
            report.num_negative = int(np.sum(eigvals < -1e-7 * scale))
            if not est.degenerate:
                variants = _delta_variants(index, p, np.sign(est.scalar))
                overlaps = [abs(float(np.dot(d, vec))) for d in variants]
                pick = 0
                if overlaps[0] < 0.5 and overlaps[1] > overlaps[0]:
                    pick = 1
                    report.variant_swapped = True
                delta = variants[pick]
                if float(np.dot(delta, vec)) < 0:
                    vec = -vec
                report.delta_estimate = delta
                report.overlap = overlaps[pick]
                report.rel_error = abs(est.lambda_estimate - lam) / abs(lam)
            report.eigvec_exact = vec
        reports.append(report)
    assert len(reports) == 2 * p + 1
    return reports
