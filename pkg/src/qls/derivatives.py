"""Exact first and second derivatives of the circuit energy.

The gradient is computed by an adjoint-style reverse sweep (two state-sized
evolutions plus one backward pass), so a full gradient costs O(p) sweeps.
The Hessian is assembled from central finite differences of that analytic
gradient. On top of these sit the curvature scalars b and b-bar that drive
the saddle-point estimates, and the decomposition of the curvature into
ground-state fidelity factors.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import CostDiagonal
from .statevector import (
    ParameterVector,
    apply_circuit,
    apply_circuit_inverse,
    apply_mixer_hamiltonian,
    _mixer_unchecked,
    energy,
    plus_state,
    prepare_qaoa_state,
)

HESSIAN_FD_STEP = 1e-5
STATIONARY_TOL = 1e-7


@dataclass
class HessianMatrix:
    """Symmetric matrix of second derivatives in the flat (betas; gammas) layout."""

    entries: np.ndarray
    origin: ParameterVector

    def eigenpairs(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigh(self.entries)

    def num_negative(self, rel_threshold: float = 1e-7) -> int:
        eigvals = np.linalg.eigvalsh(self.entries)
        scale = max(float(np.max(np.abs(eigvals))), 1e-300)
        return int(np.sum(eigvals < -rel_threshold * scale))


@dataclass
class CurvatureDecomposition:
    """Fidelity factors of the evolved |+> and H_C|+> states against a
    reference cost eigenstate, and the curvature they reconstruct."""

    alpha0: complex
    alpha_perp: float
    kappa0: complex
    kappa_perp: float
    matrix_element: complex
    reconstructed_curvature: float
    reference_index: int
    ambiguous: bool


def energy_of(cost: CostDiagonal, params: ParameterVector) -> float:
    return energy(cost, prepare_qaoa_state(cost, params))


def energy_and_gradient(
    cost: CostDiagonal, params: ParameterVector
) -> tuple[float, np.ndarray]:
    """Energy and its analytic gradient from one forward and one reverse sweep.

    Reverse sweep over the gate sequence: with psi_j the state after gate j
    and phi_j the cost operator applied to the final state pulled back
    through the later gates, each derivative is 2 Im <phi_j| H_j |psi_j>.
    """
    p = params.p
    if p < 1:
        raise ValueError("gradient requires depth p >= 1")
    # forward pass, keeping each layer's phase diagonal for the reverse sweep
    psi = plus_state(cost.num_qubits)
    phases = []
    for k in range(p):
        phases.append(np.exp(-1j * params.gammas[k] * cost.values))
        psi = _mixer_unchecked(psi * phases[k], params.betas[k])
    lam = cost.values * psi
    e = float(np.vdot(psi, lam).real)
    grad = np.zeros(2 * p)
    for k in range(p - 1, -1, -1):
        # mixer gate of layer k+1
        grad[k] = 2.0 * np.vdot(lam, apply_mixer_hamiltonian(psi)).imag
        psi = _mixer_unchecked(psi, -params.betas[k])
        lam = _mixer_unchecked(lam, -params.betas[k])
        # cost gate of layer k+1
        grad[p + k] = 2.0 * np.vdot(lam, cost.values * psi).imag
        psi = psi * np.conj(phases[k])
        lam = lam * np.conj(phases[k])
    return e, grad


def gradient(cost: CostDiagonal, params: ParameterVector) -> np.ndarray:
    """Analytic gradient of the energy, flat layout (d/dbeta; d/dgamma)."""
    return energy_and_gradient(cost, params)[1]


def gradient_inf_norm(cost: CostDiagonal, params: ParameterVector) -> float:
    return float(np.max(np.abs(gradient(cost, params))))


def is_stationary(
    cost: CostDiagonal, params: ParameterVector, tol: float = STATIONARY_TOL
) -> bool:
    return gradient_inf_norm(cost, params) <= tol


def hessian(
    cost: CostDiagonal, params: ParameterVector, step: float = HESSIAN_FD_STEP
) -> HessianMatrix:
    """Central finite differences of the analytic gradient, symmetrized."""
    flat = params.flat()
    dim = flat.size
    h = np.zeros((dim, dim))
    for j in range(dim):
        shift = np.zeros(dim)
        shift[j] = step
        gp = gradient(cost, ParameterVector.from_flat(flat + shift))
        gm = gradient(cost, ParameterVector.from_flat(flat - shift))
        h[:, j] = (gp - gm) / (2.0 * step)
    return HessianMatrix(entries=(h + h.T) / 2.0, origin=params.copy())


def hessian_entry(
    cost: CostDiagonal,
    params: ParameterVector,
    row: int,
    col: int,
    step: float = 1e-3,
) -> float:
    """Single mixed second derivative from the analytic gradient.

    Central differences at two step sizes combined by Richardson
    extrapolation, accurate to ~1e-9 absolute on unit-scale landscapes.
    """
    flat = params.flat()

    def central(h):
        shift = np.zeros(flat.size)
        shift[col] = h
        gp = gradient(cost, ParameterVector.from_flat(flat + shift))
        gm = gradient(cost, ParameterVector.from_flat(flat - shift))
        return (gp[row] - gm[row]) / (2.0 * h)

    return float((4.0 * central(step / 2.0) - central(step)) / 3.0)


# ---------------------------------------------------------------------------
# curvature scalars
# ---------------------------------------------------------------------------

@dataclass
class CurvatureScalar:
    """Value of a curvature scalar plus its stationarity diagnostics."""

    value: float
    imag_part: float
    stationary: bool


def _heisenberg_cost_on(
    cost: CostDiagonal, params: ParameterVector, psi: np.ndarray
) -> np.ndarray:
    """Apply U^dagger H_C U to a state."""
    return apply_circuit_inverse(
        cost.values * apply_circuit(psi, cost, params), cost, params
    )


def scalar_b(
    cost: CostDiagonal, min_params: ParameterVector, check_stationary: bool = True
) -> CurvatureScalar:
    """Curvature scalar of the first-layer insertion: 8 Re<+| H_C U^ H_C U |+>.

    The imaginary part of the bracket is proportional to a gradient component
    and must vanish at a stationary point; it is exposed as a diagnostic.
    """
    plus = plus_state(cost.num_qubits)
    bracket = complex(
        np.vdot(cost.values * plus, _heisenberg_cost_on(cost, min_params, plus))
    )
    stationary = True
    if check_stationary:
        stationary = is_stationary(cost, min_params)
    return CurvatureScalar(
        value=8.0 * bracket.real, imag_part=8.0 * bracket.imag, stationary=stationary
    )


def scalar_b_nested_commutator(
    cost: CostDiagonal, min_params: ParameterVector
) -> float:
    """Same scalar through the nested commutator <+|[H_C,[H_B, U^ H_C U]]|+>,
    evaluated by explicit operator application."""
    plus = plus_state(cost.num_qubits)

    def heis(v):
        return _heisenberg_cost_on(cost, min_params, v)

    def comm_b(v):  # [H_B, U^ H_C U] v
        return apply_mixer_hamiltonian(heis(v)) - heis(apply_mixer_hamiltonian(v))

    res = cost.values * comm_b(plus) - comm_b(cost.values * plus)
    return float(np.vdot(plus, res).real)


def scalar_b_last(cost: CostDiagonal, min_params: ParameterVector) -> float:
    """Curvature scalar of the last-layer insertion:
    2 Re <m| H_C [H_B, H_C] |m> with |m> the prepared circuit state."""
    m = prepare_qaoa_state(cost, min_params)
    comm = apply_mixer_hamiltonian(cost.values * m) - cost.values * apply_mixer_hamiltonian(m)
    return 2.0 * float(np.vdot(cost.values * m, comm).real)


def scalar_b_bar(
    cost: CostDiagonal,
    min_params: ParameterVector,
    layer: int,
    method: str = "commutator",
) -> float:
    """Curvature scalar b-bar of a symmetric interior insertion at `layer`.

    Defined as the mixed second derivative at the inserted pair of the
    saddle configuration minus the (beta_{l-1}, gamma_l) entry at the
    minimum. The commutator path evaluates the equivalent statevector
    contraction 2 Re <m| H_C U_{>=l} [H_C, H_B] |w>; the hessian path takes
    finite differences of the analytic gradient. Both agree to ~1e-8.
    """
    p = min_params.p
    if not 2 <= layer <= p:
        raise ValueError(f"symmetric interior insertion needs 2 <= layer <= {p}")
    if method == "commutator":
        head = ParameterVector(min_params.betas[: layer - 1], min_params.gammas[: layer - 1])
        tail = ParameterVector(min_params.betas[layer - 1 :], min_params.gammas[layer - 1 :])
        w = apply_circuit(plus_state(cost.num_qubits), cost, head)
        comm = cost.values * apply_mixer_hamiltonian(w) - apply_mixer_hamiltonian(
            cost.values * w
        )
        m = apply_circuit(w, cost, tail)
        return 2.0 * float(np.vdot(cost.values * m, apply_circuit(comm, cost, tail)).real)
    if method == "hessian":
        ts = min_params.insert_zeros(layer, layer)
        entry_ts = hessian_entry(cost, ts, layer - 1, (p + 1) + layer - 1)
        entry_min = hessian_entry(cost, min_params, layer - 2, p + layer - 1)
        return entry_ts - entry_min
    raise ValueError(f"unknown method {method!r}")


def scalar_b_bar_staggered(
    cost: CostDiagonal, min_params: ParameterVector, layer: int
) -> float:
    """Curvature scalar of the staggered insertion (beta slot l, gamma slot l+1):
    -2 Re <m| H_C V [H_C, H_B] |v> with the cut placed between the cost and
    mixer gates of layer l."""
    p = min_params.p
    if not 1 <= layer <= p:
        raise ValueError(f"staggered insertion needs 1 <= layer <= {p}")
    head = ParameterVector(min_params.betas[: layer - 1], min_params.gammas[: layer - 1])
    v = apply_circuit(plus_state(cost.num_qubits), cost, head)
    v = v * np.exp(-1j * min_params.gammas[layer - 1] * cost.values)
    comm = cost.values * apply_mixer_hamiltonian(v) - apply_mixer_hamiltonian(
        cost.values * v
    )

    def rest(x):  # mixer of layer l, then layers l+1..p
        x = _mixer_unchecked(x, min_params.betas[layer - 1])
        tail = ParameterVector(min_params.betas[layer:], min_params.gammas[layer:])
        return apply_circuit(x, cost, tail)

    m = rest(v)
    return -2.0 * float(np.vdot(cost.values * m, rest(comm)).real)


# ---------------------------------------------------------------------------
# quartic coefficient and curvature decomposition
# ---------------------------------------------------------------------------

@dataclass
class QuarticCoefficient:
    """Second derivative along the inserted cost angle at the first-layer
    saddle, exact and in its plateau approximation."""

    exact: float
    approx: float


def quartic_coefficient(
    cost: CostDiagonal, min_params: ParameterVector
) -> QuarticCoefficient:
    """Exact value 2<+|H_C U^ H_C U H_C|+> - 2 Re<+|U^ H_C U H_C^2|+> and the
    approximation that replaces H_C^2 by its identity component n_c."""
    plus = plus_state(cost.num_qubits)
    omega = apply_circuit(plus, cost, min_params)
    chi = apply_circuit(cost.values * plus, cost, min_params)
    term1 = float(np.sum(cost.values * (chi.real**2 + chi.imag**2)))
    y = apply_circuit(cost.values**2 * plus, cost, min_params)
    term2 = float(np.vdot(omega, cost.values * y).real)
    e_min = float(np.sum(cost.values * (omega.real**2 + omega.imag**2)))
    return QuarticCoefficient(
        exact=2.0 * term1 - 2.0 * term2,
        approx=2.0 * term1 - 2.0 * cost.n_c * e_min,
    )


def curvature_decomposition_from_states(
    cost: CostDiagonal,
    evolved_plus: np.ndarray,
    evolved_excited: np.ndarray,
    reference_index: int | None = None,
) -> CurvatureDecomposition:
    """Decompose the two curvature states against one cost eigenstate.

    `evolved_plus` is U|+> and `evolved_excited` is U H_C |+> (squared norm
    n_c). The reference defaults to the smallest-index ground state; the
    result is flagged ambiguous when the ground energy is attained by more
    basis states than the universal spin-flip pair.
    """
    ref = cost.ground_index if reference_index is None else reference_index
    ground_count = int(np.sum(np.abs(cost.values - cost.values[ref]) < 1e-12))
    sqrt_nc = np.sqrt(cost.n_c)
    alpha0 = complex(evolved_plus[ref])
    kappa0 = complex(evolved_excited[ref]) / sqrt_nc
    alpha_perp = float(np.sqrt(max(1.0 - abs(alpha0) ** 2, 0.0)))
    kappa_perp = float(np.sqrt(max(1.0 - abs(kappa0) ** 2, 0.0)))
    e_ref = float(cost.values[ref])
    if alpha_perp < 1e-14 or kappa_perp < 1e-14:
        return CurvatureDecomposition(
            alpha0=alpha0,
            alpha_perp=alpha_perp,
            kappa0=kappa0,
            kappa_perp=kappa_perp,
            matrix_element=0.0 + 0.0j,
            reconstructed_curvature=0.0,
            reference_index=ref,
            ambiguous=ground_count > 2,
        )
    psi0 = evolved_plus.copy()
    psi0[ref] -= alpha0
    psi0 /= alpha_perp
    phi0 = evolved_excited / sqrt_nc
    phi0[ref] -= kappa0
    phi0 /= kappa_perp
    matrix_element = complex(np.vdot(phi0, (cost.values - e_ref) * psi0))
    reconstructed = (
        4.0 * np.sqrt(2.0) * sqrt_nc * alpha_perp * kappa_perp * abs(matrix_element)
    )
    return CurvatureDecomposition(
        alpha0=alpha0,
        alpha_perp=alpha_perp,
        kappa0=kappa0,
        kappa_perp=kappa_perp,
        matrix_element=matrix_element,
        reconstructed_curvature=float(reconstructed),
        reference_index=ref,
        ambiguous=ground_count > 2,
    )


def curvature_decomposition(
    cost: CostDiagonal,
    min_params: ParameterVector,
    reference_index: int | None = None,
) -> CurvatureDecomposition:
    """Build U|+> and U H_C|+> for the given angles and decompose them."""
    plus = plus_state(cost.num_qubits)
    return curvature_decomposition_from_states(
        cost,
        apply_circuit(plus, cost, min_params),
        apply_circuit(cost.values * plus, cost, min_params),
        reference_index=reference_index,
    )
