"""Matrix-free N-qubit statevector engine for the alternating-operator ansatz.

States are plain complex128 numpy arrays of length 2^N indexed little-endian
(qubit i is bit i). The circuit prepares

    prod_{k=1..p} exp(-i beta_k H_B) exp(-i gamma_k H_C) |+>

with layer 1 applied first, H_C the diagonal Ising cost and
H_B = -sum_i sigma^x_i, so |+> is the H_B ground state at eigenvalue -N.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .graphs import MAX_QUBITS, CostDiagonal, ResourceLimitError

NORM_TOL = 1e-10

try:  # optional JIT for the two stride-sweep kernels (pure-numpy fallback below)
    if os.environ.get("QLS_NO_NUMBA"):
        raise ImportError
    from numba import njit

    @njit(cache=True)
    def _mixer_sweep(arr, n, c, s):
        for q in range(n):
            step = 1 << q
            for base in range(0, arr.size, 2 * step):
                for off in range(base, base + step):
                    a0 = arr[off]
                    a1 = arr[off + step]
                    arr[off] = c * a0 + s * a1
                    arr[off + step] = s * a0 + c * a1

    @njit(cache=True)
    def _hb_sweep(src, out, n):
        for q in range(n):
            step = 1 << q
            for base in range(0, src.size, 2 * step):
                for off in range(base, base + step):
                    out[off] -= src[off + step]
                    out[off + step] -= src[off]

    _HAVE_NUMBA = True
except ImportError:
    _HAVE_NUMBA = False

    def _mixer_sweep(arr, n, c, s):
        for q in range(n):
            view = arr.reshape(1 << (n - 1 - q), 2, 1 << q)
            a0 = view[:, 0, :].copy()
            view[:, 0, :] = c * a0 + s * view[:, 1, :]
            view[:, 1, :] = s * a0 + c * view[:, 1, :]

    def _hb_sweep(src, out, n):
        for q in range(n):
            view = src.reshape(1 << (n - 1 - q), 2, 1 << q)
            acc = out.reshape(1 << (n - 1 - q), 2, 1 << q)
            acc[:, 0, :] -= view[:, 1, :]
            acc[:, 1, :] -= view[:, 0, :]


class NormalizationError(RuntimeError):
    """Raised when an operation that promises unit norm violates it."""


@dataclass
class ParameterVector:
    """Ordered variational angles (beta_1..beta_p; gamma_1..gamma_p).

    The flat layout puts all betas first: flat[k] = beta_{k+1} for k < p and
    flat[p + k] = gamma_{k+1}.
    """

    betas: np.ndarray
    gammas: np.ndarray

    def __post_init__(self):
        self.betas = np.atleast_1d(np.asarray(self.betas, dtype=float))
        self.gammas = np.atleast_1d(np.asarray(self.gammas, dtype=float))
        if self.betas.shape != self.gammas.shape or self.betas.ndim != 1:
            raise ValueError("betas and gammas must be 1-d arrays of equal length")

    @property
    def p(self) -> int:
        return self.betas.size

    def flat(self) -> np.ndarray:
        return np.concatenate([self.betas, self.gammas])

    @classmethod
    def from_flat(cls, flat: np.ndarray) -> "ParameterVector":
        flat = np.asarray(flat, dtype=float)
        if flat.size % 2 != 0:
            raise ValueError("flat parameter vector must have even length")
        p = flat.size // 2
        return cls(flat[:p].copy(), flat[p:].copy())

    @classmethod
    def zeros(cls, p: int) -> "ParameterVector":
        return cls(np.zeros(p), np.zeros(p))

    def copy(self) -> "ParameterVector":
        return ParameterVector(self.betas.copy(), self.gammas.copy())

    def insert_zeros(self, beta_slot: int, gamma_slot: int) -> "ParameterVector":
        """Return a depth-(p+1) vector with zero angles inserted at the given
        1-based slots of each block, all other angles preserved in order."""
        if not (1 <= beta_slot <= self.p + 1 and 1 <= gamma_slot <= self.p + 1):
            raise ValueError("insertion slot out of range")
        return ParameterVector(
            np.insert(self.betas, beta_slot - 1, 0.0),
            np.insert(self.gammas, gamma_slot - 1, 0.0),
        )


def num_qubits_of(psi: np.ndarray) -> int:
    n = int(psi.size).bit_length() - 1
    if 1 << n != psi.size:
        raise ValueError("statevector length is not a power of two")
    return n


def _check_norm(psi: np.ndarray) -> np.ndarray:
    nrm2 = float(np.vdot(psi, psi).real)
    if not np.isfinite(nrm2) or abs(nrm2 - 1.0) > NORM_TOL:
        raise NormalizationError(f"norm^2 deviates from 1 by {nrm2 - 1.0:.3e}")
    return psi


def plus_state(n: int, max_qubits: int = MAX_QUBITS) -> np.ndarray:
    """Equal superposition of all 2^n basis states."""
    if not 1 <= n <= max_qubits:
        raise ResourceLimitError(f"{n} qubits outside supported range [1, {max_qubits}]")
    return np.full(1 << n, 2.0 ** (-n / 2), dtype=complex)


def apply_cost_phase(psi: np.ndarray, cost: CostDiagonal, gamma: float) -> np.ndarray:
    """Apply exp(-i * gamma * H_C) through the precomputed diagonal."""
    if psi.size != cost.dim:
        raise ValueError("statevector and cost diagonal dimensions differ")
    return _check_norm(psi * np.exp(-1j * gamma * cost.values))


def apply_mixer(psi: np.ndarray, beta: float) -> np.ndarray:
    """Apply exp(-i * beta * H_B) as N single-qubit stride sweeps.

    With H_B = -sum sigma^x this is a product of (cos b * 1 + i sin b * sx)
    rotations, one per qubit.
    """
    out = psi.astype(complex, copy=True)
    _mixer_sweep(out, num_qubits_of(psi), complex(np.cos(beta)), 1j * np.sin(beta))
    return _check_norm(out)


def apply_mixer_hamiltonian(psi: np.ndarray) -> np.ndarray:
    """Apply H_B = -sum sigma^x (unnormalized output)."""
    out = np.zeros_like(psi)
    _hb_sweep(psi, out, num_qubits_of(psi))
    return out


def apply_circuit(
    psi: np.ndarray, cost: CostDiagonal, params: ParameterVector
) -> np.ndarray:
    """Apply the full alternating circuit U(params) to an arbitrary state."""
    if psi.size != cost.dim:
        raise ValueError("statevector and cost diagonal dimensions differ")
    out = psi
    for k in range(params.p):
        out = out * np.exp(-1j * params.gammas[k] * cost.values)
        out = _mixer_unchecked(out, params.betas[k])
    return out


def apply_circuit_inverse(
    psi: np.ndarray, cost: CostDiagonal, params: ParameterVector
) -> np.ndarray:
    """Apply U(params)^dagger to an arbitrary state."""
    if psi.size != cost.dim:
        raise ValueError("statevector and cost diagonal dimensions differ")
    out = psi
    for k in range(params.p - 1, -1, -1):
        out = _mixer_unchecked(out, -params.betas[k])
        out = out * np.exp(1j * params.gammas[k] * cost.values)
    return out


def _mixer_unchecked(psi: np.ndarray, beta: float) -> np.ndarray:
    out = psi.astype(complex, copy=True)
    _mixer_sweep(out, num_qubits_of(psi), complex(np.cos(beta)), 1j * np.sin(beta))
    return out


def prepare_qaoa_state(cost: CostDiagonal, params: ParameterVector) -> np.ndarray:
    """Prepare U(params)|+> for the given cost operator."""
    return _check_norm(apply_circuit(plus_state(cost.num_qubits), cost, params))


def energy(cost: CostDiagonal, psi: np.ndarray) -> float:
    """Expectation value of the cost diagonal: sum_z values[z] * |psi[z]|^2."""
    if psi.size != cost.dim:
        raise ValueError("statevector and cost diagonal dimensions differ")
    return float(np.sum(cost.values * (psi.real**2 + psi.imag**2)))


def energy_variance(cost: CostDiagonal, psi: np.ndarray) -> float:
    """<H^2> - <H>^2 in the given state, clamped at zero against round-off."""
    if psi.size != cost.dim:
        raise ValueError("statevector and cost diagonal dimensions differ")
    prob = psi.real**2 + psi.imag**2
    mean = float(np.sum(cost.values * prob))
    second = float(np.sum(cost.values**2 * prob))
    return max(second - mean * mean, 0.0)


def apply_cost_operator(psi: np.ndarray, cost: CostDiagonal) -> np.ndarray:
    """Apply the diagonal cost operator (output is not normalized)."""
    if psi.size != cost.dim:
        raise ValueError("statevector and cost diagonal dimensions differ")
    return cost.values * psi
