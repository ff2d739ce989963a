"""Statevector engine: gate actions, spectra, norms, and dense-oracle checks."""

import numpy as np
import pytest

from qls.graphs import ProblemGraph, build_cost_diagonal, generate_regular_graph
from qls.statevector import (
    NormalizationError,
    ParameterVector,
    apply_circuit,
    apply_cost_operator,
    apply_cost_phase,
    apply_mixer,
    apply_mixer_hamiltonian,
    energy,
    energy_variance,
    plus_state,
    prepare_qaoa_state,
)
from qls.graphs import ResourceLimitError

from oracles import dense_qaoa_state


def random_state(n, seed):
    rng = np.random.default_rng(seed)
    psi = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return psi / np.linalg.norm(psi)


class TestPlusState:
    def test_one_qubit(self):
        np.testing.assert_allclose(plus_state(1), [2**-0.5, 2**-0.5])

    def test_two_qubits(self):
        np.testing.assert_allclose(plus_state(2), [0.5, 0.5, 0.5, 0.5])

    def test_cost_expectation_vanishes(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=0))
        assert abs(energy(cost, plus_state(8))) < 1e-12

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            plus_state(25)


class TestCostPhase:
    def test_zero_angle_is_identity(self):
        cost = build_cost_diagonal(generate_regular_graph(6, 3, seed=0))
        psi = random_state(6, 1)
        np.testing.assert_allclose(apply_cost_phase(psi, cost, 0.0), psi)

    def test_two_pi_is_identity_on_integer_spectrum(self):
        cost = build_cost_diagonal(generate_regular_graph(6, 3, seed=0))
        psi = random_state(6, 2)
        np.testing.assert_allclose(
            apply_cost_phase(psi, cost, 2 * np.pi), psi, atol=1e-12
        )

    def test_single_edge_quarter_period(self):
        cost = build_cost_diagonal(ProblemGraph(2, ((0, 1, 1.0),)))
        out = apply_cost_phase(plus_state(2), cost, np.pi / 2)
        expected = np.array([-1j, 1j, 1j, -1j]) / 2
        np.testing.assert_allclose(out, expected, atol=1e-14)

    def test_dimension_mismatch(self):
        cost = build_cost_diagonal(ProblemGraph(2, ((0, 1, 1.0),)))
        with pytest.raises(ValueError):
            apply_cost_phase(plus_state(3), cost, 0.1)

    def test_norm_contract_enforced(self):
        cost = build_cost_diagonal(ProblemGraph(2, ((0, 1, 1.0),)))
        with pytest.raises(NormalizationError):
            apply_cost_phase(2.0 * plus_state(2), cost, 0.1)


class TestMixer:
    def test_zero_angle_is_identity(self):
        psi = random_state(5, 3)
        np.testing.assert_allclose(apply_mixer(psi, 0.0), psi)

    def test_plus_state_is_eigenstate(self):
        n = 5
        out = apply_mixer(plus_state(n), np.pi / 2)
        np.testing.assert_allclose(out, 1j**n * plus_state(n), atol=1e-14)

    def test_half_period_flips_all_bits(self):
        n = 4
        psi = np.zeros(1 << n, dtype=complex)
        psi[0] = 1.0
        out = apply_mixer(psi, np.pi / 2)
        expected = np.zeros(1 << n, dtype=complex)
        expected[-1] = 1j**n
        np.testing.assert_allclose(out, expected, atol=1e-14)

    def test_angles_add(self):
        psi = random_state(6, 4)
        one_shot = apply_mixer(psi, 0.7)
        two_shot = apply_mixer(apply_mixer(psi, 0.3), 0.4)
        np.testing.assert_allclose(one_shot, two_shot, atol=1e-12)


class TestMixerHamiltonian:
    def test_plus_is_ground_state(self):
        n = 7
        np.testing.assert_allclose(
            apply_mixer_hamiltonian(plus_state(n)), -n * plus_state(n), atol=1e-12
        )

    def test_cost_excited_eigenstate(self):
        # H_C|+> lives in the two-flip sector of the mixer: eigenvalue -N+4
        g = generate_regular_graph(8, 3, seed=2)
        cost = build_cost_diagonal(g)
        excited = apply_cost_operator(plus_state(8), cost)
        np.testing.assert_allclose(
            apply_mixer_hamiltonian(excited), (-8 + 4) * excited, atol=1e-12
        )


class TestPrepareQaoaState:
    def test_depth_zero_is_plus(self):
        cost = build_cost_diagonal(generate_regular_graph(6, 3, seed=0))
        out = prepare_qaoa_state(cost, ParameterVector.zeros(0))
        np.testing.assert_allclose(out, plus_state(6))

    def test_zero_angles_give_plus(self):
        cost = build_cost_diagonal(generate_regular_graph(6, 3, seed=0))
        out = prepare_qaoa_state(cost, ParameterVector.zeros(4))
        np.testing.assert_allclose(out, plus_state(6), atol=1e-14)

    def test_single_edge_depth_one_matches_dense_oracle(self):
        g = ProblemGraph(2, ((0, 1, 1.0),))
        cost = build_cost_diagonal(g)
        rng = np.random.default_rng(0)
        for _ in range(5):
            beta, gamma = rng.uniform(-np.pi, np.pi, size=2)
            psi = prepare_qaoa_state(cost, ParameterVector([beta], [gamma]))
            oracle = dense_qaoa_state(g, [beta], [gamma])
            assert abs(energy(cost, psi) - oracle.conj() @ (cost.values * oracle)) < 1e-12

    def test_matches_dense_oracle_up_to_six_qubits(self):
        rng = np.random.default_rng(5)
        for n in range(2, 7):
            g = generate_regular_graph(n, 2, seed=1) if n > 3 else ProblemGraph(
                n, tuple((i, i + 1, 1.0) for i in range(n - 1))
            )
            cost = build_cost_diagonal(g)
            params = ParameterVector(rng.normal(size=3), rng.normal(size=3))
            psi = prepare_qaoa_state(cost, params)
            oracle = dense_qaoa_state(g, params.betas, params.gammas)
            assert np.max(np.abs(psi - oracle)) < 1e-10


class TestEnergyAndVariance:
    def test_plus_energy_zero(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
        assert abs(energy(cost, plus_state(8))) < 1e-12

    def test_ground_basis_state(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
        psi = np.zeros(cost.dim, dtype=complex)
        psi[cost.ground_index] = 1.0
        assert energy(cost, psi) == cost.ground_energy
        assert energy_variance(cost, psi) == 0.0

    def test_random_state_matches_dense_quadratic_form(self):
        g = generate_regular_graph(8, 3, seed=4)
        cost = build_cost_diagonal(g)
        for seed in range(5):
            psi = random_state(8, seed)
            direct = float((psi.conj() * cost.values * psi).sum().real)
            assert abs(energy(cost, psi) - direct) < 1e-12

    def test_plus_variance_equals_nc(self):
        for seed in range(3):
            g = generate_regular_graph(10, 3, weighted=True, seed=seed)
            cost = build_cost_diagonal(g)
            assert abs(energy_variance(cost, plus_state(10)) - cost.n_c) < 1e-10

    def test_variance_nonnegative(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
        for seed in range(10):
            assert energy_variance(cost, random_state(8, seed)) >= 0.0


class TestApplyCostOperator:
    def test_squared_norm_on_plus_is_nc(self):
        g = generate_regular_graph(10, 3, weighted=True, seed=2)
        cost = build_cost_diagonal(g)
        out = apply_cost_operator(plus_state(10), cost)
        assert abs(np.vdot(out, out).real - cost.n_c) < 1e-12

    def test_double_application_overlap(self):
        g = generate_regular_graph(10, 3, seed=2)
        cost = build_cost_diagonal(g)
        plus = plus_state(10)
        twice = apply_cost_operator(apply_cost_operator(plus, cost), cost)
        assert abs(np.vdot(plus, twice).real - cost.n_c) < 1e-12

    def test_plus_expectation_vanishes(self):
        g = generate_regular_graph(10, 3, seed=2)
        cost = build_cost_diagonal(g)
        plus = plus_state(10)
        assert abs(np.vdot(plus, apply_cost_operator(plus, cost))) < 1e-12


class TestNormPreservation:
    def test_thousand_random_layers(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=5))
        rng = np.random.default_rng(17)
        psi = plus_state(8)
        for _ in range(1000):
            psi = apply_cost_phase(psi, cost, rng.uniform(-np.pi, np.pi))
            psi = apply_mixer(psi, rng.uniform(-np.pi, np.pi))
        assert abs(np.linalg.norm(psi) - 1.0) < 1e-10

    def test_commuting_cost_layers(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, weighted=True, seed=6))
        psi = random_state(8, 8)
        a = apply_cost_phase(apply_cost_phase(psi, cost, 0.3), cost, 0.5)
        b = apply_cost_phase(psi, cost, 0.8)
        np.testing.assert_allclose(a, b, atol=1e-12)


class TestFootnoteIdentity:
    def test_orthogonality_constraint_between_components(self, n8_min_p3):
        # <+|H_C|+> = 0 forces alpha0*conj(kappa0) + a_perp*k_perp*<phi0|psi0> = 0
        graph, cost, params = n8_min_p3
        plus = plus_state(8)
        omega = apply_circuit(plus, cost, params)
        chi = apply_circuit(cost.values * plus, cost, params)
        ref = cost.ground_index
        alpha0 = omega[ref]
        kappa0 = chi[ref] / np.sqrt(cost.n_c)
        a_perp = np.sqrt(1 - abs(alpha0) ** 2)
        k_perp = np.sqrt(1 - abs(kappa0) ** 2)
        psi0 = omega.copy(); psi0[ref] -= alpha0; psi0 /= a_perp
        phi0 = chi / np.sqrt(cost.n_c); phi0[ref] -= kappa0; phi0 /= k_perp
        identity = alpha0 * np.conj(kappa0) + a_perp * k_perp * np.vdot(phi0, psi0)
        assert abs(identity) < 1e-10
