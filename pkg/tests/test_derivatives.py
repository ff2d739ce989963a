"""Gradients, Hessians, curvature scalars, and the curvature decomposition."""

import numpy as np
import pytest

from qls.graphs import build_cost_diagonal, generate_regular_graph
from qls.statevector import ParameterVector, plus_state
from qls import derivatives as dv
from qls import transition_states as ts_mod

from oracles import finite_difference_gradient, finite_difference_hessian


def energy_fn(cost):
    return lambda flat: dv.energy_of(cost, ParameterVector.from_flat(flat))


class TestGradient:
    def test_zero_angles_give_zero_gradient(self):
        # |+> is a mixer eigenstate and <+|H_C|+> = 0, so all derivatives vanish
        for p in (1, 3, 5):
            cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
            grad = dv.gradient(cost, ParameterVector.zeros(p))
            np.testing.assert_allclose(grad, 0.0, atol=1e-12)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for seed in range(3):
            cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=seed))
            for p in (2, 3):
                flat = rng.uniform(-1.5, 1.5, size=2 * p)
                grad = dv.gradient(cost, ParameterVector.from_flat(flat))
                fd = finite_difference_gradient(energy_fn(cost), flat)
                assert np.max(np.abs(grad - fd)) <= 1e-5 * max(np.max(np.abs(fd)), 1e-3)

    def test_converged_minimum_has_tiny_gradient(self, n8_min_p3):
        _, cost, params = n8_min_p3
        assert dv.gradient_inf_norm(cost, params) <= 1e-9

    def test_energy_and_gradient_consistent(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
        params = ParameterVector([0.3, -0.2], [0.4, 0.1])
        e, g = dv.energy_and_gradient(cost, params)
        assert e == pytest.approx(dv.energy_of(cost, params), abs=1e-14)
        np.testing.assert_array_equal(g, dv.gradient(cost, params))


class TestHessian:
    def test_symmetry(self):
        cost = build_cost_diagonal(generate_regular_graph(6, 3, seed=2))
        rng = np.random.default_rng(0)
        params = ParameterVector(rng.normal(size=2), rng.normal(size=2))
        h = dv.hessian(cost, params).entries
        assert np.max(np.abs(h - h.T)) < 1e-8 * max(np.max(np.abs(h)), 1.0)

    def test_matches_direct_second_differences(self):
        cost = build_cost_diagonal(generate_regular_graph(6, 3, seed=2))
        rng = np.random.default_rng(3)
        flat = rng.uniform(-1.0, 1.0, size=4)
        h = dv.hessian(cost, ParameterVector.from_flat(flat)).entries
        fd = finite_difference_hessian(energy_fn(cost), flat)
        assert np.max(np.abs(h - fd)) < 1e-4

    def test_positive_definite_at_minimum(self, n8_min_p3):
        _, cost, params = n8_min_p3
        h = dv.hessian(cost, params)
        assert h.num_negative() == 0
        assert np.linalg.eigvalsh(h.entries)[0] > 0

    def test_unique_negative_eigenvalue_at_saddle(self, n8_min_p3):
        _, cost, params = n8_min_p3
        ts = ts_mod.construct_ts(params, ts_mod.TsIndex(1, 1))
        assert dv.hessian(cost, ts).num_negative() == 1

    def test_single_entry_matches_full_matrix(self, n8_min_p3):
        _, cost, params = n8_min_p3
        h = dv.hessian(cost, params).entries
        assert dv.hessian_entry(cost, params, 1, 4) == pytest.approx(h[1, 4], abs=1e-7)


class TestScalarB:
    def test_identity_circuit_gives_8nc(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, weighted=True, seed=4))
        b = dv.scalar_b(cost, ParameterVector.zeros(0), check_stationary=False)
        assert b.value == pytest.approx(8.0 * cost.n_c, rel=1e-12)

    def test_nested_commutator_equals_simplified_form(self, n8_min_p3):
        _, cost, params = n8_min_p3
        b = dv.scalar_b(cost, params)
        nested = dv.scalar_b_nested_commutator(cost, params)
        assert abs(b.value - nested) <= 1e-10 * abs(b.value)
        assert b.stationary

    def test_imaginary_part_vanishes_at_stationary_point(self, n8_min_p3):
        _, cost, params = n8_min_p3
        assert abs(dv.scalar_b(cost, params).imag_part) < 1e-7

    def test_nonstationary_input_is_flagged(self):
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
        b = dv.scalar_b(cost, ParameterVector([0.3], [0.7]))
        assert not b.stationary

    def test_saddle_hessian_cross_entry_is_minus_b(self, n8_min_p3):
        # with the layer-1-first gate ordering used here, the mixed second
        # derivative at the inserted pair carries the opposite sign of the
        # contraction 8 Re<+|H_C U^ H_C U|+>
        _, cost, params = n8_min_p3
        b = dv.scalar_b(cost, params).value
        ts = ts_mod.construct_ts(params, ts_mod.TsIndex(1, 1))
        entry = dv.hessian_entry(cost, ts, 0, params.p + 1)
        assert entry == pytest.approx(-b, rel=1e-7)


class TestScalarBBar:
    def test_dual_paths_agree(self, n10_min_p3):
        _, cost, params = n10_min_p3
        for layer in (2, 3):
            comm = dv.scalar_b_bar(cost, params, layer, method="commutator")
            hess = dv.scalar_b_bar(cost, params, layer, method="hessian")
            assert abs(comm - hess) < 1e-8

    def test_staggered_scalar_matches_hessian_entries(self, n10_min_p3):
        _, cost, params = n10_min_p3
        p = params.p
        for layer in (1, 2, 3):
            comm = dv.scalar_b_bar_staggered(cost, params, layer)
            ts = ts_mod.construct_ts(params, ts_mod.TsIndex(layer, layer + 1))
            entry_ts = dv.hessian_entry(cost, ts, layer - 1, (p + 1) + layer)
            entry_min = dv.hessian_entry(cost, params, layer - 1, p + layer - 1)
            assert abs(comm - (entry_ts - entry_min)) < 1e-8

    def test_layer_bounds_enforced(self, n10_min_p3):
        _, cost, params = n10_min_p3
        with pytest.raises(ValueError):
            dv.scalar_b_bar(cost, params, 1)
        with pytest.raises(ValueError):
            dv.scalar_b_bar(cost, params, params.p + 1)


class TestQuarticCoefficient:
    def test_matches_finite_difference_at_saddle(self, n10_min_p3):
        _, cost, params = n10_min_p3
        qc = dv.quartic_coefficient(cost, params)
        ts = ts_mod.construct_ts(params, ts_mod.TsIndex(1, 1))
        flat = ts.flat()
        shift = np.zeros(flat.size)
        shift[params.p + 1] = 1e-4  # the inserted cost angle
        f = energy_fn(cost)
        fd = (f(flat + shift) - 2 * f(flat) + f(flat - shift)) / 1e-8
        assert abs(qc.exact - fd) <= 1e-6 * abs(fd)

    def test_equals_minimum_hessian_diagonal(self, n10_min_p3):
        # the inserted cost gate commutes with the adjacent first-layer cost
        # gate, so this second derivative is also a diagonal entry at the min
        _, cost, params = n10_min_p3
        qc = dv.quartic_coefficient(cost, params)
        h = dv.hessian(cost, params).entries
        assert qc.exact == pytest.approx(h[params.p, params.p], rel=1e-7)

    def test_positive_on_converged_minima(self, n8_min_p3, n10_min_p3):
        for _, cost, params in (n8_min_p3, n10_min_p3):
            assert dv.quartic_coefficient(cost, params).exact > 0


class TestCurvatureDecomposition:
    def test_component_normalization(self, n10_min_p3):
        _, cost, params = n10_min_p3
        dec = dv.curvature_decomposition(cost, params)
        assert abs(abs(dec.alpha0) ** 2 + dec.alpha_perp**2 - 1.0) < 1e-10
        assert abs(abs(dec.kappa0) ** 2 + dec.kappa_perp**2 - 1.0) < 1e-10

    def test_reconstruction_equals_curvature_scale(self, n8_min_p3, n10_min_p3):
        for _, cost, params in (n8_min_p3, n10_min_p3):
            dec = dv.curvature_decomposition(cost, params)
            target = abs(dv.scalar_b(cost, params).value) / np.sqrt(2.0)
            assert abs(dec.reconstructed_curvature - target) <= 1e-8 * target

    def test_eigenstate_limit_vanishes(self):
        # synthetic diagnostic: evolved state already a cost eigenstate
        cost = build_cost_diagonal(generate_regular_graph(8, 3, seed=1))
        basis = np.zeros(cost.dim, dtype=complex)
        basis[cost.ground_index] = 1.0
        excited = cost.values * plus_state(8)
        dec = dv.curvature_decomposition_from_states(cost, basis, excited)
        assert dec.alpha_perp == 0.0
        assert dec.reconstructed_curvature == 0.0

    def test_any_reference_eigenstate_reconstructs(self, n10_min_p3):
        _, cost, params = n10_min_p3
        target = abs(dv.scalar_b(cost, params).value) / np.sqrt(2.0)
        for ref in (cost.ground_index, 0, 37):
            dec = dv.curvature_decomposition(cost, params, reference_index=ref)
            assert abs(dec.reconstructed_curvature - target) <= 1e-8 * target

    def test_ambiguity_flag_tracks_extra_degeneracy(self, n8_min_p3, n10_min_p3):
        # the global spin-flip partner always degenerates with the ground
        # state; only degeneracy beyond that pair raises the flag
        for _, cost, params in (n8_min_p3, n10_min_p3):
            ground_count = int(np.sum(cost.values == cost.ground_energy))
            dec = dv.curvature_decomposition(cost, params)
            assert ground_count >= 2
            assert dec.ambiguous == (ground_count > 2)
