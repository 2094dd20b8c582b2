import numpy as np
import pytest

from resilientobs.errors import UnsupportedSubsetError
from resilientobs.inversion import (
    SubsetIndex,
    check_redundant_observability,
    estimate_lip_lower,
    estimate_lip_upper,
    left_inverse_for,
    psi_eval,
    saturate,
)
from resilientobs.model import PlantModel, phi_eval, sample_state_box

X0 = np.array([0.1, 0.2, -0.1])


class TestSaturate:
    def test_interior_point_unchanged(self):
        np.testing.assert_array_equal(saturate(np.array([0.1, -0.2]), 0.5), [0.1, -0.2])

    def test_both_clamped(self):
        np.testing.assert_array_equal(saturate(np.array([3.0, -7.0]), 2.0), [2.0, -2.0])

    def test_boundary_fixed_point(self):
        np.testing.assert_array_equal(saturate(np.array([2.0, 1.0]), 2.0), [2.0, 1.0])

    def test_nonpositive_radius(self):
        with pytest.raises(ValueError):
            saturate(np.zeros(2), 0.0)


class TestPsiEval:
    def test_left_inverse_identity_single_point(self, model, inverses):
        zI = phi_eval(model, (2, 3, 4), X0)
        np.testing.assert_allclose(psi_eval(inverses[(2, 3, 4)], zI), X0, atol=1e-12)

    def test_perturbed_input_stays_lipschitz_close(self, model, inverses):
        inv = inverses[(1, 2, 3)]
        zI = phi_eval(model, (1, 2, 3), X0)
        out = psi_eval(inv, zI + 1e-4)
        assert np.max(np.abs(out - X0)) <= 770.0 * 1e-4

    def test_far_input_lands_in_state_box(self, model, inverses):
        out = psi_eval(inverses[(2, 3, 4)], np.full(5, 1e6))
        assert np.max(np.abs(out)) <= model.M_x

    def test_range_property_random_unbounded_inputs(self, model, inverses):
        rng = np.random.default_rng(2)
        for sub, inv in inverses.items():
            dim = inv.subset.total
            z = rng.uniform(-1e4, 1e4, size=(10_000, dim))
            out = psi_eval(inv, z)
            assert np.max(np.abs(out)) <= model.M_x

    def test_unregistered_subset(self, model):
        with pytest.raises(UnsupportedSubsetError):
            left_inverse_for(model, (1, 4))

    def test_global_lipschitz_via_inner_saturation(self, inverses):
        """Far-out difference quotients never beat the on-box sampled bound."""
        inv = inverses[(2, 3, 4)]
        near = estimate_lip_upper(
            lambda z: psi_eval(inv, z), 5, 2.0, samples=2000, seed=3
        )
        far = estimate_lip_upper(
            lambda z: psi_eval(inv, z), 5, 1000.0, samples=2000, seed=4
        )
        assert far <= near + 1e-6


class TestLipschitzEstimates:
    def test_scaled_identity(self):
        est = estimate_lip_upper(lambda x: 2 * x, 3, 1.0, samples=2000, seed=0)
        assert 1.99 <= est <= 2.0 + 1e-12

    def test_benchmark_phi_below_certified_bound(self, model):
        est = estimate_lip_upper(
            lambda x: phi_eval(model, range(1, 5), x),
            3,
            model.M_x,
            samples=5000,
            seed=1,
        )
        assert est <= 7.0

    def test_saturation_is_one_lipschitz(self):
        est = estimate_lip_upper(lambda x: saturate(x, 1.0), 1, 2.0, samples=2000, seed=2)
        assert est <= 1.0 + 1e-12

    def test_sample_budget_enforced(self):
        with pytest.raises(ValueError):
            estimate_lip_upper(lambda x: x, 2, 1.0, samples=10)

    def test_lower_identity(self):
        m = _model_with_phi([lambda x: x], dims=(2,), n=2)
        est = estimate_lip_lower(m, [1], samples=2000, seed=0)
        assert abs(est - 1.0) <= 1e-12

    def test_lower_benchmark_pair(self, model):
        est = estimate_lip_lower(model, (1, 2), samples=2000, seed=0)
        assert est > 1e-3

    def test_lower_constant_map_degenerate(self):
        m = _model_with_phi([lambda x: np.zeros_like(x)], dims=(2,), n=2)
        est = estimate_lip_lower(m, [1], samples=2000, seed=0)
        assert est <= 1e-6

    def test_monotone_under_subset_projection(self, model):
        # identical pair sets (same model box / samples / seed), so a
        # projection can only shrink the numerator
        for sub in [(1,), (2,), (3,)]:
            small = estimate_lip_lower(model, sub, samples=2000, seed=7)
            big = estimate_lip_lower(model, sub + (4,), samples=2000, seed=7)
            assert small <= big + 1e-15

    def test_lip_estimates_bundle(self, lip):
        assert lip.threshold_coeff == 5391.0
        assert lip.lip_upper_phi <= 7.0
        assert len(lip.lip_lower) == 6
        assert lip.lip_lower_min > 1e-3


class TestRedundancyAudit:
    def test_benchmark_two_redundant(self, model):
        report = check_redundant_observability(model, 2)
        assert report.passed
        assert len(report.entries) == 6
        for e in report.entries:
            assert e.sigma_min > 1e-6
            assert e.lip_lower > 1e-6
            assert e.witness is None

    def test_full_stack_observable(self, model):
        assert check_redundant_observability(model, 0).passed

    def test_duplicated_sensor_fails_with_witness(self):
        m = _model_with_phi(
            [lambda x: x[..., :1], lambda x: x[..., :1]], dims=(1, 1), n=2, p=2
        )
        report = check_redundant_observability(m, 1, grid_per_axis=5)
        assert not report.passed
        failing = [e for e in report.entries if not e.passed]
        assert failing and all(e.witness is not None for e in failing)

    def test_bad_redundancy_degree(self, model):
        for k in (-1, 4):
            with pytest.raises(ValueError):
                check_redundant_observability(model, k)

    def test_report_serializes(self, model):
        d = check_redundant_observability(model, 2, grid_per_axis=5).to_dict()
        assert d["k"] == 2 and d["passed"] and len(d["subsets"]) == 6


def test_subset_index_dims(model):
    sub = SubsetIndex.make(model, (2, 4))
    assert sub.dims == (2, 1) and sub.total == 3


def _model_with_phi(phi, dims, n, p=1):
    return PlantModel(
        name="probe",
        n=n,
        p=p,
        f=lambda x: np.zeros_like(x),
        g=lambda x: np.zeros_like(x),
        h=[lambda x: x[..., 0]] * p,
        input=lambda t: 0.0,
        M_x=0.5,
        dims=dims,
        phi=phi,
        alpha=[lambda z: 0.0] * p,
        beta=[lambda z: np.zeros(d) for d in dims],
        M_z=(2.0,) * p,
    )
