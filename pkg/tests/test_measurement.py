import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from jumporder.exceptions import DimensionMismatch, ImpossibleOutcome, InvalidBasis
from jumporder.hardy import HardyParams, build_hardy
from jumporder.hilbert import EPS_NORM, EPS_NUM, BipartiteSpace, DensityOperator, Factor, Ket, partial_trace_L, partial_trace_R, sandwich
from jumporder.measurement import (
    EPS_PROB,
    MeasurementBasis,
    check_reciprocity,
    is_symmetric_case,
    nonselective_update,
    outcome_distribution,
    pure_selective,
    selective_update,
)
from jumporder.randstate import random_basis, random_density, random_ket, random_schmidt_state

from oracles import contract_loops, lift, ptrace_L_loops, sandwich_by_projection

SQ2 = np.sqrt(2)
Q2 = BipartiteSpace(2, 2)
SINGLET = Ket(np.array([0, 1, -1, 0]) / SQ2)
Z_L = MeasurementBasis.computational(Factor.L, 2, ["0", "1"])
Z_R = MeasurementBasis.computational(Factor.R, 2, ["0", "1"])

dims = st.sampled_from([2, 3, 4])
seeds = st.integers(0, 2**32 - 1)


def _random_setup(d_L, d_R, seed, factor="L"):
    rng = np.random.default_rng(seed)
    rho = random_density(BipartiteSpace(d_L, d_R), rng)
    basis = random_basis(factor, d_L if factor == "L" else d_R, rng)
    return rho, basis


class TestBasis:
    def test_rejects_non_orthonormal(self):
        with pytest.raises(InvalidBasis):
            MeasurementBasis.from_columns("L", [[1, 1 / SQ2], [0, 1 / SQ2]], ["a", "b"])

    def test_rejects_duplicate_labels(self):
        with pytest.raises(InvalidBasis):
            MeasurementBasis.computational("L", 2, ["a", "a"])

    def test_commutation(self):
        x = MeasurementBasis.rotated("R", np.pi / 4)
        assert Z_R.commutes_with(MeasurementBasis.rotated("R", np.pi / 2))
        assert not Z_R.commutes_with(x)


class TestNonselective:
    def test_eigenbasis_fixed_point(self, rng):
        rho = DensityOperator.product(np.diag([0.3, 0.7]), random_density(BipartiteSpace(1, 2), rng).entries)
        np.testing.assert_allclose(nonselective_update(rho, Z_L).entries, rho.entries, atol=EPS_NUM)

    def test_equal_weight_dephasing(self, rng):
        sigma = random_density(BipartiteSpace(1, 2), rng).entries
        plus = np.full((2, 2), 0.5)
        rho = DensityOperator.product(plus, sigma)
        np.testing.assert_allclose(
            nonselective_update(rho, Z_L).entries, np.kron(np.eye(2) / 2, sigma), atol=EPS_NUM
        )

    def test_hardy_no_signaling(self):
        setup = build_hardy(HardyParams(0.6, 1.1))
        out = nonselective_update(setup.rho0, setup.bases["L2"])
        np.testing.assert_allclose(partial_trace_L(out).entries, partial_trace_L(setup.rho0).entries, atol=EPS_NUM)

    @settings(max_examples=60, deadline=None)
    @given(dims, dims, seeds, st.sampled_from(["L", "R"]))
    def test_no_signaling_and_idempotence(self, d_L, d_R, seed, factor):
        rho, basis = _random_setup(d_L, d_R, seed, factor)
        once = nonselective_update(rho, basis)
        remote = partial_trace_L if factor == "L" else partial_trace_R
        np.testing.assert_allclose(remote(once).entries, remote(rho).entries, atol=EPS_NUM)
        np.testing.assert_allclose(nonselective_update(once, basis).entries, once.entries, atol=EPS_NUM)
        assert abs(np.trace(once.entries) - 1) < EPS_NORM

    @settings(max_examples=40, deadline=None)
    @given(dims, dims, seeds)
    def test_matches_projector_oracle(self, d_L, d_R, seed):
        rho, basis = _random_setup(d_L, d_R, seed)
        want = sum(
            lift(v.projector(), "L", d_L, d_R) @ rho.entries @ lift(v.projector(), "L", d_L, d_R)
            for v in basis.vectors
        )
        np.testing.assert_allclose(nonselective_update(rho, basis).entries, want, atol=EPS_NUM)

    @settings(max_examples=40, deadline=None)
    @given(dims, dims, seeds)
    def test_decomposes_into_selective_branches(self, d_L, d_R, seed):
        rho, basis = _random_setup(d_L, d_R, seed)
        mix = sum(
            o.probability * selective_update(rho, basis, o.label).entries
            for o in outcome_distribution(rho, basis)
            if o.probability > EPS_PROB
        )
        np.testing.assert_allclose(mix, nonselective_update(rho, basis).entries, atol=EPS_NUM)

    def test_dimension_mismatch(self, rng):
        rho = random_density(BipartiteSpace(2, 3), rng)
        with pytest.raises(DimensionMismatch):
            nonselective_update(rho, random_basis("L", 3, rng))


class TestSelective:
    def test_certain_outcome(self, rng):
        sigma = random_density(BipartiteSpace(1, 2), rng).entries
        rho = DensityOperator.product(np.diag([1.0, 0]), sigma)
        np.testing.assert_allclose(selective_update(rho, Z_L, "0").entries, rho.entries, atol=EPS_NUM)
        assert outcome_distribution(rho, Z_L)[0].probability == pytest.approx(1.0)

    def test_impossible_outcome(self, rng):
        rho = DensityOperator.product(np.diag([1.0, 0]), np.eye(2) / 2)
        with pytest.raises(ImpossibleOutcome):
            selective_update(rho, Z_L, "1")

    def test_hardy_remote_marginal_matches_sandwich(self):
        setup = build_hardy(HardyParams(np.pi / 4, np.pi / 4))
        r2 = setup.bases["R2"]
        out = selective_update(setup.rho0, r2, "R2+")
        num = sandwich_by_projection(setup.rho0.entries, r2.vector("R2+").amplitudes, "R", 2, 2)
        np.testing.assert_allclose(partial_trace_R(out).entries, num / np.trace(num), atol=EPS_NUM)

    @settings(max_examples=60, deadline=None)
    @given(dims, dims, seeds)
    def test_marginals(self, d_L, d_R, seed):
        rho, basis = _random_setup(d_L, d_R, seed)
        lab = basis.labels[0]
        out = selective_update(rho, basis, lab)
        v = basis.vector(lab)
        np.testing.assert_allclose(partial_trace_R(out).entries, v.projector(), atol=EPS_NUM)
        p = partial_trace_R(rho).expectation(v)
        np.testing.assert_allclose(partial_trace_L(out).entries, sandwich(rho, v, "L").entries / p, atol=EPS_NUM)

    def test_selection_signals(self, rng):
        for _ in range(20):
            psi = random_ket(4, rng)
            rho = DensityOperator.from_ket(psi, Q2)
            basis = random_basis("L", 2, rng)
            diff = partial_trace_L(selective_update(rho, basis, basis.labels[0])).entries - partial_trace_L(rho).entries
            assert np.max(np.abs(diff)) > 1e-3


class TestDistribution:
    def test_maximally_mixed(self, rng):
        rho = DensityOperator.maximally_mixed(Q2)
        probs = [o.probability for o in outcome_distribution(rho, random_basis("L", 2, rng))]
        np.testing.assert_allclose(probs, [0.5, 0.5], atol=EPS_NUM)

    def test_eigenstate(self, rng):
        rho = DensityOperator.product(np.diag([1.0, 0]), random_density(BipartiteSpace(1, 2), rng).entries)
        np.testing.assert_allclose([o.probability for o in outcome_distribution(rho, Z_L)], [1, 0], atol=EPS_NUM)

    def test_hardy_r2(self):
        setup = build_hardy(HardyParams(np.pi / 4, np.pi / 4))
        marg = ptrace_L_loops(setup.rho0.entries, 2, 2)
        r2 = setup.bases["R2"]
        want = [np.vdot(v.amplitudes, marg @ v.amplitudes).real for v in r2.vectors]
        got = [o.probability for o in outcome_distribution(setup.rho0, r2)]
        np.testing.assert_allclose(got, want, atol=EPS_NUM)
        np.testing.assert_allclose(got, [1 / 3, 2 / 3], atol=EPS_NUM)

    @settings(max_examples=40, deadline=None)
    @given(dims, dims, seeds)
    def test_sums_to_one(self, d_L, d_R, seed):
        rho, basis = _random_setup(d_L, d_R, seed)
        assert abs(sum(o.probability for o in outcome_distribution(rho, basis)) - 1) < EPS_NORM


class TestPureSelective:
    def test_product(self, rng):
        b = random_ket(3, rng)
        space = BipartiteSpace(2, 3)
        ket0 = Ket(np.kron([1, 0], b.amplitudes))
        post, partner = pure_selective(ket0, space, Z_L, "0")
        assert partner.same_ray(b)
        assert post.same_ray(ket0)

    def test_singlet(self):
        _, partner = pure_selective(SINGLET, Q2, Z_L, "0")
        assert partner.same_ray(Ket(np.array([0, -1.0])))

    def test_hardy_l_bar(self):
        setup = build_hardy(HardyParams(np.pi / 4, np.pi / 4))
        l_bar = setup.bases["L2"].vector("L2-")
        raw = contract_loops(setup.ket.amplitudes, l_bar.amplitudes, "L", 2, 2)
        _, partner = pure_selective(setup.ket, Q2, setup.bases["L2"], "L2-")
        assert partner.same_ray(Ket.normalized(raw))
        assert np.vdot(raw, raw).real == pytest.approx(1 / 3, abs=EPS_NUM)
        assert np.vdot(raw, raw).real == pytest.approx(
            outcome_distribution(setup.rho0, setup.bases["L2"])[1].probability, abs=EPS_NUM
        )

    @settings(max_examples=40, deadline=None)
    @given(dims, dims, seeds, st.sampled_from(["L", "R"]))
    def test_consistent_with_density_update(self, d_L, d_R, seed, factor):
        rng = np.random.default_rng(seed)
        space = BipartiteSpace(d_L, d_R)
        ket0 = random_ket(space.dim, rng)
        basis = random_basis(factor, space.factor_dim(Factor(factor)), rng)
        lab = basis.labels[-1]
        post, _ = pure_selective(ket0, space, basis, lab)
        want = selective_update(DensityOperator.from_ket(ket0, space), basis, lab)
        np.testing.assert_allclose(post.projector(), want.entries, atol=EPS_NUM)

    def test_impossible(self):
        with pytest.raises(ImpossibleOutcome):
            pure_selective(Ket(np.array([1.0, 0, 0, 0])), Q2, Z_L, "1")


class TestSymmetricCase:
    def test_singlet(self):
        report = is_symmetric_case(SINGLET, Q2, Z_L, Z_R)
        assert report.all
        assert report.partners == {"0": "1", "1": "0"}

    def test_product_counterexample(self):
        a = Ket(np.array([0.6, 0.8]))
        ket0 = Ket(np.kron(a.amplitudes, [1, 0]))
        report = is_symmetric_case(ket0, Q2, Z_L)
        assert report.per_outcome == {"0": False, "1": False}
        assert not report.all

    def test_product_on_basis_vector(self):
        ket0 = Ket(np.kron([1, 0], [0.6, 0.8]))
        assert is_symmetric_case(ket0, Q2, Z_L, labels=["0"]).per_outcome == {"0": True}
        with pytest.raises(ImpossibleOutcome):
            is_symmetric_case(ket0, Q2, Z_L)

    def test_schmidt_states_are_symmetric(self, rng):
        for _ in range(20):
            ket0, lb, rb = random_schmidt_state(rng)
            report = is_symmetric_case(ket0, Q2, lb, rb)
            assert report.all
            assert set(report.partners.values()) == {"R+", "R-"}


class TestReciprocity:
    def test_singlet(self):
        report = check_reciprocity(SINGLET, Q2, Z_L, Z_R)
        assert report.holds()
        assert not report.degenerate
        assert report.max_residual <= 1e-15
        assert [(e.l_label, e.r_label) for e in report.entries] == [("0", "1"), ("1", "0")]

    def test_product_is_degenerate(self):
        ket0 = Ket(np.kron([0.6, 0.8], [1, 0]))
        report = check_reciprocity(ket0, Q2, Z_L, Z_R)
        assert all(e.degenerate for e in report.entries)
        assert all(e.premise_residual < EPS_NUM for e in report.entries)

    def test_hardy_l_prime(self):
        setup = build_hardy(HardyParams(np.pi / 3, np.pi / 5))
        report = check_reciprocity(setup.ket, Q2, setup.bases["L1"])
        entry = report.entries[0]
        assert entry.l_label == "L1+"
        # premise holds by construction, the conclusion is what is tested
        assert entry.premise_residual < EPS_NUM
        assert entry.conclusion_residual < EPS_NUM
        assert entry.cross_term < EPS_NUM

    def test_schmidt_states(self, rng):
        for _ in range(50):
            ket0, lb, rb = random_schmidt_state(rng)
            report = check_reciprocity(ket0, Q2, lb, rb)
            assert not report.degenerate
            assert report.max_residual <= EPS_NUM

    def test_mismatched_basis_flags_failed_premise(self, rng):
        ket0, lb, _ = random_schmidt_state(rng)
        report = check_reciprocity(ket0, Q2, lb, random_basis("R", 2, rng))
        assert max(e.premise_residual for e in report.entries) > 1e-3
        assert report.holds()

    def test_needs_qubits(self, rng):
        space = BipartiteSpace(3, 2)
        with pytest.raises(DimensionMismatch):
            check_reciprocity(random_ket(6, rng), space, random_basis("L", 3, rng), Z_R)
