import numpy as np
import pytest

from wcesra import sra
from wcesra.condexp import Partition
from wcesra.config import override
from wcesra.errors import NumericalFailure, UsageError
from wcesra.harness import construct
from wcesra.harness.instances import gen_instance
from wcesra.hilbert import (
    LinOperator,
    MeasureSpace,
    MFunction,
    adjoint,
    identity,
    multiplication,
    norm,
    op_norm,
    rank_one,
)
from wcesra.sra import RankOne, Verdict
from wcesra.wce import WCEOp, e_mu, wce_build


def _scalar_case():
    s = MeasureSpace.uniform(3)
    one = s.constant(1.0)
    return wce_build(Partition.trivial(s), one, one)


class TestFamily:
    def test_scalar_values(self):
        fam = sra.WCEFamily(_scalar_case())
        assert fam.r == pytest.approx(1.0)
        assert fam.d(1) == pytest.approx(0.5)
        np.testing.assert_allclose(fam.v(1), 1 / 3)
        np.testing.assert_allclose(fam.q(1), 4 / 3)
        assert op_norm(fam.rm(1)) == pytest.approx(np.sqrt(4 / 3), rel=1e-10)

    def test_scalar_inverse_squared_on_constants(self):
        T = _scalar_case()
        fam = sra.WCEFamily(T)
        one = T.space.constant(1.0)
        assert fam.rm_inverse_squared(1)(one).allclose(one * 0.75, atol=1e-12)

    def test_invariants(self):
        for seed in range(20):
            fam = sra.WCEFamily(gen_instance(seed).wce)
            prev = None
            for m in range(1, 40):
                d, q = fam.d(m), fam.q(m)
                assert d * fam.r < 1
                assert np.all(fam.v(m) >= 0)
                assert np.all(q >= 1)
                if prev is not None:
                    assert np.all(q >= prev - 1e-12)
                prev = q

    def test_stable_at_large_m(self):
        fam = sra.WCEFamily(gen_instance(5).wce)
        for m in (2**20, 2**30):
            assert np.all(np.isfinite(fam.q(m)))
            assert fam.rm_inverse(m).distance(LinOperator(fam.space, np.linalg.inv(fam.rm(m).matrix))) < 1e-6

    def test_quasinilpotent_coefficient(self, i2):
        fam = sra.WCEFamily(i2)
        for m in (1, 3, 10):
            expected = m**2 * np.real(i2.ew2.values)
            np.testing.assert_allclose(fam.v(m), expected, rtol=1e-14)

    def test_norm_identity(self, i1):
        fam = sra.WCEFamily(i1)
        for m in (1, 4, 32):
            assert op_norm(fam.rm(m)) ** 2 == pytest.approx(fam.norm_rm_squared(m), rel=1e-10)


class TestSeries:
    def test_zero_operator(self, i1):
        T = i1.with_weight(i1.space.constant(0.0))
        for m in (1, 5):
            assert sra.rm_series(T, m).distance(identity(T.space)) < 1e-14

    def test_nilpotent_terminates(self, i2):
        m = 3
        d = m / (1 + m * 0.0)
        expected = identity(i2.space) + (adjoint(i2.matrix) @ i2.matrix) * d**2
        assert sra.rm_series_squared(i2, m).distance(expected) < 1e-12

    def test_i1_closed_form(self, i1):
        for m in (3, 5):
            assert sra.rm_closed(i1, m).distance(sra.rm_series(i1, m)) < 1e-9

    def test_squared_identity(self):
        for seed in range(20):
            T = gen_instance(seed).wce
            fam = sra.WCEFamily(T)
            R = fam.rm(4)
            assert (R @ R).distance(fam.rm_squared(4)) < 1e-12 * max(1.0, op_norm(R) ** 2)

    def test_generic_operator_needs_radius(self, i1):
        R = sra.rm_series(i1.matrix, 2)
        assert R.distance(sra.rm_closed(i1, 2)) < 1e-9

    def test_k_max(self, i1, monkeypatch):
        monkeypatch.setattr(sra, "K_MAX", 2)
        with pytest.raises(NumericalFailure):
            sra.rm_series(i1, 1000)


class TestInverse:
    def test_zero_operator(self, i1):
        T = i1.with_weight(i1.space.constant(0.0))
        assert sra.rm_inverse(T, 3).distance(identity(T.space)) < 1e-15

    def test_i1_against_generic_inverse(self, i1):
        R = sra.rm_closed(i1, 4)
        oracle = LinOperator(i1.space, np.linalg.inv(R.matrix))
        assert np.abs(sra.rm_inverse(i1, 4).matrix - oracle.matrix).max() < 1e-9

    def test_printed_coefficient_differs(self, i1):
        fam = sra.WCEFamily(i1)
        oracle = LinOperator(i1.space, np.linalg.inv(fam.rm_squared(2).matrix))
        assert fam.rm_inverse_squared(2).distance(oracle) < 1e-12
        assert fam.rm_inverse_squared_printed(2).distance(oracle) > 1e-3

    def test_contractive(self):
        for seed in range(20):
            T = gen_instance(seed).wce
            for m in (1, 16, 1024):
                assert op_norm(sra.rm_inverse(T, m)) <= 1 + 1e-9


class TestBlockDecompose:
    def test_zero_u(self, i1):
        T = WCEOp(i1.partition, i1.space.constant(0.0), i1.w)
        dec = sra.block_decompose(T)
        assert dec.H2.dim == 4 and dec.H1.dim == 0

    def test_singletons(self):
        s = MeasureSpace.uniform(3)
        T = wce_build(Partition.discrete(s), s.function([1, 2, 3]), s.constant())
        assert sra.block_decompose(T).H2.dim == 0

    def test_i1(self, i1):
        dec = sra.block_decompose(i1)
        assert dec.H1.dim == 2 and dec.H2.dim == 2
        assert dec.routes_agree
        assert (dec.P1 + dec.P2).distance(identity(i1.space)) < 1e-12
        for h in dec.H2.vectors():
            assert norm(e_mu(i1)(h)) < 1e-10

    def test_rm_fixes_h2(self):
        for seed in range(10):
            T = gen_instance(seed).wce
            dec = sra.block_decompose(T)
            R = sra.rm_closed(T, 8)
            for h in dec.H2.vectors():
                assert norm(R(h) - h) < 1e-9

    def test_routes_agree_random(self):
        for seed in range(30):
            assert sra.block_decompose(gen_instance(seed).wce).routes_agree


class TestClassifiers:
    grid = [2**k for k in range(15)]

    def test_constant_is_member(self):
        assert sra.classify_bounded(self.grid, [3.0] * 15) is Verdict.MEMBER

    def test_sqrt_growth_is_nonmember(self):
        assert sra.classify_bounded(self.grid, np.sqrt(self.grid)) is Verdict.NONMEMBER

    def test_slow_drift_is_inconclusive(self):
        gs = [1 + 0.02 * k for k in range(15)]
        assert sra.classify_bounded(self.grid, gs) is Verdict.INCONCLUSIVE

    def test_vanishing(self):
        gs = [1.0 / m for m in self.grid]
        assert sra.classify_vanishing(self.grid, gs, 1.0) is Verdict.MEMBER
        assert sra.classify_vanishing(self.grid, [1.0] * 15, 1.0) is Verdict.NONMEMBER

    def test_grid_must_increase(self, i1):
        with pytest.raises(UsageError):
            sra.conjugated_norms(i1, identity(i1.space), [1, 1, 2])


class TestBtMembership:
    def test_identity_constant_one(self, i1):
        v = sra.bt_member_definitional(i1, identity(i1.space))
        assert v.verdict is Verdict.MEMBER
        assert all(g == pytest.approx(1.0) for _, g in v.evidence)

    def test_t_itself(self, i1):
        v = sra.bt_member_definitional(i1, i1.matrix)
        assert v.verdict is Verdict.MEMBER
        assert v.criterion_flags["kernel"]

    def test_h2_to_h1_rank_one(self, i1):
        dec = sra.block_decompose(i1)
        S = rank_one(dec.H1.vectors()[0], dec.H2.vectors()[0])
        v = sra.bt_member_definitional(i1, S)
        assert v.verdict is Verdict.NONMEMBER
        assert not v.criterion_flags["kernel"]

    def test_evidence_sorted(self, i1):
        v = sra.bt_member_definitional(i1, identity(i1.space), [8, 1, 4, 2])
        assert [m for m, _ in v.evidence] == [1, 2, 4, 8]

    def test_measurable_multiplication(self, i1, rng):
        a = i1.partition.lift(rng.standard_normal(2))
        assert sra.bt_member_kernel_criterion(i1, multiplication(a))

    def test_commuting_family(self, i1, rng):
        S = construct.commuting_wce(rng, i1)
        fam = sra.WCEFamily(i1)
        for m in (1, 64, 4096):
            R = fam.rm(m)
            assert op_norm(R @ S - S @ R) < 1e-9
        v = sra.bt_member_definitional(i1, S)
        assert all(abs(g - op_norm(S)) <= 1e-8 * op_norm(S) for _, g in v.evidence)


class TestQtMembership:
    def test_zero(self, i1):
        crit, v = sra.qt_member(i1, 0 * identity(i1.space))
        assert crit and v.verdict is Verdict.MEMBER

    def test_identity(self, i1):
        crit, v = sra.qt_member(i1, identity(i1.space))
        assert not crit
        assert v.verdict is Verdict.NONMEMBER

    def test_quasinilpotent_self(self, i2):
        crit, v = sra.qt_member(i2, i2.matrix)
        assert crit
        assert v.verdict is Verdict.MEMBER

    def test_kernel_criterion_alone_is_not_enough(self, i1):
        # S = P1 kills ker(E M_u) yet R_m P1 R_m^-1 = P1 never shrinks.
        dec = sra.block_decompose(i1)
        crit, v = sra.qt_member(i1, dec.P1)
        assert crit
        assert not v.criterion_flags["compression_zero"]
        assert v.verdict is Verdict.NONMEMBER


class TestRankOne:
    def test_orthogonal_pair(self):
        s = MeasureSpace.uniform(3)
        x, y = s.basis_vector(0) * np.sqrt(3), s.basis_vector(1) * np.sqrt(3)
        fam = sra.RankOneFamily(RankOne(x, y))
        assert fam.r == 0.0
        for m in (1, 7):
            expected = identity(s) + rank_one(y, y) * m**2
            assert fam.rm_squared(m).distance(expected) < 1e-12

    def test_equal_unit_vectors(self):
        s = MeasureSpace.uniform(2)
        x = s.function([1.0, 1.0])
        fam = sra.RankOneFamily(RankOne(x, x))
        d = fam.d(3)
        assert fam.lam(3) ** 2 == pytest.approx(1 + d * d / (1 - d * d))

    def test_series_agreement(self):
        for seed in range(10):
            op = gen_instance(seed, "rank-one").rank_one["R"]
            for m in (1, 4, 16):
                assert sra.rank_one_rm(op.x, op.y, m).distance(sra.rm_series(op, m)) < 1e-9

    def test_qt_examples(self):
        s = MeasureSpace.uniform(3)
        e1, e2, e3 = (s.basis_vector(i) * np.sqrt(3) for i in range(3))
        assert sra.rank_one_qt(e1, e2, rank_one(e3, e2))
        P = rank_one(e2, e2)
        assert not sra.rank_one_qt(e1, e2, P)
        assert not sra.rank_one_qt(e1, e2, rank_one(e2, e2))

    def test_qt_decay_bound(self, rng):
        op = gen_instance(4, "rank-one").rank_one["R"]
        for S in construct.rank_one_q_members(rng, op, 3):
            crit, v = sra.rank_one_qt_member(op, S)
            assert crit and v.criterion_flags["decay_bound"]
            assert v.criterion_flags["rate_verdict"] == "Member"

    def test_bt_invariance(self, rng):
        s = MeasureSpace.uniform(3)
        w = s.basis_vector(0) * np.sqrt(3)
        x, y = s.basis_vector(1) * np.sqrt(3), s.basis_vector(2) * np.sqrt(3)
        batch = [LinOperator(s, rng.standard_normal((3, 3))) for _ in range(50)]
        batch.append(identity(s))
        assert sra.rank_one_bt_invariance(w, x, y, batch)
        assert sra.rank_one_bt_invariance(w, x, x, batch)
        assert not sra.rank_one_bt_member(x, w, batch[0])


class TestRankOneInWCE:
    def test_both_in_kernel(self, i1):
        dec = sra.block_decompose(i1)
        f, g = dec.H2.vectors()
        member, v = sra.rank_one_in_bt_wce(i1, f, g)
        assert member and v.verdict is Verdict.MEMBER

    def test_h1_to_h2(self, i1):
        dec = sra.block_decompose(i1)
        member, v = sra.rank_one_in_bt_wce(i1, dec.H1.vectors()[0], dec.H2.vectors()[0])
        assert not member and v.verdict is Verdict.NONMEMBER
        assert v.criterion_flags["inverse_norm_mismatch"] < 1e-9

    def test_zero(self, i1):
        z = i1.space.constant(0.0)
        member, _ = sra.rank_one_in_bt_wce(i1, z, z)
        assert member

    def test_matches_definitional(self, i1, rng):
        f = construct.random_function(rng, i1.space)
        g = construct.random_function(rng, i1.space)
        _, v = sra.rank_one_in_bt_wce(i1, f, g)
        d = sra.conjugated_norms(i1, rank_one(f, g))
        for (m1, a), (m2, b) in zip(v.evidence, d):
            assert m1 == m2 and a == pytest.approx(b, rel=1e-8)


class TestWholeAlgebra:
    def test_singletons(self):
        s = MeasureSpace.uniform(3)
        T = wce_build(Partition.discrete(s), s.function([1, 2, 3]), s.constant())
        full, _ = sra.bt_equals_full(T)
        assert full

    def test_zero_u(self, i1):
        T = WCEOp(i1.partition, i1.space.constant(0.0), i1.w)
        full, _ = sra.bt_equals_full(T)
        assert full

    def test_i1(self, i1):
        full, ev = sra.bt_equals_full(i1)
        assert not full
        S = ev["counterexample"]
        assert sra.bt_member_definitional(i1, S).verdict is Verdict.NONMEMBER

    def test_isometry_direct(self, rng):
        s = MeasureSpace.uniform(4)
        u = MFunction(s, rng.standard_normal(4) + 1j * rng.standard_normal(4))
        w = MFunction(s, 2.0 * np.exp(1j * rng.uniform(0, 6, 4)) / u.values)
        direct, ev = sra.isometry_multiple_check(wce_build(Partition.discrete(s), u, w))
        assert direct
        assert ev["c"] == pytest.approx(4.0)

    def test_conditional_expectation_not_isometry(self):
        s = MeasureSpace.uniform(3)
        direct, _ = sra.isometry_multiple_check(
            wce_build(Partition.trivial(s), s.constant(), s.constant())
        )
        assert not direct

    def test_one_atom_is_isometry(self):
        s = MeasureSpace((1.0,))
        direct, _ = sra.isometry_multiple_check(
            wce_build(Partition.trivial(s), s.constant(), s.constant())
        )
        assert direct

    def test_quasinilpotent_not_isometry(self, i2):
        direct, _ = sra.isometry_multiple_check(i2)
        assert not direct

    def test_invariant_subspace_witness(self, i2):
        W = sra.invariant_subspace_witness(i2)
        assert W is not None and 0 < W.dim < 4
        assert W.is_invariant(i2.matrix)


def test_homogeneous_profile_has_scalar_rates():
    for seed in range(10):
        T = gen_instance(seed, "homogeneous").wce
        fam = sra.WCEFamily(T)
        for m in (1, 32, 1024):
            q = fam.q(m)
            assert q.max() - q.min() <= 1e-9 * q.max()


def test_tolerance_override_changes_kernel_test(i1, rng):
    dec = sra.block_decompose(i1)
    h1, h2 = dec.H1.vectors()[0], dec.H2.vectors()[0]
    S = identity(i1.space) + rank_one(h1, h2) * 1e-6
    assert not sra.bt_member_kernel_criterion(i1, S)
    with override(inv=1e-4):
        assert sra.bt_member_kernel_criterion(i1, S)
