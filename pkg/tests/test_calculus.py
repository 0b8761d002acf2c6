import math

import numpy as np
import pytest

from pwcalc.calculus import (
    HomogeneousFunction,
    PreconditionError,
    check_homogeneity,
    check_restricted_bounded,
    compatible_representation,
    invertible_formula,
    pw_apply,
    pw_apply_restricted,
    pw_commuting_oracle,
    special_values,
)
from pwcalc.extended import INF, add, form_leq, quadratic_form
from pwcalc.functions import ExtendedFunction, Interval, catalog
from pwcalc.linalg import hermitian_part, spectral_norm
from pwcalc.perspectives import perspective_of
from pwcalc.suites import (
    RandomSpec,
    gen_pair,
    haar_unitary,
    random_isometry,
    random_psd,
)

A712 = np.array([[1.0, 1.0], [1.0, 1.0]])
B712 = np.diag([1.0, 2.0])
P87 = np.diag([1.0, 0.0])
Q87 = 0.5 * np.ones((2, 2))


def phi_t2():
    return perspective_of(catalog("power", 2))


def ylogxy_restricted():
    return HomogeneousFunction("ylogxy", catalog("ylogxy"), 0.0, INF,
                               variant="ge")


def forms_agree(T1, T2, vectors, rel=1e-9):
    for xi in vectors:
        q1, q2 = quadratic_form(T1, xi), quadratic_form(T2, xi)
        if math.isinf(q1) != math.isinf(q2):
            return False
        if math.isfinite(q1) and abs(q1 - q2) > rel * (1 + abs(q1) + abs(q2)):
            return False
    return True


def probe_vectors(rng, n, k=10):
    return [rng.standard_normal(n) + 1j * rng.standard_normal(n)
            for _ in range(k)]


class TestCompatibleRepresentation:
    def test_orthogonal_supports(self):
        rep = compatible_representation(np.diag([1.0, 0.0]), np.diag([0.0, 1.0]))
        assert rep.subspace.dim == 2
        # in range coordinates R and S are the complementary projections
        w = np.linalg.eigvalsh(rep.r)
        assert np.allclose(sorted(w), [0.0, 1.0], atol=1e-12)

    def test_equal_pair_gives_half(self):
        rep = compatible_representation(np.eye(2), np.eye(2))
        assert np.abs(rep.r - 0.5 * np.eye(2)).max() < 1e-12

    def test_reconstruction(self):
        A = np.array([[1.0, 1.0], [1.0, 1.0]])
        B = np.diag([1.0, 2.0])
        rep = compatible_representation(A, B)
        T = rep.t_map
        assert np.abs(T.conj().T @ rep.r @ T - A).max() < 1e-10
        assert np.abs(T.conj().T @ rep.s @ T - B).max() < 1e-10

    def test_invariants_seeded(self):
        # R+S=I, T*RT=A, T*ST=B for 300 seeded pairs, dims 1..8
        for trial in range(300):
            rng = np.random.default_rng((23, trial))
            n = int(rng.integers(1, 9))
            A = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
            B = random_psd(rng, n, rank=int(rng.integers(1, n + 1)))
            rep = compatible_representation(A, B)
            k = rep.subspace.dim
            assert np.abs(rep.r + rep.s - np.eye(k)).max() < 1e-10
            scale = 1e-9 * (1 + spectral_norm(A + B))
            T = rep.t_map
            assert np.abs(T.conj().T @ rep.r @ T - A).max() < scale
            assert np.abs(T.conj().T @ rep.s @ T - B).max() < scale
            w = np.linalg.eigvalsh(rep.r)
            if k:
                # reconstruction after the clip reintroduces eps-level noise
                eps_slack = 8 * n * np.finfo(float).eps
                assert w[0] >= -eps_slack and w[-1] <= 1.0 + eps_slack

    def test_zero_pair(self):
        rep = compatible_representation(np.zeros((2, 2)), np.zeros((2, 2)))
        assert rep.subspace.dim == 0


class TestPwApply:
    def test_invertible_pair_closed_form(self):
        out = pw_apply(phi_t2(), A712, B712)
        assert out.is_bounded
        assert np.abs(out.form_matrix() - 1.5 * A712).max() < 1e-9
        assert abs(out.operator_norm() - 3.0) < 1e-9

    def test_projection_pair_infinity_part(self):
        out = pw_apply(phi_t2(), P87, Q87)
        assert out.infinity_dim == 1

    def test_scaled_pair_identity(self):
        # phi(aX, bX) = phi(a,b) X, with inf X = inf on range X
        rng = np.random.default_rng(40)
        X = random_psd(rng, 3, rank=2)
        phi = phi_t2()
        for a, b in ((2.0, 1.0), (0.5, 3.0)):
            out = pw_apply(phi, a * X, b * X)
            expected = phi.bivariate(a, b) * X
            assert np.abs(out.form_matrix() - expected).max() < 1e-9
        out = pw_apply(phi, 2.0 * X, 0.0 * X)  # phi(2,0) = inf
        assert out.infinity_dim == 2  # the rank of X
        zero = pw_apply(phi, 0.0 * X, 0.0 * X)
        assert zero.is_bounded and np.abs(zero.form_matrix()).max() == 0.0

    def test_restricted_variant_rejected(self):
        with pytest.raises(PreconditionError, match="restricted"):
            pw_apply(ylogxy_restricted(), np.eye(2), np.eye(2))

    def test_nan_diagonal_is_logic_error(self):
        from pwcalc.extended import FormArithmeticError
        diag = ExtendedFunction("nan", Interval(0.0, 1.0, True, True),
                                lambda t: float("nan") if 0 < t < 1 else 0.0)
        phi = HomogeneousFunction("nan", diag, 0.0, 0.0)
        with pytest.raises(FormArithmeticError, match="NaN"):
            pw_apply(phi, np.diag([1.0, 2.0]), np.diag([2.0, 1.0]))


class TestCommutingOracle:
    def test_parallel_sum_generator_diagonal(self):
        # phi = perspective of t/(1+t): scalar formula ab/(a+b)
        f = ExtendedFunction("psgen", Interval(0.0, INF, True, False),
                             lambda t: t / (1.0 + t), f_at_0plus=0.0,
                             fprime_at_inf=0.0, f_at_1=0.5,
                             tags=frozenset({"operator_convex"}))
        phi = perspective_of(f, assert_convex=True)
        out = pw_commuting_oracle(phi, np.diag([1.0, 2.0]), np.diag([2.0, 2.0]))
        assert np.abs(out.form_matrix() - np.diag([2.0 / 3.0, 1.0])).max() < 1e-12

    def test_tlogt_diagonal(self):
        phi = perspective_of(catalog("tlogt"))
        out = pw_commuting_oracle(phi, np.diag([1.0, math.e]), np.eye(2))
        assert np.abs(out.form_matrix() - np.diag([0.0, math.e])).max() < 1e-12

    def test_agrees_with_pw_apply(self):
        spec = RandomSpec(2, 6, "commuting_pair", seed=11)
        phi = phi_t2()
        for trial in range(30):
            A, B = gen_pair(spec, trial)
            rng = np.random.default_rng((90, trial))
            direct = pw_apply(phi, A, B)
            oracle = pw_commuting_oracle(phi, A, B)
            assert direct.infinity_dim == oracle.infinity_dim
            assert forms_agree(direct, oracle, probe_vectors(rng, A.shape[0]))

    def test_rejects_noncommuting(self):
        with pytest.raises(PreconditionError, match="commute"):
            pw_commuting_oracle(phi_t2(), A712, B712)


class TestSpecialValues:
    def test_scalar_identity_recovers_f(self):
        # phi(A, 1*I) is the scalar calculus of f
        sv = special_values(phi_t2(), np.diag([1.0, 3.0]), 1.0, 1.0)
        assert np.abs(sv.with_scalar_right.form_matrix() - np.diag([1.0, 9.0])).max() < 1e-12

    def test_zero_scalar_gives_corner_times_a(self):
        # phi(A, 0) = phi(1,0) A; for t^2 that is infinity on the range
        A = np.diag([2.0, 0.0])
        sv = special_values(phi_t2(), A, 0.0, 0.0)
        assert sv.with_scalar_right.infinity_dim == 1
        # the parallel-sum function has zero corners: phi(A, 0) = 0
        diag = ExtendedFunction("t(1-t)", Interval(0.0, 1.0, True, True),
                                lambda t: t * (1.0 - t))
        phi0 = HomogeneousFunction("parallel-sum", diag, 0.0, 0.0)
        sv0 = special_values(phi0, A, 0.0, 0.0)
        assert np.abs(sv0.with_scalar_right.form_matrix()).max() == 0.0

    def test_scaled_pair_zero(self):
        sv = special_values(phi_t2(), np.diag([1.0, 2.0]), 0.0, 0.0)
        assert np.abs(sv.scaled_pair.form_matrix()).max() == 0.0

    def test_agrees_with_pw_apply(self):
        rng = np.random.default_rng(77)
        A = random_psd(rng, 3)
        phi = perspective_of(catalog("tlogt"))
        sv = special_values(phi, A, 1.3, 0.6)
        direct = pw_apply(phi, A, 1.3 * np.eye(3))
        assert forms_agree(sv.with_scalar_right, direct, probe_vectors(rng, 3))
        direct = pw_apply(phi, 1.3 * np.eye(3), A)
        assert forms_agree(sv.with_scalar_left, direct, probe_vectors(rng, 3))
        direct = pw_apply(phi, 1.3 * A, 0.6 * A)
        assert forms_agree(sv.scaled_pair, direct, probe_vectors(rng, 3))


class TestInvertibleFormula:
    def test_example_pair(self):
        out = invertible_formula(phi_t2(), A712, B712)
        assert np.abs(out.form_matrix() - 1.5 * A712).max() < 1e-10

    def test_identity_pair(self):
        phi = phi_t2()
        out = invertible_formula(phi, np.eye(2), np.eye(2))
        assert np.abs(out.form_matrix() - phi.bivariate(1.0, 1.0) * np.eye(2)).max() < 1e-12

    def test_matches_pw_apply(self):
        spec = RandomSpec(4, 4, "well_conditioned", seed=3)
        for fname, par in (("power", 2), ("tlogt", None), ("neglog", None)):
            phi = perspective_of(catalog(fname, par) if par else catalog(fname))
            for trial in range(10):
                A, B = gen_pair(spec, trial)
                rng = np.random.default_rng((91, trial))
                lhs = invertible_formula(phi, A, B)
                rhs = pw_apply(phi, A, B)
                assert forms_agree(lhs, rhs, probe_vectors(rng, 4), rel=1e-9)

    def test_a_invertible_branch(self):
        # B singular, A invertible: the second branch must fire and agree
        rng = np.random.default_rng(8)
        A = random_psd(rng, 3) + 0.5 * np.eye(3)
        B = random_psd(rng, 3, rank=2)
        phi = perspective_of(catalog("power", 2))
        lhs = invertible_formula(phi, A, B)
        rhs = pw_apply(phi, A, B)
        assert lhs.infinity_dim == rhs.infinity_dim
        assert forms_agree(lhs, rhs, probe_vectors(rng, 3), rel=1e-8)

    def test_rejects_doubly_singular(self):
        with pytest.raises(PreconditionError, match="invertible"):
            invertible_formula(phi_t2(), np.diag([1.0, 0.0]), np.diag([1.0, 0.0]))


class TestHomogeneity:
    def test_unitary_is_equality(self):
        rng = np.random.default_rng(5)
        A, B = random_psd(rng, 4), random_psd(rng, 4)
        U = haar_unitary(rng, 4)
        rep = check_homogeneity(phi_t2(), A, B, U)
        assert not rep.skipped and rep.ok
        assert rep.max_deviation < 1e-8

    def test_positive_scalar(self):
        rng = np.random.default_rng(6)
        A, B = random_psd(rng, 3), random_psd(rng, 3)
        rep = check_homogeneity(phi_t2(), A, B, 1.7 * np.eye(3))
        assert rep.ok
        lhs = pw_apply(phi_t2(), 1.7 ** 2 * A, 1.7 ** 2 * B)
        rhs = pw_apply(phi_t2(), A, B)
        assert np.abs(lhs.form_matrix() - 1.7 ** 2 * rhs.form_matrix()).max() < 1e-9

    def test_random_surjective(self):
        rng = np.random.default_rng(55)
        spec = RandomSpec(4, 4, "well_conditioned", seed=5)
        for trial in range(20):
            A, B = gen_pair(spec, trial)
            C = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            rep = check_homogeneity(perspective_of(catalog("tlogt")), A, B, C)
            assert not rep.skipped
            assert rep.ok, rep.max_deviation

    def test_range_condition_skips(self):
        # C with 1-dim range cannot carry a full-range pair
        A, B = np.eye(3), np.eye(3)
        C = np.zeros((3, 3))
        C[0, 0] = 1.0
        rep = check_homogeneity(phi_t2(), A, B, C)
        assert rep.skipped
        assert "range" in rep.reason


class TestDirectSums:
    def test_block_assembly(self):
        spec = RandomSpec(3, 3, "rank_deficient", seed=101)
        phi = phi_t2()
        for trial in range(10):
            A1, B1 = gen_pair(spec, trial)
            A2, B2 = gen_pair(spec, trial + 500)
            z = np.zeros((3, 3))
            A = np.block([[A1, z], [z, A2]])
            B = np.block([[B1, z], [z, B2]])
            whole = pw_apply(phi, A, B)
            p1 = pw_apply(phi, A1, B1)
            p2 = pw_apply(phi, A2, B2)
            assert whole.infinity_dim == p1.infinity_dim + p2.infinity_dim
            rng = np.random.default_rng((44, trial))
            for _ in range(5):
                x1 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
                x2 = rng.standard_normal(3) + 1j * rng.standard_normal(3)
                q = quadratic_form(whole, np.concatenate([x1, x2]))
                qs = quadratic_form(p1, x1) + quadratic_form(p2, x2)
                if math.isinf(q) or math.isinf(qs):
                    assert math.isinf(q) and math.isinf(qs)
                else:
                    assert abs(q - qs) < 1e-9 * (1 + abs(q))


class TestConvexityInequalities:
    def test_joint_subadditivity(self):
        spec = RandomSpec(4, 4, "well_conditioned", seed=60)
        phi = perspective_of(catalog("tlogt"))
        for trial in range(30):
            A1, B1 = gen_pair(spec, trial)
            A2, B2 = gen_pair(spec, trial + 1000)
            lhs = pw_apply(phi, A1 + A2, B1 + B2)
            rhs = add(pw_apply(phi, A1, B1), pw_apply(phi, A2, B2))
            scale = 1 + max(np.abs(lhs.finite_part).max(initial=0),
                            np.abs(rhs.finite_part).max(initial=0))
            ok, _ = form_leq(lhs, rhs, 1e-8 * scale)
            assert ok

    def test_isometry_compression(self):
        spec = RandomSpec(4, 4, "rank_deficient", seed=61)
        phi = phi_t2()
        for trial in range(30):
            A, B = gen_pair(spec, trial)
            rng = np.random.default_rng((62, trial))
            V = random_isometry(rng, 4, 2)
            lhs = pw_apply(phi, hermitian_part(V.conj().T @ A @ V),
                           hermitian_part(V.conj().T @ B @ V))
            from pwcalc.extended import congruence
            rhs = congruence(V, pw_apply(phi, A, B))
            scale = 1 + max(np.abs(lhs.finite_part).max(initial=0),
                            np.abs(rhs.finite_part).max(initial=0))
            ok, _ = form_leq(lhs, rhs, 1e-8 * scale)
            assert ok

    def test_monotone_decreasing_first_argument(self):
        # neglog: phi(1,0) = 0 and diagonal operator monotone decreasing
        spec = RandomSpec(3, 3, "well_conditioned", seed=63)
        phi = perspective_of(catalog("neglog"))
        for trial in range(20):
            A1, B = gen_pair(spec, trial)
            rng = np.random.default_rng((64, trial))
            A2 = A1 + random_psd(rng, 3, lo=0.1, hi=0.8)
            big = pw_apply(phi, A1, B)
            small = pw_apply(phi, A2, B)
            scale = 1 + max(np.abs(big.finite_part).max(initial=0),
                            np.abs(small.finite_part).max(initial=0))
            ok, _ = form_leq(small, big, 1e-8 * scale)
            assert ok


class TestRestricted:
    def test_commuting_scalar_value(self):
        out = pw_apply_restricted(ylogxy_restricted(), 2 * np.eye(2), np.eye(2))
        assert np.abs(out.form_matrix() - math.log(2) * np.eye(2)).max() < 1e-10

    def test_zero_second_argument(self):
        out = pw_apply_restricted(ylogxy_restricted(), np.eye(2), np.zeros((2, 2)))
        assert np.abs(out.form_matrix()).max() < 1e-12

    def test_domination_precondition(self):
        with pytest.raises(PreconditionError, match="min eigenvalue"):
            pw_apply_restricted(ylogxy_restricted(), np.diag([1.0, 0.0]),
                                np.diag([0.0, 1.0]), side="ge")

    def test_le_side(self):
        phi = HomogeneousFunction(
            "xlogyx", ExtendedFunction(
                "diag", Interval(0.0, 1.0, True, False),
                lambda t: t * math.log((1.0 - t) / t) if t > 0 else 0.0),
            INF, 0.0, variant="le")
        out = pw_apply_restricted(phi, np.eye(2), 2 * np.eye(2), side="le")
        assert np.abs(out.form_matrix() - math.log(2) * np.eye(2)).max() < 1e-10

    def test_restricted_bounded_ylogxy(self):
        ok, details = check_restricted_bounded(ylogxy_restricted())
        assert ok
        assert all(d["bounded"] for d in details)

    def test_pole_detected(self):
        def pole(t):
            return 1.0 / (t - 0.5)
        phi = HomogeneousFunction(
            "pole", ExtendedFunction("pole", Interval(0.0, 1.0, False, True), pole),
            pole(1.0), INF, variant="ge")
        ok, _ = check_restricted_bounded(phi)
        assert not ok

    def test_neglog_perspective_restricted_bounded(self):
        # perspective of -log restricted to the ge cone is locally bounded
        diag = perspective_of(catalog("neglog")).diagonal
        phi = HomogeneousFunction(
            "neglog-ge",
            ExtendedFunction("d", Interval(0.0, 1.0, False, True), diag.fn),
            0.0, INF, variant="ge")
        ok, _ = check_restricted_bounded(phi)
        assert ok

    def test_dominated_pairs_stay_bounded(self):
        spec = RandomSpec(3, 5, "dominated_pair", seed=65,
                          params=(("alpha", 0.5),))
        phi = ylogxy_restricted()
        for trial in range(15):
            A, B = gen_pair(spec, trial)
            out = pw_apply_restricted(phi, A, B, side="ge")
            assert out.is_bounded
