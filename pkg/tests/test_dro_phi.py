import math

import numpy as np
import pytest

from droproj.core import DomainViolation, DroInstance, Status, cost_stats, validate_distribution
from droproj.divergence import divergence
from droproj.dro_phi import (
    bracket,
    h_derivative,
    h_eval,
    solve_dro_phi,
    trivial_candidate,
    trivial_check,
    trivial_distance,
    weights,
)
from droproj.oracle import GridConfig, grid_solve
from droproj.solvers import root_residual
from _support import DIVERGENCES, argmax_mass, random_dro

HALF = [0.5, 0.5]
C10 = [1.0, 0.0]


def inst(kind, eps, q=HALF, c=C10):
    return DroInstance.build(q, c, eps, kind)


class TestTrivialCandidate:
    @pytest.mark.parametrize("q, c, expected", [
        (HALF, C10, [1.0, 0.0]),
        ([0.2, 0.3, 0.5], [2.0, 2.0, 0.0], [0.4, 0.6, 0.0]),
        ([0.3, 0.7], [0.0, 1.0], [0.0, 1.0]),
    ])
    def test_examples(self, q, c, expected):
        p = trivial_candidate(validate_distribution(q), cost_stats(c))
        np.testing.assert_allclose(p, expected, atol=1e-15)

    def test_checks(self):
        q = validate_distribution(HALF)
        assert trivial_check("kl", [1.0, 0.0], q, 0.7)
        assert not trivial_check("hellinger", [1.0, 0.0], q, 0.5)
        assert not trivial_check("burg", [1.0, 0.0], q, 1e6)
        assert not trivial_check("chi2", [1.0, 0.0], q, 1e6)

    def test_boundary_counts_as_trivial(self):
        q = validate_distribution(HALF)
        assert trivial_check("kl", [1.0, 0.0], q, divergence("kl", [1.0, 0.0], HALF))

    @pytest.mark.parametrize("kind", DIVERGENCES)
    def test_closed_form_matches_divergence(self, kind, rng):
        for _ in range(100):
            n = int(rng.integers(2, 8))
            q = rng.uniform(0.1, 1.0, n)
            q /= q.sum()
            c = rng.integers(0, 3, n).astype(float)
            if c.max() == c.min():
                c[0] += 1.0
            p_hat = trivial_candidate(validate_distribution(q), cost_stats(c))
            d = divergence(kind, p_hat, q)
            closed = trivial_distance(kind, argmax_mass(q, c))
            if math.isinf(d):
                assert math.isinf(closed)
            else:
                assert closed == pytest.approx(d, abs=1e-10)


class TestHEval:
    def test_burg_hand_value(self):
        expected = 0.5 * math.log(2.0) + math.log(0.75) - 0.05
        assert h_eval("burg", 2.0, inst("burg", 0.05)) == pytest.approx(expected, abs=1e-14)
        assert expected == pytest.approx(0.008892, abs=1e-6)

    def test_mchi2_zero_at_barrier(self):
        assert h_eval("mchi2", -1.0, inst("mchi2", 0.3)) == 0.0

    def test_chi2_root(self):
        assert abs(h_eval("chi2", 1.8, inst("chi2", 1.0 / 24.0))) <= 1e-12

    def test_hellinger_root(self):
        assert abs(h_eval("hellinger", 2.0, inst("hellinger", 0.102633))) <= 1e-6

    def test_kl_unscaled_and_sign(self):
        i = inst("kl", 0.1)
        raw = h_eval("kl", 10.0, i, scaled=False)
        assert raw == pytest.approx(-0.103944, abs=1e-6)
        assert h_eval("kl", 10.0, i) == pytest.approx(raw * math.exp(-0.1), rel=1e-13)

    def test_kl_scaled_has_no_overflow(self):
        assert math.isfinite(h_eval("kl", 1e-4, inst("kl", 0.1, c=[1000.0, 0.0])))

    @pytest.mark.parametrize("kind, x", [("burg", 1.0), ("hellinger", 0.5), ("chi2", 1.0),
                                         ("mchi2", -1.5), ("kl", 0.0)])
    def test_domain(self, kind, x):
        with pytest.raises(DomainViolation):
            h_eval(kind, x, inst(kind, 0.1))

    @pytest.mark.parametrize("kind", ["chi2", "mchi2"])
    def test_derivative_matches_difference_quotient(self, kind, rng):
        for _ in range(20):
            i = random_dro(rng, 6, kind)
            lo = i.c.cmax if kind == "chi2" else -i.c.cmax
            x = lo + rng.uniform(0.2, 3.0)
            step = 1e-6
            fd = (h_eval(kind, x + step, i) - h_eval(kind, x - step, i)) / (2 * step)
            assert h_derivative(kind, x, i) == pytest.approx(fd, rel=1e-5, abs=1e-7)


class TestBracket:
    def test_examples(self):
        assert bracket("burg", inst("burg", 0.1)) == pytest.approx((1.0, 11.0))
        assert bracket("hellinger", inst("hellinger", 0.5)) == pytest.approx((1.0, 4.0))
        assert bracket("kl", inst("kl", 0.05)) == pytest.approx((0.0, 20.0))
        assert bracket("chi2", inst("chi2", 0.1)) == (1.0, math.inf)
        assert bracket("mchi2", inst("mchi2", 0.1)) == (-1.0, math.inf)


class TestWeights:
    @pytest.mark.parametrize("kind, root, expected", [
        ("burg", 2.0, [2 / 3, 1 / 3]),
        ("hellinger", 2.0, [0.8, 0.2]),
        ("chi2", 1.8, [0.6, 0.4]),
        ("mchi2", 7 / 6, [0.65, 0.35]),
    ])
    def test_examples(self, kind, root, expected):
        np.testing.assert_allclose(weights(kind, root, inst(kind, 0.1)), expected, atol=1e-14)


class TestSolve:
    def test_mchi2_hand(self):
        res = solve_dro_phi(inst("mchi2", 0.09))
        np.testing.assert_allclose(res.p, [0.65, 0.35], atol=1e-8)
        assert res.lambda_ == pytest.approx(7 / 6, abs=1e-8)
        assert res.status is Status.ROOT_FOUND

    def test_chi2_hand(self):
        res = solve_dro_phi(inst("chi2", 1.0 / 24.0))
        np.testing.assert_allclose(res.p, [0.6, 0.4], atol=1e-8)
        assert res.lambda_ == pytest.approx(1.8, abs=1e-8)

    def test_burg_hand(self):
        # the radius is the Burg distance of (2/3, 1/3) from (1/2, 1/2)
        eps = 0.5 * math.log(1.125)
        assert eps == pytest.approx(0.058892, abs=1e-6)
        res = solve_dro_phi(inst("burg", 0.058892))
        np.testing.assert_allclose(res.p, [2 / 3, 1 / 3], atol=1e-5)
        assert res.lambda_ == pytest.approx(2.0, abs=1e-4)

    def test_hellinger_hand(self):
        res = solve_dro_phi(inst("hellinger", 0.102633))
        np.testing.assert_allclose(res.p, [0.8, 0.2], atol=1e-5)

    def test_kl_against_grid(self):
        res = solve_dro_phi(inst("kl", 0.05))
        assert res.p[0] == pytest.approx(0.657, abs=2e-3)
        p_grid, obj_grid = grid_solve(inst("kl", 0.05), GridConfig(1e-5))
        assert res.objective >= obj_grid - 1e-9
        assert res.objective <= obj_grid + 1e-5

    def test_kl_trivial(self):
        res = solve_dro_phi(inst("kl", 0.8))
        assert res.status is Status.TRIVIAL
        np.testing.assert_array_equal(res.p, [1.0, 0.0])
        assert res.h_evaluations == 0

    def test_tied_argmax_trivial(self):
        res = solve_dro_phi(inst("kl", 2.0, q=[0.2, 0.3, 0.5], c=[2.0, 2.0, 0.0]))
        np.testing.assert_allclose(res.p, [0.4, 0.6, 0.0], atol=1e-15)

    def test_large_costs_do_not_overflow(self):
        res = solve_dro_phi(inst("kl", 0.05, c=[800.0, 0.0]))
        np.testing.assert_allclose(res.p, solve_dro_phi(inst("kl", 0.05)).p, atol=1e-9)

    @pytest.mark.parametrize("kind", DIVERGENCES)
    def test_random_feasible_and_tight(self, kind, rng):
        for _ in range(60):
            n = int(rng.integers(2, 40))
            i = random_dro(rng, n, kind, nontrivial=True)
            res = solve_dro_phi(i)
            assert res.status is Status.ROOT_FOUND
            assert abs(res.p.sum() - 1.0) <= 1e-10
            assert res.p.min() >= 0.0
            assert divergence(kind, res.p, i.q) == pytest.approx(i.epsilon, abs=1e-6)
            assert root_residual(i, res) <= 1e-8
            lo, hi = bracket(kind, i)
            root = res.mu if kind == "kl" else res.lambda_
            assert lo < root <= hi

    @pytest.mark.parametrize("kind", DIVERGENCES)
    def test_objective_grows_with_radius(self, kind, rng):
        i = random_dro(rng, 5, kind, nontrivial=True)
        objs = [solve_dro_phi(DroInstance.build(i.q, i.c, e, kind)).objective
                for e in np.linspace(0.2, 1.0, 5) * i.epsilon]
        assert all(b >= a - 1e-12 for a, b in zip(objs, objs[1:]))
