import math

import numpy as np
import pytest

from meanlab.quadrature import QuadratureRule
from meanlab.simplex import nelder_mead


class TestQuadratureRule:
    @pytest.mark.parametrize("n", [2, 5, 32, 64])
    def test_weights(self, n):
        rule = QuadratureRule(n)
        assert np.all(rule.unit_weights > 0)
        _, w = rule.panel(0.2, 0.7)
        assert abs(w.sum() - 0.5) < 1e-14

    @pytest.mark.parametrize("k", range(8))
    def test_polynomial_exactness(self, k):
        rule = QuadratureRule(4)
        got = rule.integrate(lambda x: x ** k, 0.25, 1.0)
        assert got == pytest.approx((1 - 0.25 ** (k + 1)) / (k + 1), rel=1e-14)

    def test_exponential(self):
        got = QuadratureRule(32).integrate(lambda x: 9.0 ** x)
        assert got == pytest.approx(8.0 / math.log(9.0), rel=1e-15)

    def test_too_few_nodes(self):
        with pytest.raises(ValueError):
            QuadratureRule(1)


class TestNelderMead:
    def test_quadratic(self):
        f = lambda x: (x[0] - 1.0) ** 2 + 3 * (x[1] + 0.5) ** 2
        res = nelder_mead(f, [3.0, 3.0], [-5, -5], [5, 5], step=0.5, max_iter=2000)
        np.testing.assert_allclose(res.x, [1.0, -0.5], atol=1e-6)
        assert res.converged

    def test_clamps_to_box(self):
        res = nelder_mead(lambda x: x[0], [0.5], [0.0], [1.0], step=0.1, max_iter=200)
        assert res.x[0] == 0.0

    def test_budget_zero(self):
        res = nelder_mead(lambda x: float(np.sum(x ** 2)), [0.3, 0.4], [-1, -1], [1, 1], max_iter=0)
        np.testing.assert_array_equal(res.x, [0.3, 0.4])
        assert res.evaluations == 1

    def test_never_worse_than_start(self):
        f = lambda x: abs(x[0]) + abs(x[1])
        res = nelder_mead(f, [0.0, 0.0], [-1, -1], [1, 1], step=0.2, max_iter=50)
        np.testing.assert_array_equal(res.x, [0.0, 0.0])
        assert res.fun == 0.0

    def test_nan_is_rejected(self):
        f = lambda x: math.nan if x[0] > 0.1 else (x[0] + 1) ** 2
        res = nelder_mead(f, [0.0], [-2], [2], step=0.5, max_iter=200)
        assert res.x[0] == pytest.approx(-1.0, abs=1e-6)
