import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mssrel.errors import CapacityError, ParameterDomainError
from mssrel.reliability import (MAX_K, SystemSpec, grad_r, hess_r, linex_w_bundle, r_sk,
                                r_sk_oracle)

GRID_SHAPES = (0.5, 1.0, 2.0, 4.0)
GRID_SPECS = [SystemSpec(*sk) for sk in ((1, 3), (2, 4), (3, 6), (4, 6))]

shapes = st.floats(0.05, 50)
specs = st.integers(1, 12).flatmap(lambda k: st.tuples(st.integers(1, k), st.just(k)))


class TestSystemSpec:
    def test_parse_and_str(self):
        sp = SystemSpec.parse("2,4")
        assert (sp.s, sp.k) == (2, 4) and str(sp) == "(2,4)"

    @pytest.mark.parametrize("s,k", [(0, 3), (4, 3), (-1, 2)])
    def test_invalid(self, s, k):
        with pytest.raises(ParameterDomainError):
            SystemSpec(s, k)

    def test_capacity(self):
        SystemSpec(1, MAX_K)
        with pytest.raises(CapacityError):
            SystemSpec(1, MAX_K + 1)


class TestClosedForm:
    @pytest.mark.parametrize("a1,a2,s,k,expected", [
        (2, 4, 2, 4, 0.80),
        (1, 2, 1, 3, 0.90),
        (1, 2, 2, 3, 0.70),
        (3.3, 3.3, 1, 1, 0.5),
    ])
    def test_known_values(self, a1, a2, s, k, expected):
        assert r_sk(a1, a2, SystemSpec(s, k)) == pytest.approx(expected, abs=1e-12)

    def test_one_of_one(self):
        assert r_sk(1, 2, SystemSpec(1, 1)) == pytest.approx(2 / 3, abs=1e-14)

    def test_vectorised(self):
        a1 = np.array([1.0, 2.0, 0.5])
        a2 = np.array([2.0, 4.0, 2.0])
        sp = SystemSpec(2, 5)
        out = r_sk(a1, a2, sp)
        assert out.shape == (3,)
        np.testing.assert_allclose(out, [r_sk(x, y, sp) for x, y in zip(a1, a2)], rtol=1e-13)

    def test_large_k_stays_in_unit_interval(self):
        for s in (1, 10, 20, 30):
            v = r_sk(1.0, 1.0, SystemSpec(s, 30))
            assert 0 < v < 1

    def test_rejects_nonpositive(self):
        with pytest.raises(ParameterDomainError):
            r_sk(0.0, 1.0, SystemSpec(1, 2))


class TestOracle:
    @pytest.mark.parametrize("sp", GRID_SPECS, ids=str)
    def test_grid(self, sp):
        for a1, a2 in itertools.product(GRID_SHAPES, repeat=2):
            assert abs(r_sk(a1, a2, sp) - r_sk_oracle(a1, a2, sp)) <= 1e-8

    def test_binomial_integral(self):
        # E[3U - 2U^{3/2}] = 3/2 - 4/5 for (1,2),(2,3)
        assert r_sk_oracle(1, 2, SystemSpec(2, 3)) == pytest.approx(1.5 - 0.8, abs=1e-10)

    @given(shapes, shapes, specs)
    @settings(max_examples=60, deadline=None)
    def test_random(self, a1, a2, sk):
        sp = SystemSpec(*sk)
        assert abs(r_sk(a1, a2, sp) - r_sk_oracle(a1, a2, sp)) <= 1e-8


class TestProperties:
    @given(shapes, shapes, specs, st.floats(0.01, 100))
    @settings(max_examples=200, deadline=None)
    def test_homogeneous_degree_zero(self, a1, a2, sk, c):
        sp = SystemSpec(*sk)
        assert r_sk(c * a1, c * a2, sp) == pytest.approx(r_sk(a1, a2, sp), abs=1e-10)

    @given(st.floats(0.1, 10), st.floats(0.1, 10), specs)
    @settings(max_examples=150, deadline=None)
    def test_monotone_in_shapes(self, a1, a2, sk):
        sp = SystemSpec(*sk)
        base = r_sk(a1, a2, sp)
        assert r_sk(a1, a2 * 1.1, sp) > base
        assert r_sk(a1 * 1.1, a2, sp) < base

    @pytest.mark.parametrize("a1,a2", [(2, 4), (1, 2), (0.5, 2)])
    def test_monotone_in_s_and_k(self, a1, a2):
        k = 8
        vals = [r_sk(a1, a2, SystemSpec(s, k)) for s in range(1, k + 1)]
        assert all(x > y for x, y in zip(vals, vals[1:]))
        vals = [r_sk(a1, a2, SystemSpec(2, k)) for k in range(2, 12)]
        assert all(x < y for x, y in zip(vals, vals[1:]))


def _rel(a, b):
    return abs(a - b) / max(abs(b), 1e-12)


class TestDerivatives:
    def test_gradient_one_of_one(self):
        w1, w2 = grad_r(1, 1, SystemSpec(1, 1))
        assert (w1, w2) == pytest.approx((-0.25, 0.25), abs=1e-14)
        assert hess_r(1, 1, SystemSpec(1, 1))[0] == pytest.approx(0.25, abs=1e-14)

    @pytest.mark.parametrize("sp", GRID_SPECS + [SystemSpec(2, 5), SystemSpec(3, 5)], ids=str)
    @pytest.mark.parametrize("a1,a2", [(2, 4), (0.5, 2), (1.3, 0.7)])
    def test_finite_differences(self, sp, a1, a2):
        h = 1e-5
        w1, w2 = grad_r(a1, a2, sp)
        fd1 = (r_sk(a1 + h, a2, sp) - r_sk(a1 - h, a2, sp)) / (2 * h)
        fd2 = (r_sk(a1, a2 + h, sp) - r_sk(a1, a2 - h, sp)) / (2 * h)
        assert _rel(w1, fd1) < 1e-5 and _rel(w2, fd2) < 1e-5
        w11, w12, w22 = hess_r(a1, a2, sp)
        g = lambda x, y: np.array(grad_r(x, y, sp))
        c1 = (g(a1 + h, a2) - g(a1 - h, a2)) / (2 * h)
        c2 = (g(a1, a2 + h) - g(a1, a2 - h)) / (2 * h)
        assert _rel(w11, c1[0]) < 1e-5
        assert _rel(w12, c1[1]) < 1e-5 and _rel(w12, c2[0]) < 1e-5
        assert _rel(w22, c2[1]) < 1e-5

    @given(shapes, shapes, specs)
    @settings(max_examples=150, deadline=None)
    def test_euler_identity(self, a1, a2, sk):
        w1, w2 = grad_r(a1, a2, SystemSpec(*sk))
        scale = abs(a1 * w1) + abs(a2 * w2) + 1e-300
        assert abs(a1 * w1 + a2 * w2) <= 1e-10 * max(1.0, scale)


class TestLinexBundle:
    def test_value(self):
        w = linex_w_bundle(1, 1, SystemSpec(1, 1), 1.0)
        assert w.w == pytest.approx(math.exp(-0.5))
        assert linex_w_bundle(1, 1, SystemSpec(1, 1), -1.0).w == pytest.approx(1 / w.w)

    def test_zero_c(self):
        with pytest.raises(ParameterDomainError):
            linex_w_bundle(1, 1, SystemSpec(1, 1), 0.0)

    @pytest.mark.parametrize("c", [-1.0, 1.0, 1.5])
    def test_finite_differences(self, c):
        sp, a1, a2, h = SystemSpec(2, 4), 2.0, 4.0, 1e-5
        f = lambda x, y: math.exp(-c * r_sk(x, y, sp))
        b = linex_w_bundle(a1, a2, sp, c)
        assert _rel(b.w1, (f(a1 + h, a2) - f(a1 - h, a2)) / (2 * h)) < 1e-6
        assert _rel(b.w2, (f(a1, a2 + h) - f(a1, a2 - h)) / (2 * h)) < 1e-6
        h2 = 1e-4
        w11 = (f(a1 + h2, a2) - 2 * f(a1, a2) + f(a1 - h2, a2)) / h2**2
        w22 = (f(a1, a2 + h2) - 2 * f(a1, a2) + f(a1, a2 - h2)) / h2**2
        w12 = (f(a1 + h2, a2 + h2) - f(a1 + h2, a2 - h2) - f(a1 - h2, a2 + h2) + f(a1 - h2, a2 - h2)) / (4 * h2**2)
        assert _rel(b.w11, w11) < 1e-4 and _rel(b.w22, w22) < 1e-4 and _rel(b.w12, w12) < 1e-4
