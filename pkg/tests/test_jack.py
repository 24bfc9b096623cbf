import numpy as np
import pytest

from eulshape.jack import (
    JackEvaluator,
    eval_c2,
    evaluator,
    jack_C_2d,
    jack_C_identity,
)
from eulshape.partitions import Partition, partitions_of

ALPHAS = (0.5, 1.0, 2.0)


class TestJackJ:
    def test_identity_value_frozen(self):
        ev = JackEvaluator(2.0)
        # alpha^k prod ((m-i+1)/alpha)_{k_i} at m = 2, kappa = (2): 4 * (1)_2 = 8
        assert ev.jack_J((2,), (1.0, 1.0)) == pytest.approx(8.0, rel=1e-12)

    def test_too_long_partition_is_zero(self):
        ev = JackEvaluator(2.0)
        assert ev.jack_J((1, 1, 1), (0.3, -1.2)) == 0.0

    def test_single_box_is_sum(self):
        ev = JackEvaluator(2.0)
        # J_(1) = M_(1); the all-ones condition forces coefficient 1
        assert ev.jack_J((1,), (0.7, -0.2, 1.1)) == pytest.approx(1.6, rel=1e-12)

    def test_matches_condition2_at_ones(self):
        for alpha in ALPHAS:
            ev = evaluator(alpha)
            for m in (1, 2, 3):
                ones = (1.0,) * m
                for k in range(1, 7):
                    for p in partitions_of(k, m):
                        expected = alpha ** k
                        for i, part in enumerate(p, start=1):
                            base = (m - i + 1) / alpha
                            for j in range(part):
                                expected *= base + j
                        assert ev.jack_J(p, ones) == pytest.approx(expected, rel=1e-10)

    def test_restriction_stability(self):
        # appending a zero eigenvalue never changes the value
        rng = np.random.default_rng(5)
        ev = evaluator(2.0)
        for _ in range(20):
            eigs = tuple(rng.uniform(-2, 2, size=2))
            for k in range(1, 6):
                for p in partitions_of(k, 2):
                    a = ev.jack_J(p, eigs)
                    b = ev.jack_J(p, eigs + (0.0,))
                    assert a == pytest.approx(b, rel=1e-10, abs=1e-12)

    def test_alpha_nonpositive_rejected(self):
        with pytest.raises(ValueError):
            JackEvaluator(0.0)
        with pytest.raises(ValueError):
            JackEvaluator(-1.0)


class TestJackC:
    def test_frozen_values(self):
        ev = JackEvaluator(2.0)
        assert ev.jack_C((2,), (1.0, 1.0)) == pytest.approx(8.0 / 3.0, rel=1e-12)
        assert ev.jack_C((1, 1), (1.0, 1.0)) == pytest.approx(4.0 / 3.0, rel=1e-12)

    def test_single_box_is_trace(self):
        rng = np.random.default_rng(11)
        for alpha in ALPHAS:
            ev = evaluator(alpha)
            eigs = tuple(rng.uniform(-2, 2, size=3))
            assert ev.jack_C((1,), eigs) == pytest.approx(sum(eigs), rel=1e-12)

    def test_empty_partition_is_one(self):
        assert evaluator(2.0).jack_C((), (0.4, 0.5)) == 1.0

    def test_sum_rule(self):
        rng = np.random.default_rng(7)
        for alpha in ALPHAS:
            ev = evaluator(alpha)
            for m in (1, 2, 3):
                for _ in range(5):
                    eigs = tuple(rng.uniform(-2, 2, size=m))
                    tr = sum(eigs)
                    for k in range(1, 6):
                        total = sum(ev.jack_C(p, eigs) for p in partitions_of(k, m))
                        assert total == pytest.approx(
                            tr ** k, rel=1e-10, abs=1e-10 * max(1.0, abs(tr) ** k)
                        )


class TestIdentityClosedForm:
    def test_frozen(self):
        assert jack_C_identity(2.0, (1,), 2) == pytest.approx(2.0)
        assert jack_C_identity(2.0, (2,), 2) == pytest.approx(8.0 / 3.0)
        assert jack_C_identity(1.0, (1,), 3) == pytest.approx(3.0)

    def test_matches_oracle_at_ones(self):
        for alpha in ALPHAS:
            ev = evaluator(alpha)
            for m in (1, 2, 3):
                for k in range(0, 7):
                    for p in partitions_of(k, m):
                        assert jack_C_identity(alpha, p, m) == pytest.approx(
                            ev.jack_C(p, (1.0,) * m), rel=1e-10
                        )


class TestClosedForm2d:
    def test_frozen_values(self):
        assert jack_C_2d(2.0, (2,), 1.0, 1.0) == pytest.approx(8.0 / 3.0, rel=1e-12)
        y1, y2 = 0.83, -0.41
        assert jack_C_2d(2.0, (1,), y1, y2) == pytest.approx(y1 + y2, rel=1e-12)
        assert jack_C_2d(2.0, (1, 1), y1, y2) == pytest.approx(4.0 / 3.0 * y1 * y2, rel=1e-12)

    def test_matches_oracle_randomly(self):
        rng = np.random.default_rng(3)
        for alpha in ALPHAS:
            ev = evaluator(alpha)
            for _ in range(40):
                y1, y2 = rng.uniform(-2, 2, size=2)
                k = int(rng.integers(1, 9))
                for p in partitions_of(k, 2):
                    ref = ev.jack_C(p, (y1, y2))
                    val = jack_C_2d(alpha, p, y1, y2)
                    assert val == pytest.approx(ref, rel=1e-9, abs=1e-9)

    def test_degenerate_zero_eigenvalue(self):
        # y1*y2 = 0 is handled without the singular series argument
        ev = evaluator(2.0)
        for p in ((3,), (2, 1), (4, 2)):
            want = ev.jack_C(p, (0.9, 0.0))
            assert jack_C_2d(2.0, p, 0.9, 0.0) == pytest.approx(want, rel=1e-10, abs=1e-12)

    def test_equal_eigenvalues(self):
        ev = evaluator(1.0)
        for p in ((2,), (3, 1), (2, 2)):
            want = ev.jack_C(p, (0.6, 0.6))
            assert jack_C_2d(1.0, p, 0.6, 0.6) == pytest.approx(want, rel=1e-10)

    def test_alpha_restricted(self):
        with pytest.raises(ValueError):
            jack_C_2d(0.7, (1,), 0.5, 0.5)

    def test_vectorized_kernel_matches_scalar(self):
        rng = np.random.default_rng(9)
        y1 = rng.uniform(-1.5, 1.5, size=32)
        y2 = rng.uniform(-1.5, 1.5, size=32)
        e1, e2 = y1 + y2, y1 * y2
        for p in ((3,), (2, 1), (3, 3), (5, 2)):
            batch = eval_c2(2.0, p, e1, e2)
            for i in range(len(y1)):
                assert batch[i] == pytest.approx(jack_C_2d(2.0, p, y1[i], y2[i]), rel=1e-12)


class TestDifferentialEquation:
    """Second-order finite-difference residual of the defining eigen-equation."""

    @staticmethod
    def residual(ev, p, eigs, h=1e-5):
        p = Partition(p)
        m = len(eigs)
        f0 = ev.jack_J(p, eigs)
        lhs = 0.0
        for i in range(m):
            up = list(eigs)
            dn = list(eigs)
            up[i] += h
            dn[i] -= h
            fp, fm = ev.jack_J(p, up), ev.jack_J(p, dn)
            d1 = (fp - fm) / (2 * h)
            d2 = (fp - 2 * f0 + fm) / (h * h)
            lhs += eigs[i] ** 2 * d2
            cross = sum(1.0 / (eigs[i] - eigs[j]) for j in range(m) if j != i)
            lhs += (2.0 / ev.alpha) * eigs[i] ** 2 * cross * d1
        eig = sum(
            part * (part - 1 + (2.0 / ev.alpha) * (m - i))
            for i, part in enumerate(p, start=1)
        )
        rhs = eig * f0
        return abs(lhs - rhs) / max(1.0, abs(rhs))

    def test_residual_small(self):
        points = {2: (0.7, 1.9), 3: (0.5, 1.2, 2.1)}
        for alpha in ALPHAS:
            ev = evaluator(alpha)
            for m, eigs in points.items():
                for k in range(1, 6):
                    for p in partitions_of(k, m):
                        assert self.residual(ev, p, eigs) <= 1e-4
