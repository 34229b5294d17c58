import math

import numpy as np
import pytest

from adaptive_teleport.analytics import p_adaptive_double, p_identical_chain_closed
from adaptive_teleport.errors import DomainError, NonFiniteObjective, OddNError
from adaptive_teleport.optimizer import (
    asymmetric_scan,
    crossover_M,
    golden_section_max,
    maximize_over_q,
    optimal_identical,
    table1,
)

TABLE = {
    2: (1.29663, 0.454167),
    4: (1.20892, 0.652198),
    6: (1.15822, 0.746252),
    8: (1.12682, 0.800565),
    10: (1.10569, 0.835820),
}


def dense_identical_chain(M, q):
    # independent vectorized evaluation of the binomial min-sum
    total = sum(math.comb(M, i) * np.minimum(q ** (M - i), q**i) for i in range(M + 1))
    return total / (2 + q) ** M


class TestGoldenSection:
    def test_parabola(self):
        q, f, _, converged = golden_section_max(lambda x: -(x - 1.7) ** 2, 1.0, 3.0, 1e-9)
        assert converged
        assert q == pytest.approx(1.7, abs=1e-8)

    def test_endpoint_maximum(self):
        q, f, _, _ = golden_section_max(lambda x: x, 1.0, 2.0)
        assert q == pytest.approx(2.0, abs=1e-6)


class TestMaximize:
    def test_n2_bracket(self):
        res = maximize_over_q(lambda q: p_adaptive_double(2, q), 1.0, 2.0)
        assert res.q_opt == pytest.approx(1.29663, abs=1e-4)
        assert res.p_opt == pytest.approx(0.454167, abs=1e-5)
        assert res.converged

    def test_n4(self):
        res = maximize_over_q(lambda q: p_adaptive_double(4, q))
        assert res.q_opt == pytest.approx(1.20892, abs=1e-4)
        assert res.p_opt == pytest.approx(0.652198, abs=1e-5)

    def test_identical_two_steps_is_maximal(self):
        res = maximize_over_q(lambda q: p_identical_chain_closed(2, q), 0.5, 3.0)
        assert res.q_opt == pytest.approx(1.0, abs=1e-4)
        # the maximum sits on a kink, so p is only as good as q
        assert res.p_opt == pytest.approx(4 / 9, abs=1e-6)

    @pytest.mark.parametrize("objective,lo,hi", [
        (lambda q: p_adaptive_double(2, q), 1.0, 4.0),
        (lambda q: p_adaptive_double(10, q), 0.5, 3.0),
        (lambda q: p_identical_chain_closed(6, q), 1.0, 16.0),
        (lambda q: p_identical_chain_closed(3, q), 0.5, 3.0),
    ])
    def test_soundness(self, objective, lo, hi):
        res = maximize_over_q(objective, lo, hi)
        assert lo <= res.q_opt <= hi
        assert res.bracket[0] >= lo and res.bracket[1] <= hi
        assert abs(res.p_opt - objective(res.q_opt)) < 1e-12
        for q in np.linspace(lo, hi, 10_000):
            assert res.p_opt >= objective(float(q)) - 1e-10

    def test_multimodal_objective(self):
        # narrow spike away from a broad bump: the scan must find it
        def f(q):
            return math.exp(-((q - 1.2) ** 2)) + 2 * math.exp(-((q - 3.5) / 0.02) ** 2)

        res = maximize_over_q(f, 1.0, 4.0)
        assert res.q_opt == pytest.approx(3.5, abs=1e-5)

    def test_non_finite(self):
        with pytest.raises(NonFiniteObjective):
            maximize_over_q(lambda q: float("nan"), 1.0, 2.0)

    @pytest.mark.parametrize("lo,hi", [(0.0, 1.0), (2.0, 1.0), (-1.0, 2.0)])
    def test_bad_bracket(self, lo, hi):
        with pytest.raises(DomainError):
            maximize_over_q(lambda q: q, lo, hi)

    def test_too_few_grid_points(self):
        with pytest.raises(DomainError):
            maximize_over_q(lambda q: q, 1.0, 2.0, grid_points=10)


class TestTable1:
    def test_rows(self):
        rows = table1(sorted(TABLE))
        assert [r.n for r in rows] == sorted(TABLE)
        for r in rows:
            q, p = TABLE[r.n]
            assert r.q_opt == pytest.approx(q, abs=1e-3)
            assert r.p_opt == pytest.approx(p, abs=1e-5)
            assert r.p_maximal == pytest.approx((r.n / (r.n + 1)) ** 2, abs=1e-9)

    def test_maximal_column(self):
        rows = {r.n: r for r in table1([6, 8])}
        assert rows[6].p_maximal == pytest.approx(0.734694, abs=1e-6)
        assert rows[8].p_maximal == pytest.approx(0.790123, abs=1e-6)

    def test_adaptive_beats_maximal_at_n2(self):
        assert p_adaptive_double(2, 1.0) == pytest.approx(0.444444, abs=1e-6)
        assert table1([2])[0].p_opt > p_adaptive_double(2, 1.0)

    def test_rejects(self):
        with pytest.raises(OddNError):
            table1([3])
        with pytest.raises(DomainError):
            table1([34])


class TestCrossover:
    rows = None

    @classmethod
    def setup_class(cls):
        cls.rows = {r.M: r for r in crossover_M(10)}

    @pytest.mark.parametrize("M", [1, 2, 3, 4, 5])
    def test_maximal_below_six(self, M):
        assert self.rows[M].q_opt == pytest.approx(1.0, abs=1e-4)
        assert not self.rows[M].nonmaximal

    @pytest.mark.parametrize("M", [6, 7, 8, 9, 10])
    def test_nonmaximal_from_six(self, M):
        row = self.rows[M]
        assert row.q_opt > 1 + 1e-3
        assert row.nonmaximal
        assert row.p_opt > p_identical_chain_closed(M, 1.0)

    @pytest.mark.parametrize("M", [6, 7, 8, 9, 10])
    def test_dense_grid_agrees(self, M):
        grid = np.geomspace(1.0, 16.0, 100_000)
        vals = dense_identical_chain(M, grid)
        i = int(np.argmax(vals))
        step = grid[min(i + 1, grid.size - 1)] - grid[max(i - 1, 0)]
        assert abs(self.rows[M].q_opt - grid[i]) <= step
        assert self.rows[M].p_opt >= vals[i] - 1e-12

    def test_rejects_short_sweep(self):
        with pytest.raises(DomainError):
            crossover_M(5)


def test_optimal_identical_both_routes():
    # closed form for n = 2, enumeration of peaked chains otherwise
    closed = optimal_identical(2, 6)
    assert closed.q_opt > 1.0
    enum = optimal_identical(4, 2, hi=4.0)
    assert enum.q_opt == pytest.approx(1.0, abs=1e-4)


def test_asymmetric_scan_does_not_beat_symmetric():
    res = asymmetric_scan(3, steps=25)
    # symmetric optimum is a kink at q = 1, located to optimizer precision
    assert res.p_best <= res.p_best_symmetric + 1e-6
    assert math.fsum(res.weights) == pytest.approx(1.0)
