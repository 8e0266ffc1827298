import json
import math
import warnings

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from liereach.closure import ClosureTrace
from liereach.proxy import (
    TOP,
    DegenerateFitError,
    DegenerateFitWarning,
    ProxyModel,
    backtest,
    fit_curve,
    fit_proxy,
    p_min_schedule,
    predict,
)


def trace(rank_k, k=3, final=None):
    final = rank_k if final is None else final
    ranks = tuple(range(1, k + 1)) + (rank_k, final, final)
    return ClosureTrace(4, ranks, False)


rank_lists = st.lists(st.integers(1, 200), min_size=3, max_size=40)


class TestCurve:
    def test_anchors(self):
        c = fit_curve(3, [10, 20, 30, 40, 100], 0.4)
        assert c(c.x_min) == pytest.approx(0.4, abs=1e-12)
        assert c.f(c.x_min) == pytest.approx(0.4, rel=1e-9)
        assert c(c.a) == 1.0 and c(c.a + 5) == 1.0
        assert c.f(c.a - 1e-9) == pytest.approx(TOP, rel=1e-6)

    def test_interpolates_between_nodes(self):
        c = fit_curve(3, [10, 20, 30, 40, 100], 0.4)
        mid = 0.5 * (c(10) + c(20))
        assert c(15) == pytest.approx(mid, abs=1e-12)

    def test_closed_form(self):
        c = fit_curve(5, [1, 2, 3, 10], 0.3)
        q1, q2 = 1 / 0.3 - 1, 1 / TOP - 1
        beta = (math.log(q2) - math.log(q1)) / (4.0 - 1.0)
        assert c.beta == pytest.approx(beta)
        assert c.alpha == pytest.approx(q1 * math.exp(-beta * 1.0))

    @given(rank_lists, st.floats(0.05, 0.95))
    def test_monotone_and_bounded(self, ranks, p_min):
        r = np.array(ranks, dtype=float)
        assume(np.unique(r[r < r.mean()]).size >= 2)
        c = fit_curve(4, ranks, p_min)
        xs = np.linspace(min(ranks) - 5, max(ranks) + 5, 200)
        vals = np.array([c(x) for x in xs])
        assert np.all(vals >= 0) and np.all(vals <= 1)
        assert np.all(np.diff(vals) >= -1e-12)
        assert c(max(ranks)) == 1.0

    def test_degenerate_warns(self):
        with pytest.warns(DegenerateFitWarning):
            c = fit_curve(2, [5, 5, 5, 60], 0.3)
        assert c.step and c(5) == 0.3 and c(60) == 1.0

    def test_degenerate_strict(self):
        with pytest.raises(DegenerateFitError):
            fit_curve(2, [7, 7, 7], 0.3, strict=True)

    def test_empty(self):
        with pytest.raises(ValueError):
            fit_curve(1, [], 0.5)


class TestSchedule:
    def test_endpoints(self):
        assert p_min_schedule(1, 1, 13) == pytest.approx(0.25)
        assert p_min_schedule(13, 1, 13) == pytest.approx(0.95)
        assert p_min_schedule(7, 1, 13) == pytest.approx(0.6)

    @given(st.integers(-5, 30))
    def test_clamped(self, m):
        assert 0.25 <= p_min_schedule(m, 1, 13) <= 0.95


class TestModel:
    def data(self):
        rng = np.random.default_rng(0)
        out = []
        for m in (2, 3, 4):
            for _ in range(60):
                x = int(rng.integers(10, 40))
                out.append((m, trace(x, final=61 if x > 25 else 40), x > 25))
        return out

    def test_fit_and_roundtrip(self):
        model = fit_proxy(self.data(), k=3)
        assert sorted(model.curves) == [2, 3, 4]
        again = ProxyModel.from_dict(json.loads(model.to_json()))
        assert again == model
        for x in (10, 17.5, 33):
            assert predict(again, x, 3) == predict(model, x, 3)

    def test_predict_unknown_m(self):
        with pytest.raises(KeyError):
            predict(fit_proxy(self.data()), 20, 9)

    def test_backtest_counts(self):
        data = self.data()
        model = fit_proxy(data)
        err, rows = backtest(model, data)
        assert sum(r["count"] for r in rows) == len(data)
        w = sum(abs(r["predicted"] - r["empirical"]) * r["count"] for r in rows) / len(data)
        assert err == pytest.approx(w)
        assert 0 <= err <= 1

    def test_backtest_needs_overlap(self):
        model = fit_proxy(self.data())
        with pytest.raises(ValueError):
            backtest(model, [(9, trace(5), False)])

    def test_k_validation(self):
        with pytest.raises(ValueError):
            fit_proxy(self.data(), k=0)

    def test_degenerate_reported(self):
        data = [(1, trace(3), False)] * 5 + [(1, trace(9), True)]
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", DegenerateFitWarning)
            model = fit_proxy(data)
        assert model.degenerate == [1]
