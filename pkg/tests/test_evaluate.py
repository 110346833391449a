import random

import pytest

from citescreen.evaluate import (
    ConfusionCounts,
    CurvePoint,
    aggregate_topics,
    confusion,
    macro_average,
    pr_curve,
    precision_at_k,
    prf,
)
from citescreen.rank import RankedResult


def _ranked(pmids):
    return [RankedResult(p, 0.0, 0.0, 0.0, 1.0 / (i + 1))
            for i, p in enumerate(pmids)]


class TestPrf:
    def test_basic(self):
        p, r, f = prf(ConfusionCounts(tp=4, fp=1, fn=1))
        assert p == pytest.approx(0.8)
        assert r == pytest.approx(0.8)
        assert f == pytest.approx(0.8)

    def test_zero_over_zero(self):
        assert prf(ConfusionCounts()) == (0.0, 0.0, 0.0)
        assert prf(ConfusionCounts(fp=3)) == (0.0, 0.0, 0.0)
        assert prf(ConfusionCounts(fn=3)) == (0.0, 0.0, 0.0)

    def test_negative_counts_rejected(self):
        with pytest.raises(ValueError):
            ConfusionCounts(tp=-1)


class TestConfusion:
    def test_counts(self):
        c = confusion([1, 2, 3], {2, 3, 4, 5})
        assert (c.tp, c.fp, c.fn) == (2, 1, 2)

    def test_duplicates_collapse(self):
        c = confusion([1, 1, 2], {1})
        assert (c.tp, c.fp, c.fn) == (1, 1, 0)


class TestPrecisionAtK:
    def test_truncation(self):
        ranked = _ranked([1, 2, 3, 4])
        c = precision_at_k(ranked, {1, 4}, 2)
        assert (c.tp, c.fp, c.fn) == (1, 1, 1)
        # k past the end behaves like the whole list
        c = precision_at_k(ranked, {1, 4}, 10)
        assert (c.tp, c.fp, c.fn) == (2, 2, 0)

    def test_k_below_one_rejected(self):
        with pytest.raises(ValueError):
            precision_at_k(_ranked([1]), {1}, 0)


class TestPrCurve:
    def test_derived_example(self):
        # 10 ranked items, 5 relevant; relevant at ranks 1, 2, 6, 9, 10
        ranked = _ranked([11, 12, 13, 14, 15, 16, 17, 18, 19, 20])
        gold = {11, 12, 16, 19, 20}
        points = pr_curve(ranked, gold, [0.2, 0.6, 1.0])
        assert points[0] == CurvePoint(0.2, 1.0, 0.4)
        assert points[1] == CurvePoint(0.6, 0.5, 0.6)
        assert points[2] == CurvePoint(1.0, 0.5, 1.0)

    def test_full_cutoff_matches_prf(self):
        ranked = _ranked([1, 2, 3, 4, 5])
        gold = {2, 5, 9}
        (point,) = pr_curve(ranked, gold, [1.0])
        p, r, _ = prf(confusion([r.pmid for r in ranked], gold))
        assert (point.precision, point.recall) == (p, r)

    def test_cutoffs_sorted_in_output(self):
        ranked = _ranked([1, 2])
        points = pr_curve(ranked, {1}, [1.0, 0.5])
        assert [pt.cutoff_fraction for pt in points] == [0.5, 1.0]

    def test_bad_fraction(self):
        with pytest.raises(ValueError):
            pr_curve(_ranked([1]), {1}, [0.0])
        with pytest.raises(ValueError):
            pr_curve(_ranked([1]), {1}, [1.5])

    def test_empty_ranking(self):
        (point,) = pr_curve([], {1, 2}, [1.0])
        assert (point.precision, point.recall) == (0.0, 0.0)

    def test_recall_monotone_in_cutoff(self):
        rng = random.Random(20240817)
        for _ in range(30):
            n = rng.randint(1, 30)
            pmids = list(range(n))
            rng.shuffle(pmids)
            gold = set(rng.sample(range(n), rng.randint(0, n)))
            cutoffs = [i / 10 for i in range(1, 11)]
            points = pr_curve(_ranked(pmids), gold, cutoffs)
            recalls = [pt.recall for pt in points]
            assert recalls == sorted(recalls)


class TestAggregation:
    COUNTS = [
        ConfusionCounts(tp=4, fp=1, fn=1),
        ConfusionCounts(tp=2, fp=6, fn=2),
    ]

    def test_micro(self):
        p, r, f = aggregate_topics(self.COUNTS)
        assert p == pytest.approx(6 / 13)
        assert r == pytest.approx(6 / 9)
        assert f == pytest.approx(2 * (6 / 13) * (6 / 9) / (6 / 13 + 6 / 9))

    def test_macro(self):
        p, r, f = macro_average(self.COUNTS)
        assert p == pytest.approx((0.8 + 0.25) / 2)
        assert r == pytest.approx((0.8 + 0.5) / 2)

    def test_permutation_invariance(self):
        forward = aggregate_topics(self.COUNTS)
        backward = aggregate_topics(list(reversed(self.COUNTS)))
        assert forward == backward
        assert macro_average(self.COUNTS) == macro_average(
            list(reversed(self.COUNTS)))

    def test_empty(self):
        assert aggregate_topics([]) == (0.0, 0.0, 0.0)
        assert macro_average([]) == (0.0, 0.0, 0.0)
