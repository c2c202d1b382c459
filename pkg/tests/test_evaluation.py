import json
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from buildstream.adwin import AdwinDetector
from buildstream.evaluation import (
    MajorityClassLearner,
    PhaseSpec,
    PrequentialRecord,
    attribute_churn,
    compare_models,
    confusion_rates,
    cumulative_rate_series,
    describe,
    format_p,
    one_way_anova,
    phase_stats,
    prequential_run,
)
from buildstream.exceptions import DegenerateVariance, EmptyCurrentTree, EmptyPhase, UndefinedRate
from buildstream.hoeffding import HoeffdingTree
from buildstream.metrics import AVG_ATTRIBUTES_PER_CLASS, NUM_INTERFACES, BuildOutcome
from buildstream.evaluation import ModelComparison
from buildstream.streams import BuildDataset, make_sequences
from buildstream.synth import generate_stream, jazz_like_script
from buildstream.tree import TreeShape, tree_shape
from conftest import two_split_root, one_split_root, make_instances

S, F = BuildOutcome.SUCCESS, BuildOutcome.FAILURE


def records_from(actual, predicted):
    return [PrequentialRecord(i + 1, f"b{i}", p, a, 0.0) for i, (a, p) in enumerate(zip(actual, predicted))]


# ------------------------------------------------------------ prequential

def test_record_count_and_order():
    data = generate_stream(jazz_like_script(seed=1, drift_at=None), 198)
    seq = make_sequences(data, 10, 20)[-1]

    class Spy(MajorityClassLearner):
        def __init__(self):
            super().__init__()
            self.log = []

        def learn_one(self, inst):
            self.log.append(("learn", inst.build_id))
            return super().learn_one(inst)

        def predict(self, metrics):
            self.log.append(("predict", None))
            return super().predict(metrics)

    spy = Spy()
    run = prequential_run(spy, None, seq)
    assert len(run.records) == 178
    assert run.records[0].stream_index == 21 and run.records[-1].stream_index == 198
    pool_log = spy.log[20:]
    assert [k for k, _ in pool_log] == ["predict", "learn"] * 178


def test_majority_on_alternating_stream():
    X = np.zeros((2000, 42))
    y = np.arange(2000) % 2
    insts = make_instances(X, y)
    run = prequential_run(MajorityClassLearner(), None, (insts[:20], insts[20:]))
    assert run.accuracy == pytest.approx(0.5, abs=0.01)


def test_cumulative_accuracy_recount():
    data = generate_stream(jazz_like_script(seed=2, noise_rate=0.1), 1500)
    run = prequential_run(HoeffdingTree(), AdwinDetector(0.01), (list(data[:20]), list(data[20:])))
    correct = 0
    for t, r in enumerate(run.records, 1):
        correct += r.predicted == r.actual
        assert r.cumulative_accuracy == correct / t
    assert sum(r.drift_flag for r in run.records) == len(run.drift_log)


def test_prequential_deterministic():
    data = generate_stream(jazz_like_script(seed=3, noise_rate=0.05), 1200)
    runs = [prequential_run(HoeffdingTree(), AdwinDetector(0.01), (list(data[:20]), list(data[20:])))
            for _ in range(2)]
    assert [r.to_dict() for r in runs[0].records] == [r.to_dict() for r in runs[1].records]
    assert runs[0].drift_log == runs[1].drift_log


def test_checkpoint_snapshots():
    data = generate_stream(jazz_like_script(seed=3), 400)
    run = prequential_run(HoeffdingTree(), AdwinDetector(0.01), (list(data[:20]), list(data[20:])),
                          checkpoints=[20, 160, 400])
    assert sorted(run.snapshots) == [20, 160, 400]
    assert run.snapshots[20].instances_seen == 20
    assert run.snapshots[160].instances_seen == 160


# ------------------------------------------------------------ confusion

def test_confusion_counting():
    actual = [S] * 10 + [F] * 10
    predicted = [S] * 8 + [F] * 2 + [S] * 3 + [F] * 7
    r = confusion_rates(records_from(actual, predicted))
    assert r.tp_success == pytest.approx(0.8) and r.fp_success == pytest.approx(0.3)
    assert r.tp_failure == pytest.approx(0.7) and r.fp_failure == pytest.approx(0.2)


def test_perfect_classifier_rates():
    actual = [S, F, S, F, F]
    r = confusion_rates(records_from(actual, actual))
    assert (r.tp_success, r.fp_success, r.tp_failure, r.fp_failure) == (1.0, 0.0, 1.0, 0.0)


def test_undefined_rates_are_absent():
    r = confusion_rates(records_from([S, S], [S, F]))
    assert r.tp_success == 0.5 and r.fp_success is None and r.tp_failure is None
    with pytest.raises(UndefinedRate):
        r.rate("tp", F)


def test_trailing_window():
    recs = records_from([S] * 10 + [F] * 10, [F] * 10 + [F] * 10)
    assert confusion_rates(recs, window=10).tp_success is None
    assert confusion_rates(recs, window=10).tp_failure == 1.0


def test_phase4_complement_arithmetic():
    # reference phase-4 rate means: tp_failure .562589 / fp_success .437411, fp_failure .186353 / tp_success .813647
    assert 0.562589 + 0.437411 == pytest.approx(1.0, abs=1e-12)
    assert 0.186353 + 0.813647 == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.booleans(), st.booleans()), min_size=2, max_size=80))
def test_complementarity(pairs):
    actual = [S if a else F for a, _ in pairs]
    predicted = [S if p else F for _, p in pairs]
    r = confusion_rates(records_from(actual, predicted))
    if S in actual and F in actual:
        assert r.tp_failure + r.fp_success == pytest.approx(1.0)
        assert r.fp_failure + r.tp_success == pytest.approx(1.0)


def test_cumulative_rate_series_matches_prefixes():
    actual = [S, F, S, S, F, F, S]
    predicted = [S, S, F, S, F, S, S]
    recs = records_from(actual, predicted)
    for k, (_, rates) in enumerate(cumulative_rate_series(recs), 1):
        assert rates == confusion_rates(recs[:k])


# ---------------------------------------------------------------- phases

def test_default_phase_boundaries():
    spec = PhaseSpec.from_cuts(20, (40, 80, 180), 198)
    assert spec.to_list() == [["Phase 1", 21, 40], ["Phase 2", 41, 80], ["Phase 3", 81, 180], ["Phase 4", 181, 198]]
    assert [p.end - p.start + 1 for p in spec.phases] == [20, 40, 100, 18]


def test_constant_phase():
    stats = phase_stats([(i, 0.72) for i in range(181, 199)], PhaseSpec.from_cuts(180, (), 198))[0]
    assert stats.std == 0.0 and stats.ci_lower == pytest.approx(0.72) and stats.ci_upper == pytest.approx(0.72)


def test_single_value_phase_flagged():
    g = describe("p", [0.4])
    assert not g.reliable and g.ci_lower == g.ci_upper == 0.4


def test_three_value_ci_against_closed_form():
    g = describe("p", [0.5, 0.6, 0.7])
    # t(0.975, 2) in closed form: F(t) = 1/2 + t / (2 sqrt(t^2 + 2))
    t975 = math.sqrt(2 * 0.95 ** 2 / (1 - 0.95 ** 2))
    se = 0.1 / math.sqrt(3)
    assert g.mean == pytest.approx(0.6, abs=1e-12)
    assert g.std == pytest.approx(0.1, abs=1e-12)
    assert g.std_error == pytest.approx(0.0577350269, abs=1e-9)
    assert abs(g.ci_lower - (0.6 - t975 * se)) < 1e-6
    assert abs(g.ci_upper - (0.6 + t975 * se)) < 1e-6
    assert g.ci_lower == pytest.approx(0.3516, abs=1e-4) and g.ci_upper == pytest.approx(0.8484, abs=1e-4)


def test_empty_phase():
    with pytest.raises(EmptyPhase):
        phase_stats([(1, 0.5)], PhaseSpec.from_cuts(0, (5,), 10))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=12, max_size=60), st.integers(2, 5))
def test_phase_means_recombine(values, pieces):
    n = len(values)
    cuts = sorted({round(n * k / pieces) for k in range(1, pieces)} - {0, n})
    spec = PhaseSpec.from_cuts(0, cuts, n)
    stats = phase_stats(list(enumerate(values, 1)), spec)
    pooled = sum(g.mean * g.count for g in stats) / sum(g.count for g in stats)
    assert pooled == pytest.approx(np.mean(values), abs=1e-9)
    for g in stats:
        assert g.ci_lower <= g.mean <= g.ci_upper


# ----------------------------------------------------------------- ANOVA

def f_survival_oracle(f, d1, d2):
    """Upper tail of the F distribution by numerical integration of its density."""
    with mpmath.workdps(30):
        d1, d2 = mpmath.mpf(d1), mpmath.mpf(d2)
        const = 1 / mpmath.beta(d1 / 2, d2 / 2) * (d1 / d2) ** (d1 / 2)
        pdf = lambda x: const * x ** (d1 / 2 - 1) * (1 + d1 * x / d2) ** (-(d1 + d2) / 2)
        return float(mpmath.quad(pdf, [f, mpmath.inf]))


def test_anova_reference_case():
    res = one_way_anova([[1, 2, 3], [2, 3, 4], [3, 4, 5]])
    assert res.f == 3.0
    assert (res.df_between, res.df_within) == (2, 6)
    assert abs(res.p_value - f_survival_oracle(3.0, 2, 6)) < 1e-6
    assert res.p_value == pytest.approx(0.125, abs=1e-9)


def test_anova_no_effect():
    res = one_way_anova([[1, 2, 3, 4], [4, 3, 2, 1], [2, 1, 4, 3]])
    assert res.f == pytest.approx(0.0, abs=1e-12) and res.p_value == pytest.approx(1.0)


def test_anova_separated_groups_display_zero():
    res = one_way_anova([[0.50, 0.51, 0.49, 0.50], [0.70, 0.71, 0.69, 0.70], [0.90, 0.91, 0.89, 0.90]])
    assert res.p_value < 1e-6
    assert format_p(res.p_value) == "≈0"
    assert res.to_dict()["p_value"] == res.p_value


def test_anova_degenerate():
    with pytest.raises(DegenerateVariance):
        one_way_anova([[1, 1], [2, 2]])


def test_two_group_anova_equals_pooled_t_squared():
    rng = np.random.default_rng(99)
    for _ in range(50):
        a = rng.normal(0, 1, rng.integers(2, 15))
        b = rng.normal(rng.uniform(-1, 1), rng.uniform(0.5, 2), rng.integers(2, 15))
        na, nb = len(a), len(b)
        sp2 = (((a - a.mean()) ** 2).sum() + ((b - b.mean()) ** 2).sum()) / (na + nb - 2)
        t = (a.mean() - b.mean()) / math.sqrt(sp2 * (1 / na + 1 / nb))
        res = one_way_anova([a, b])
        assert abs(res.f - t * t) < 1e-9 * max(1.0, t * t)
        assert res.contrast(0, 1).t == pytest.approx(t, rel=1e-9)


def test_contrast_uses_pooled_variance():
    res = one_way_anova([[1, 2, 3], [2, 3, 4], [3, 4, 5]], ["a", "b", "c"])
    c = res.contrast("c", "a")
    assert c.mean_difference == 2.0
    assert c.t == pytest.approx(2.0 / math.sqrt(1.0 * (2 / 3)))
    assert c.df == 6
    assert 0 < c.p_value < 0.05


# ----------------------------------------------------------------- churn

def test_churn_hoeffding_anchor():
    r = attribute_churn({AVG_ATTRIBUTES_PER_CLASS}, {AVG_ATTRIBUTES_PER_CLASS, NUM_INTERFACES})
    assert (r.added, r.deleted, r.total, r.churn_percent) == (1, 0, 2, 50.0)


def test_churn_identical_and_j48_like():
    assert attribute_churn({"a", "b"}, {"a", "b"}).churn_percent == 0.0
    r = attribute_churn(set("abcdef"), {"a", "b", "c", "w", "x", "y", "z"})
    assert (r.added, r.deleted, r.total) == (4, 3, 7)
    assert r.churn_percent == 100.0


def test_churn_empty_current():
    with pytest.raises(EmptyCurrentTree):
        attribute_churn({"a"}, set())


@settings(max_examples=80, deadline=None)
@given(st.sets(st.sampled_from("abcdefghij")), st.sets(st.sampled_from("abcdefghij"), min_size=1))
def test_churn_properties(prev, cur):
    r = attribute_churn(prev, cur)
    assert (r.churn_percent == 0) == (prev == cur)
    assert r.added <= r.total
    assert r.churn_percent == pytest.approx((len(cur - prev) + len(prev - cur)) / len(cur) * 100)


def test_compare_models_table_layout():
    j48_160 = TreeShape(4, 8, 9, frozenset("abcdef"))
    j48_180 = TreeShape(6, 9, 10, frozenset("abcwxyz"))
    comp = compare_models([("J48 (160 builds)", j48_160), ("J48 (180 builds)", j48_180),
                           ("Hoeffding Tree (160 builds)", tree_shape(one_split_root())),
                           ("Hoeffding Tree (180 builds)", tree_shape(two_split_root()))])
    rows = comp.rows
    assert rows[0].churn is None
    assert rows[1].churn.churn_percent == 100.0
    assert rows[3].churn.churn_percent == 50.0
    table = comp.table()
    assert "Attribute Churn" in table and "Size (depth of tree)" in table


def test_compare_self_and_round_trip():
    shape = tree_shape(two_split_root())
    comp = compare_models([("x", shape), ("x again", shape)])
    assert comp.rows[1].churn.churn_percent == 0
    assert comp.rows[0].shape == comp.rows[1].shape
    back = ModelComparison.from_dict(json.loads(json.dumps(comp.to_dict())))
    assert back == comp
