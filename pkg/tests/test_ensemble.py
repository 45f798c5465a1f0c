import itertools
import random
from fractions import Fraction

import numpy as np
import pytest

from hemobench import (
    ClassTaxonomy,
    EnsembleConfig,
    PredictionSet,
    ValidationData,
    ValidationError,
    ensemble_predict,
    evaluate_labels,
    majority_vote,
    select_members,
)
from hemobench.ensemble import TIE_POLICIES

import oracles


def prob_rows(seed, k, c):
    rng = random.Random(seed)
    rows = []
    for _ in range(k):
        raw = [rng.random() + 0.01 for _ in range(c)]
        total = sum(raw)
        rows.append(np.array([v / total for v in raw]))
    return rows


def make_preds(name, sample_ids, label_rows, c, peak=0.9, seed=0):
    """PredictionSet voting label_rows[i] on sample_ids[i]."""
    rng = random.Random(seed)
    rows = []
    for label in label_rows:
        rest = [(1.0 - peak) * v for v in _simplex(rng, c - 1)]
        row = rest[:label] + [peak] + rest[label:]
        rows.append(row)
    return PredictionSet(
        model_name=name, architecture=name,
        scores=np.array(rows), score_kind="probability",
        sample_ids=tuple(sample_ids), metadata={},
    )


def _simplex(rng, n):
    if n == 0:
        return []
    raw = [rng.random() + 1e-6 for _ in range(n)]
    total = sum(raw)
    return [v / total for v in raw]


class TestMajorityVote:
    def test_strict_majority(self):
        assert majority_vote([0, 0, 0, 1], policy="lowest_index") == 0

    def test_sum_prob_tie(self):
        rows = [
            np.array([0.9, 0.1]), np.array([0.7, 0.3]),
            np.array([0.2, 0.8]), np.array([0.2, 0.8]),
        ]
        # votes tied 2-2; summed prob: class0 = 2.0, class1 = 2.0 -> equal,
        # then shift one row to break it
        rows[0] = np.array([0.6, 0.4])
        assert majority_vote([0, 0, 1, 1], rows, "sum_prob") == 1

    def test_lowest_index_tie(self):
        assert majority_vote([0, 0, 1, 1], policy="lowest_index") == 0

    def test_model_priority_uses_vote_order(self):
        assert majority_vote([2, 1, 1, 2], policy="model_priority") == 2

    def test_empty_votes_rejected(self):
        with pytest.raises(ValidationError):
            majority_vote([], policy="lowest_index")

    def test_sum_prob_needs_rows(self):
        with pytest.raises(ValidationError, match="score rows"):
            majority_vote([0, 1], None, "sum_prob")

    @pytest.mark.parametrize("policy", TIE_POLICIES)
    def test_exhaustive_against_oracle(self, policy):
        case = 0
        for c in (2, 3, 4):
            for k in (1, 2, 3, 4):
                for votes in itertools.product(range(c), repeat=k):
                    rows = prob_rows(case, k, c)
                    case += 1
                    assert majority_vote(list(votes), rows, policy) == \
                        oracles.brute_majority_vote(list(votes), rows, policy)

    def test_unanimity_under_all_policies(self):
        rows = prob_rows(1, 4, 3)
        for policy in TIE_POLICIES:
            assert majority_vote([2, 2, 2, 2], rows, policy) == 2


class TestEnsemblePredict:
    def test_identical_members_reproduce_model(self):
        ids = [f"s{i}" for i in range(10)]
        labels = [i % 3 for i in range(10)]
        member = make_preds("m", ids, labels, c=3, seed=1)
        for k in (1, 2, 3, 4):
            clones = [member] * k
            assert ensemble_predict(clones, ids, "sum_prob") == labels

    def test_unanimous_sample_ignores_policy(self):
        ids = ["a", "b"]
        members = [make_preds(f"m{i}", ids, [1, 2], c=3, seed=i) for i in range(4)]
        for policy in ("sum_prob", "lowest_index"):
            assert ensemble_predict(members, ids, policy) == [1, 2]
        assert ensemble_predict(
            members, ids, "model_priority", priority=[m.model_name for m in members]
        ) == [1, 2]

    def test_split_vote_resolved_by_sum_prob(self):
        # 3 members, 2 samples; second sample splits 1-1-1
        ids = ["a", "b"]
        m1 = make_preds("m1", ids, [0, 0], c=3, peak=0.50, seed=1)
        m2 = make_preds("m2", ids, [0, 1], c=3, peak=0.60, seed=2)
        m3 = make_preds("m3", ids, [0, 2], c=3, peak=0.40, seed=3)
        rows = [m.probability_view()[1] for m in (m1, m2, m3)]
        expected_b = oracles.brute_majority_vote([0, 1, 2], rows, "sum_prob")
        assert ensemble_predict([m1, m2, m3], ids, "sum_prob") == [0, expected_b]

    def test_coverage_gap_names_model_and_sample(self):
        ids = ["a", "b"]
        full = make_preds("full", ids, [0, 1], c=2)
        partial = make_preds("partial", ["a"], [0], c=2)
        with pytest.raises(ValidationError, match="partial.*'b'"):
            ensemble_predict([full, partial], ids, "lowest_index")

    def test_member_order_invariance(self):
        ids = [f"s{i}" for i in range(20)]
        rng = random.Random(7)
        members = [
            make_preds(f"m{i}", ids, [rng.randrange(4) for _ in ids], c=4, seed=i)
            for i in range(4)
        ]
        for policy in ("sum_prob", "lowest_index"):
            base = ensemble_predict(members, ids, policy)
            for perm in itertools.permutations(members):
                assert ensemble_predict(list(perm), ids, policy) == base

    def test_agreeing_extra_member_never_changes_output(self):
        ids = [f"s{i}" for i in range(12)]
        rng = random.Random(9)
        members = [
            make_preds(f"m{i}", ids, [rng.randrange(3) for _ in ids], c=3, seed=i)
            for i in range(3)
        ]
        base = ensemble_predict(members, ids, "sum_prob")
        echo = make_preds("echo", ids, base, c=3, peak=0.95, seed=99)
        assert ensemble_predict(members + [echo], ids, "sum_prob") == base


def result_with_accuracy(correct, total, taxonomy):
    true = [0] * total
    pred = [0] * correct + [1] * (total - correct)
    return evaluate_labels(true, pred, taxonomy, model_name="x", split="test")


class TestEnsembleConfig:
    def test_members_unique_nonempty(self):
        with pytest.raises(ValidationError):
            EnsembleConfig(members=())
        with pytest.raises(ValidationError):
            EnsembleConfig(members=("a", "a"))

    def test_priority_required_for_model_priority(self):
        with pytest.raises(ValidationError, match="priority"):
            EnsembleConfig(members=("a", "b"), tie_policy="model_priority")
        EnsembleConfig(
            members=("a", "b"), tie_policy="model_priority", priority=("b", "a")
        )


class TestSelectMembers:
    def _candidates(self, accuracies, taxonomy, total=10000):
        out = []
        for i, acc in enumerate(accuracies):
            correct = int(Fraction(acc) * total)
            assert Fraction(correct, total) == Fraction(acc)
            out.append(
                (f"model-{i:02d}", result_with_accuracy(correct, total, taxonomy))
            )
        return out

    def test_distinct_accuracies_no_tie_evaluation(self, taxonomy2):
        candidates = self._candidates(["0.99", "0.98", "0.97"], taxonomy2)
        config, record = select_members(candidates, 2, selection_metric="test_accuracy")
        assert config.members == ("model-00", "model-01")
        assert record.tie_break == "none"
        assert record.completions == ()

    def test_k_equals_candidate_count(self, taxonomy2):
        candidates = self._candidates(["0.99", "0.99", "0.97", "0.96"], taxonomy2)
        config, record = select_members(candidates, 4, selection_metric="test_accuracy")
        assert set(config.members) == {name for name, _ in candidates}
        assert record.tie_break == "none"

    def test_k_zero_rejected(self, taxonomy2):
        with pytest.raises(ValidationError):
            select_members(self._candidates(["0.9"], taxonomy2), 0)

    def test_too_few_candidates(self, taxonomy2):
        with pytest.raises(ValidationError, match="candidates"):
            select_members(self._candidates(["0.9"], taxonomy2), 2)

    def test_tie_without_validation_data_rejected(self, taxonomy2):
        candidates = self._candidates(["0.99", "0.98", "0.98", "0.98"], taxonomy2)
        with pytest.raises(ValidationError, match="validation"):
            select_members(candidates, 2, selection_metric="test_accuracy")

    def _validation_fixture(self, tied_quality):
        """Validation set where completion quality is controlled per model.

        Even samples: all three fixed members vote the true label, so the
        ensemble is always right.  Odd ("disputed") samples: the fixed
        members split 1-1-1 (true, true+1, true+2), so the 4th member's
        vote decides -- voting the true label makes a 2-1-1 plurality for
        it, voting true+1 makes the ensemble wrong.  A tied model that
        votes correctly on ``good`` disputed samples therefore yields
        completion accuracy (12 + good) / 24, with no vote ties at all.
        """
        c = 4
        n = 24
        ids = [f"v{i:02d}" for i in range(n)]
        true = [i % c for i in range(n)]
        members = {}
        votes_a = list(true)
        votes_b = [t if i % 2 == 0 else (t + 1) % c for i, t in enumerate(true)]
        votes_c = [t if i % 2 == 0 else (t + 2) % c for i, t in enumerate(true)]
        members["fixed-0"] = make_preds("fixed-0", ids, votes_a, c, seed=10)
        members["fixed-1"] = make_preds("fixed-1", ids, votes_b, c, seed=11)
        members["fixed-2"] = make_preds("fixed-2", ids, votes_c, c, seed=12)
        for name, good_odds in tied_quality.items():
            votes = list(true)
            disputed_seen = 0
            for i in range(1, n, 2):
                if disputed_seen >= good_odds:
                    votes[i] = (true[i] + 1) % c  # sides against the truth
                disputed_seen += 1
            members[name] = make_preds(name, ids, votes, c, seed=hash(name) % 1000)
        return ValidationData(
            sample_ids=tuple(ids),
            true_labels=tuple(true),
            predictions=members,
        )

    def test_tie_resolved_by_ensemble_validation_accuracy(self, taxonomy2):
        # 3 fixed by distinct accuracy; 3 tied for the final slot
        accs = ["0.9932", "0.9927", "0.9922", "0.9917", "0.9917", "0.9917"]
        candidates = self._candidates(accs, taxonomy2)
        names = [name for name, _ in candidates]
        tied = {names[3]: 2, names[4]: 12, names[5]: 6}
        validation = self._validation_fixture(tied)
        validation = ValidationData(
            sample_ids=validation.sample_ids,
            true_labels=validation.true_labels,
            predictions={
                **{n: validation.predictions[f] for n, f in
                   zip(names[:3], ("fixed-0", "fixed-1", "fixed-2"))},
                **{n: validation.predictions[n] for n in names[3:]},
            },
        )
        config, record = select_members(
            candidates, 4, selection_metric="test_accuracy", validation=validation
        )
        assert config.members[:3] == tuple(names[:3])
        # the model fixing the most disputed samples wins the last slot
        assert config.members[3] == names[4]
        assert record.winners == (names[4],)
        assert record.tie_break == "ensemble_validation_accuracy"
        completion_accs = {name: Fraction(text) for name, text in record.completions}
        assert completion_accs[names[4]] > completion_accs[names[5]]
        assert completion_accs[names[5]] > completion_accs[names[3]]

    def test_deterministic_and_lexicographic_fallback(self, taxonomy2):
        accs = ["0.99", "0.98", "0.98", "0.98"]
        candidates = self._candidates(accs, taxonomy2)
        names = [name for name, _ in candidates]
        # all tied models behave identically -> completions tie exactly ->
        # lexicographically smallest name wins
        validation = self._validation_fixture({})
        clone_votes = [t for t in validation.true_labels]
        predictions = {
            names[0]: validation.predictions["fixed-0"],
        }
        for name in names[1:]:
            predictions[name] = make_preds(
                name, list(validation.sample_ids), clone_votes, 4, seed=5
            )
        validation = ValidationData(
            sample_ids=validation.sample_ids,
            true_labels=validation.true_labels,
            predictions=predictions,
        )
        results = [
            select_members(
                candidates, 2, selection_metric="test_accuracy", validation=validation
            )
            for _ in range(3)
        ]
        winners = {config.members for config, _ in results}
        assert winners == {(names[0], names[1])}
