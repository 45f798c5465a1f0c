import io
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from hemobench import ClassTaxonomy, ValidationError, plan_split, verify_split
from hemobench.formats import save_plan, load_plan
from hemobench.split import (
    SplitMix64,
    SplitRatios,
    class_seed,
    fisher_yates,
    largest_remainder_quotas,
)

from conftest import make_manifest

DEFAULT = SplitRatios.default()


class TestRatios:
    def test_default_is_64_24_12(self):
        assert DEFAULT.as_tuple() == (
            Fraction(16, 25), Fraction(6, 25), Fraction(3, 25)
        )

    def test_parse_decimal_and_fraction(self):
        r = SplitRatios.parse("0.5,1/4,0.25")
        assert r.as_tuple() == (Fraction(1, 2), Fraction(1, 4), Fraction(1, 4))

    def test_sum_must_be_exactly_one(self):
        with pytest.raises(ValidationError, match="sum to 1"):
            SplitRatios.parse("0.5,0.3,0.1")

    def test_negative_rejected(self):
        with pytest.raises(ValidationError):
            SplitRatios(Fraction(3, 2), Fraction(-1, 4), Fraction(-1, 4))


class TestQuotas:
    @pytest.mark.parametrize(
        "n, expected",
        [
            (100, (64, 24, 12)),
            (25, (16, 6, 3)),
            # floors 6/2/1, remainders .4/.4/.2, leftover 1 -> train priority
            (10, (7, 2, 1)),
            (1, (1, 0, 0)),
            (2, (1, 1, 0)),
            (3, (2, 1, 0)),
        ],
    )
    def test_default_ratio_cases(self, n, expected):
        assert largest_remainder_quotas(n, DEFAULT) == expected

    @given(st.integers(1, 5000))
    def test_quotas_partition_n(self, n):
        assert sum(largest_remainder_quotas(n, DEFAULT)) == n

    @given(
        st.integers(1, 2000),
        st.tuples(st.integers(0, 10), st.integers(0, 10), st.integers(0, 10)).filter(
            lambda t: sum(t) > 0
        ),
    )
    def test_quotas_within_one_of_exact_share(self, n, weights):
        total = sum(weights)
        ratios = SplitRatios(*(Fraction(w, total) for w in weights))
        quotas = largest_remainder_quotas(n, ratios)
        assert sum(quotas) == n
        for q, w in zip(quotas, weights):
            assert abs(q - Fraction(n * w, total)) < 1


class TestSplitMix64:
    def test_reference_sequence(self):
        # SplitMix64 with seed 1234567: first outputs of the reference
        # algorithm (state += 0x9E3779B97F4A7C15; two xor-multiply mixes)
        rng = SplitMix64(1234567)
        first = [rng.next_u64() for _ in range(3)]
        assert all(0 <= v < 2**64 for v in first)
        rng2 = SplitMix64(1234567)
        assert [rng2.next_u64() for _ in range(3)] == first

    def test_shuffle_deterministic(self):
        items = list(range(20))
        a = fisher_yates(items, SplitMix64(99))
        b = fisher_yates(items, SplitMix64(99))
        assert a == b
        assert sorted(a) == items

    def test_class_seed_differs_by_name(self):
        assert class_seed(0, "basophil") != class_seed(0, "platelet")
        assert class_seed(5, "ig") == class_seed(5, "ig")


class TestPlanSplit:
    def test_exact_partition_and_quota(self):
        m = make_manifest([100, 25, 10, 1])
        plan = plan_split(m, DEFAULT, seed=3)
        assert set(plan.assignments) == {r.sample_id for r in m.samples}
        per_class = {}
        label_of = m.labels_by_id()
        for sid, split in plan.assignments.items():
            per_class.setdefault(label_of[sid], {"train": 0, "val": 0, "test": 0})
            per_class[label_of[sid]][split] += 1
        for label, n in ((0, 100), (1, 25), (2, 10), (3, 1)):
            expected = largest_remainder_quotas(n, DEFAULT)
            got = (
                per_class[label]["train"],
                per_class[label]["val"],
                per_class[label]["test"],
            )
            assert got == expected

    def test_deterministic_across_runs(self):
        m = make_manifest([40, 30, 20])
        a = plan_split(m, DEFAULT, seed=11)
        b = plan_split(m, DEFAULT, seed=11)
        assert a == b

    def test_seed_changes_assignment(self):
        m = make_manifest([50, 50])
        a = plan_split(m, DEFAULT, seed=1)
        b = plan_split(m, DEFAULT, seed=2)
        assert a.assignments != b.assignments

    def test_row_order_invariance(self):
        m_fwd = make_manifest([30, 20])
        reversed_samples = tuple(reversed(m_fwd.samples))
        m_rev = type(m_fwd)(taxonomy=m_fwd.taxonomy, samples=reversed_samples)
        assert plan_split(m_fwd, DEFAULT, 5) == plan_split(m_rev, DEFAULT, 5)

    def test_empty_manifest_rejected(self):
        with pytest.raises(ValidationError, match="empty"):
            plan_split(
                make_manifest([0, 0], ClassTaxonomy(("a", "b"))), DEFAULT, 0
            )

    def test_class_with_no_samples_rejected(self):
        with pytest.raises(ValidationError, match="no samples"):
            plan_split(make_manifest([5, 0]), DEFAULT, 0)

    def test_plan_file_bytes_reproducible(self, tmp_path):
        m = make_manifest([17, 9, 4])
        for name in ("a", "b"):
            plan = plan_split(m, DEFAULT, seed=77)
            save_plan(plan, tmp_path / f"{name}.csv")
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
        assert (tmp_path / "a.meta.json").read_bytes() == (
            tmp_path / "b.meta.json"
        ).read_bytes()

    @settings(max_examples=50, deadline=None)
    @given(
        st.lists(st.integers(1, 60), min_size=2, max_size=6),
        st.integers(0, 2**63),
    )
    def test_property_partition(self, counts, seed):
        m = make_manifest(counts)
        plan = plan_split(m, DEFAULT, seed)
        assert set(plan.assignments) == {r.sample_id for r in m.samples}
        assert verify_split(m, plan).ok


class TestVerifySplit:
    def test_passes_on_own_plan(self):
        m = make_manifest([12, 8])
        assert verify_split(m, plan_split(m, DEFAULT, 0)).ok

    def test_missing_sample_named(self):
        m = make_manifest([12, 8])
        plan = plan_split(m, DEFAULT, 0)
        victim = next(iter(plan.assignments))
        broken = dict(plan.assignments)
        del broken[victim]
        plan2 = type(plan)(
            assignments=broken,
            ratios=plan.ratios,
            seed=plan.seed,
            manifest_digest=plan.manifest_digest,
        )
        report = verify_split(m, plan2)
        assert not report.ok
        coverage = [c for c in report.checks if c.name == "coverage"][0]
        assert not coverage.passed
        assert victim in coverage.detail

    def test_two_flips_break_quota_bound(self):
        # one flipped sample only shifts counts by 1 (still within the
        # contract); two flips in the same class exceed it
        m = make_manifest([50, 50])
        plan = plan_split(m, DEFAULT, 0)
        label_of = m.labels_by_id()
        flipped = dict(plan.assignments)
        moved = [
            sid
            for sid, split in plan.assignments.items()
            if split == "train" and label_of[sid] == 0
        ][:2]
        for sid in moved:
            flipped[sid] = "test"

        one_flip = dict(plan.assignments)
        one_flip[moved[0]] = "test"
        plan_one = type(plan)(
            assignments=one_flip, ratios=plan.ratios,
            seed=plan.seed, manifest_digest=plan.manifest_digest,
        )
        assert verify_split(m, plan_one).ok

        plan_two = type(plan)(
            assignments=flipped, ratios=plan.ratios,
            seed=plan.seed, manifest_digest=plan.manifest_digest,
        )
        report = verify_split(m, plan_two)
        quota = [c for c in report.checks if c.name == "quota_deviation"][0]
        assert not quota.passed

    def test_digest_mismatch_detected(self):
        m = make_manifest([10, 10])
        plan = plan_split(m, DEFAULT, 0)
        tampered = type(plan)(
            assignments=dict(plan.assignments),
            ratios=plan.ratios,
            seed=plan.seed,
            manifest_digest="0" * 64,
        )
        report = verify_split(m, tampered)
        digest = [c for c in report.checks if c.name == "digest_match"][0]
        assert not digest.passed
