"""Deterministic stratified train/val/test splitting.

Each class is shuffled independently with a SplitMix64 generator seeded
by ``seed XOR sha256(class_name)[:8]`` and cut into contiguous blocks
sized by largest-remainder apportionment of the split ratios.  The whole
procedure is a pure function of (canonical manifest, ratios, seed): the
same inputs give byte-identical plans on any platform.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from fractions import Fraction

from .core import DatasetManifest, SplitPlan, ValidationError, SPLIT_NAMES

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """Tiny 64-bit PRNG; fully specified so any language can replay it."""

    def __init__(self, seed: int):
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def next_below(self, bound: int) -> int:
        """Uniform-ish integer in [0, bound); plain modulo keeps the
        procedure trivially portable and the bias is irrelevant here."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        return self.next_u64() % bound


def class_seed(seed: int, class_name: str) -> int:
    """Per-class PRNG seed: caller seed XOR first 8 bytes of SHA-256(name)."""
    h = hashlib.sha256(class_name.encode("utf-8")).digest()
    return (seed ^ int.from_bytes(h[:8], "big")) & _MASK64


def fisher_yates(items: list, rng: SplitMix64) -> list:
    out = list(items)
    for i in range(len(out) - 1, 0, -1):
        j = rng.next_below(i + 1)
        out[i], out[j] = out[j], out[i]
    return out


@dataclass(frozen=True)
class SplitRatios:
    """Exact train/val/test fractions; must sum to exactly 1."""

    train: Fraction
    val: Fraction
    test: Fraction

    def __post_init__(self):
        for name in SPLIT_NAMES:
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} ratio must be >= 0")
        total = self.train + self.val + self.test
        if total != 1:
            raise ValidationError(f"ratios must sum to 1 exactly, got {total}")

    def as_tuple(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.train, self.val, self.test)

    @classmethod
    def default(cls) -> "SplitRatios":
        return cls(Fraction(64, 100), Fraction(24, 100), Fraction(12, 100))

    @classmethod
    def parse(cls, text: str) -> "SplitRatios":
        """Parse 'train,val,test' where each part is a decimal or a/b."""
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 3:
            raise ValidationError(f"expected 3 comma-separated ratios, got {text!r}")
        try:
            fracs = [Fraction(p) for p in parts]
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"bad ratio in {text!r}: {exc}") from None
        return cls(*fracs)


def largest_remainder_quotas(n: int, ratios: SplitRatios) -> tuple[int, int, int]:
    """Integer quotas for n samples: floors first, then leftovers by
    descending fractional remainder, remainder ties going train > val > test."""
    targets = [n * r for r in ratios.as_tuple()]
    floors = [int(t) for t in targets]  # exact: Fraction -> floor for t >= 0
    leftover = n - sum(floors)
    remainders = [t - f for t, f in zip(targets, floors)]
    # priority = position in (train, val, test)
    order = sorted(range(3), key=lambda i: (-remainders[i], i))
    quotas = list(floors)
    for i in order[:leftover]:
        quotas[i] += 1
    return tuple(quotas)  # type: ignore[return-value]


def plan_split(manifest: DatasetManifest, ratios: SplitRatios, seed: int) -> SplitPlan:
    """Stratified assignment of every manifest sample to train/val/test.

    Per class: sort sample ids, shuffle with the class-seeded PRNG, then
    take the first train-quota ids as train, the next val-quota as val and
    the rest as test.
    """
    if not manifest.samples:
        raise ValidationError("manifest is empty")
    by_class: dict[int, list[str]] = {i: [] for i in range(manifest.taxonomy.count)}
    for rec in manifest.samples:
        by_class[rec.label].append(rec.sample_id)
    for idx, ids in by_class.items():
        if not ids:
            raise ValidationError(
                f"class {manifest.taxonomy.classes[idx]!r} has no samples"
            )

    assignments: dict[str, str] = {}
    for idx in range(manifest.taxonomy.count):
        name = manifest.taxonomy.classes[idx]
        ids = sorted(by_class[idx])
        rng = SplitMix64(class_seed(seed, name))
        shuffled = fisher_yates(ids, rng)
        n_train, n_val, _ = largest_remainder_quotas(len(ids), ratios)
        for pos, sid in enumerate(shuffled):
            if pos < n_train:
                assignments[sid] = "train"
            elif pos < n_train + n_val:
                assignments[sid] = "val"
            else:
                assignments[sid] = "test"

    return SplitPlan(
        assignments=assignments,
        ratios=ratios.as_tuple(),
        seed=seed,
        manifest_digest=manifest.digest,
    )


@dataclass(frozen=True)
class SplitCheck:
    name: str
    passed: bool
    detail: str = ""


@dataclass(frozen=True)
class SplitVerification:
    checks: tuple[SplitCheck, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[SplitCheck]:
        return [c for c in self.checks if not c.passed]


def _list_some(ids, limit=5) -> str:
    shown = ", ".join(repr(s) for s in sorted(ids)[:limit])
    more = len(ids) - min(len(ids), limit)
    return shown + (f" (+{more} more)" if more > 0 else "")


def verify_split(manifest: DatasetManifest, plan: SplitPlan) -> SplitVerification:
    """Structural audit of a plan against its manifest.

    Failures are report entries, never exceptions: coverage, no extra ids,
    per-class quota deviation <= 1, and manifest digest match.
    """
    checks = []
    manifest_ids = {rec.sample_id for rec in manifest.samples}
    plan_ids = set(plan.assignments)

    missing = manifest_ids - plan_ids
    checks.append(
        SplitCheck(
            "coverage",
            not missing,
            "" if not missing else f"unassigned sample ids: {_list_some(missing)}",
        )
    )
    extra = plan_ids - manifest_ids
    checks.append(
        SplitCheck(
            "no_extra_ids",
            not extra,
            "" if not extra else f"ids not in manifest: {_list_some(extra)}",
        )
    )

    # assignments is a mapping, so one sample cannot sit in two splits;
    # valid split names were already enforced by SplitPlan itself.
    checks.append(SplitCheck("disjoint", True, ""))

    ratios = SplitRatios(*plan.ratios)
    label_of = manifest.labels_by_id()
    class_sizes = [0] * manifest.taxonomy.count
    for rec in manifest.samples:
        class_sizes[rec.label] += 1
    counts: dict[int, dict[str, int]] = {
        i: dict.fromkeys(SPLIT_NAMES, 0) for i in range(manifest.taxonomy.count)
    }
    for sid, split in plan.assignments.items():
        if sid in label_of:
            counts[label_of[sid]][split] += 1
    bad_quota = []
    for idx in range(manifest.taxonomy.count):
        quotas = dict(
            zip(SPLIT_NAMES, largest_remainder_quotas(class_sizes[idx], ratios))
        )
        for split in SPLIT_NAMES:
            dev = abs(counts[idx][split] - quotas[split])
            if dev > 1:
                bad_quota.append(
                    f"{manifest.taxonomy.classes[idx]}/{split}: "
                    f"count {counts[idx][split]} vs quota {quotas[split]} (dev {dev})"
                )
    checks.append(
        SplitCheck("quota_deviation", not bad_quota, "; ".join(bad_quota))
    )

    digest_ok = plan.manifest_digest == manifest.digest
    checks.append(
        SplitCheck(
            "digest_match",
            digest_ok,
            "" if digest_ok else
            f"plan built from digest {plan.manifest_digest[:12]}..., "
            f"manifest digest is {manifest.digest[:12]}...",
        )
    )
    return SplitVerification(tuple(checks))
