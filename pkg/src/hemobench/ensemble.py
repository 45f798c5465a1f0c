"""Majority-vote ensembling and validation-driven member selection.

"Majority" is plurality: with four voters and eight classes a strict
majority may not exist, so the plurality set is computed first and a tie
policy makes the procedure total:

* ``sum_prob``      -- among tied classes, highest summed probability
                       across all members (residual exact ties fall back
                       to the lowest class index);
* ``model_priority``-- the vote of the earliest member (in the given
                       member order) whose vote is among the tied classes;
* ``lowest_index``  -- smallest tied class index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

import numpy as np

from .core import PredictionSet, ValidationError
from .metrics import EvaluationResult

TIE_POLICIES = ("sum_prob", "model_priority", "lowest_index")
SELECTION_METRICS = ("validation_accuracy", "test_accuracy")


@dataclass(frozen=True)
class EnsembleConfig:
    """Which models vote, how ties break, and how members were ranked."""

    members: tuple[str, ...]
    tie_policy: str = "sum_prob"
    selection_metric: str = "validation_accuracy"
    priority: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValidationError("ensemble needs at least one member")
        if len(set(self.members)) != len(self.members):
            raise ValidationError("ensemble members must be unique")
        if self.tie_policy not in TIE_POLICIES:
            raise ValidationError(
                f"tie_policy must be one of {TIE_POLICIES}, got {self.tie_policy!r}"
            )
        if self.selection_metric not in SELECTION_METRICS:
            raise ValidationError(
                f"selection_metric must be one of {SELECTION_METRICS}, "
                f"got {self.selection_metric!r}"
            )
        if self.tie_policy == "model_priority":
            if self.priority is None:
                raise ValidationError("model_priority requires a priority ordering")
            if set(self.priority) < set(self.members):
                raise ValidationError("priority ordering must cover all members")


def majority_vote(
    votes: Sequence[int],
    score_rows: Sequence[np.ndarray] | None = None,
    policy: str = "sum_prob",
) -> int:
    """Plurality class of the votes, ties resolved by the given policy.

    ``score_rows`` are per-member probability rows aligned to ``votes``;
    they are only required for the ``sum_prob`` policy.  For
    ``model_priority`` the vote order is the priority order.
    """
    if policy not in TIE_POLICIES:
        raise ValidationError(f"unknown tie policy {policy!r}")
    if not votes:
        raise ValidationError("empty vote list")
    tally: dict[int, int] = {}
    for v in votes:
        tally[v] = tally.get(v, 0) + 1
    top = max(tally.values())
    tied = sorted(c for c, n in tally.items() if n == top)
    if len(tied) == 1:
        return tied[0]

    if policy == "lowest_index":
        return tied[0]
    if policy == "model_priority":
        for v in votes:
            if v in tied:
                return v
        raise AssertionError("unreachable: tied classes come from votes")
    # sum_prob
    if score_rows is None:
        raise ValidationError("sum_prob tie policy needs per-member score rows")
    if len(score_rows) != len(votes):
        raise ValidationError("score_rows must align with votes")
    sums = {c: 0.0 for c in tied}
    for row in score_rows:
        for c in tied:
            sums[c] += float(row[c])
    best = max(sums.values())
    # exact float ties (e.g. symmetric fixtures) fall back to lowest index
    return min(c for c in tied if sums[c] == best)


def ensemble_predict(
    members: Sequence[PredictionSet],
    sample_ids: Sequence[str],
    policy: str = "sum_prob",
    priority: Sequence[str] | None = None,
) -> list[int]:
    """Per-sample majority vote over the members' argmax predictions."""
    if not members:
        raise ValidationError("ensemble needs at least one member")
    ordered = list(members)
    if policy == "model_priority":
        if priority is None:
            raise ValidationError("model_priority requires a priority ordering")
        rank = {name: i for i, name in enumerate(priority)}
        missing = [m.model_name for m in ordered if m.model_name not in rank]
        if missing:
            raise ValidationError(
                f"priority ordering missing members: {', '.join(missing)}"
            )
        ordered.sort(key=lambda m: rank[m.model_name])

    indexes = []
    for member in ordered:
        row_of = member.row_index()
        gaps = [sid for sid in sample_ids if sid not in row_of]
        if gaps:
            raise ValidationError(
                f"model {member.model_name!r} has no prediction for "
                f"sample {gaps[0]!r}"
                + (f" (+{len(gaps) - 1} more)" if len(gaps) > 1 else "")
            )
        indexes.append(row_of)

    argmaxes = [m.argmax_labels() for m in ordered]
    need_scores = policy == "sum_prob"
    probs = [m.probability_view() for m in ordered] if need_scores else None

    out = []
    for sid in sample_ids:
        votes = [int(argmaxes[k][indexes[k][sid]]) for k in range(len(ordered))]
        rows = (
            [probs[k][indexes[k][sid]] for k in range(len(ordered))]
            if need_scores
            else None
        )
        out.append(majority_vote(votes, rows, policy))
    return out


@dataclass(frozen=True)
class ValidationData:
    """Validation-split material needed to score candidate ensembles."""

    sample_ids: tuple[str, ...]
    true_labels: tuple[int, ...]
    predictions: Mapping[str, PredictionSet]

    def accuracy_of(self, member_names: Sequence[str], policy: str,
                    priority: Sequence[str] | None = None) -> Fraction:
        members = []
        for name in member_names:
            if name not in self.predictions:
                raise ValidationError(f"no validation predictions for model {name!r}")
            members.append(self.predictions[name])
        predicted = ensemble_predict(members, self.sample_ids, policy, priority)
        correct = sum(1 for p, t in zip(predicted, self.true_labels) if p == t)
        return Fraction(correct, len(self.sample_ids))


@dataclass(frozen=True)
class SelectionRecord:
    """Provenance of one member-selection run."""

    ranking: tuple[tuple[str, str], ...]          # (model, accuracy display)
    fixed: tuple[str, ...]
    tied: tuple[str, ...]
    completions: tuple[tuple[str, str], ...]      # (model, ensemble val accuracy)
    winners: tuple[str, ...]
    tie_break: str

    def to_dict(self) -> dict:
        return {
            "ranking": [list(r) for r in self.ranking],
            "fixed": list(self.fixed),
            "tied": list(self.tied),
            "completions": [list(c) for c in self.completions],
            "winners": list(self.winners),
            "tie_break": self.tie_break,
        }


def select_members(
    candidates: Sequence[tuple[str, EvaluationResult]],
    k: int,
    *,
    tie_policy: str = "sum_prob",
    selection_metric: str = "validation_accuracy",
    validation: ValidationData | None = None,
) -> tuple[EnsembleConfig, SelectionRecord]:
    """Pick the k ensemble members from scored candidates.

    Candidates are ranked by overall accuracy on the selection split.
    Models strictly above the k-th accuracy are fixed.  When more
    candidates tie at the k-th accuracy than there are open slots, each
    tied candidate is scored by the validation accuracy of the ensemble
    formed by the fixed members plus that candidate alone, and the open
    slots go to the best scores (remaining ties break by model name).
    """
    if k <= 0:
        raise ValidationError("k must be >= 1")
    if len(candidates) < k:
        raise ValidationError(
            f"need at least k={k} candidates, got {len(candidates)}"
        )
    names = [name for name, _ in candidates]
    if len(set(names)) != len(names):
        raise ValidationError("candidate model names must be unique")

    scored = sorted(
        ((name, result.overall_accuracy) for name, result in candidates),
        key=lambda item: (-item[1], item[0]),
    )
    ranking = tuple((name, f"{acc.numerator}/{acc.denominator}") for name, acc in scored)
    threshold = scored[k - 1][1]
    fixed = [name for name, acc in scored if acc > threshold]
    tied = sorted(name for name, acc in scored if acc == threshold)
    open_slots = k - len(fixed)

    if len(tied) == open_slots:
        members = fixed + [name for name, acc in scored if acc == threshold]
        record = SelectionRecord(
            ranking=ranking,
            fixed=tuple(fixed),
            tied=tuple(tied),
            completions=(),
            winners=tuple(members[len(fixed):]),
            tie_break="none",
        )
    else:
        if validation is None:
            raise ValidationError(
                f"{len(tied)} candidates tie at accuracy "
                f"{threshold.numerator}/{threshold.denominator} for "
                f"{open_slots} slot(s); validation predictions are required"
            )
        completions = []
        for name in tied:
            acc = validation.accuracy_of(fixed + [name], tie_policy)
            completions.append((name, acc))
        # best ensemble validation accuracy first, then lexicographic name
        completions.sort(key=lambda item: (-item[1], item[0]))
        winners = [name for name, _ in completions[:open_slots]]
        members = fixed + winners
        record = SelectionRecord(
            ranking=ranking,
            fixed=tuple(fixed),
            tied=tuple(tied),
            completions=tuple(
                (name, f"{acc.numerator}/{acc.denominator}")
                for name, acc in completions
            ),
            winners=tuple(winners),
            tie_break="ensemble_validation_accuracy",
        )

    config = EnsembleConfig(
        members=tuple(members),
        tie_policy=tie_policy,
        selection_metric=selection_metric,
    )
    return config, record


def config_to_dict(config: EnsembleConfig, record: SelectionRecord | None = None) -> dict:
    doc = {
        "schema": "hemobench.ensemble/1",
        "members": list(config.members),
        "tie_policy": config.tie_policy,
        "selection_metric": config.selection_metric,
    }
    if config.priority is not None:
        doc["priority"] = list(config.priority)
    if record is not None:
        doc["selection"] = record.to_dict()
    return doc
