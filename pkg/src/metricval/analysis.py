"""Diagnostic analyses beyond a single correlation number.

A high system-level correlation can hide systematic failures.  The tools
here expose them: tertile binning of segments by DA score, the distribution
of metric scores conditional on those bins, the worst disagreements between
metric and humans as inspectable failure cases, correlations broken down by
system metadata, and a plain-language reading of Kendall's tau.

Per-bin score distributions deliberately replace per-bin correlations:
restricting the DA range destroys the variance a within-bin correlation
would need, so those numbers mislead.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

import numpy as np

from .correlation import (
    CorrelationResult,
    PairedSample,
    correlate,
    kendall_pair_counts,
    kendall_tau,
)
from .errors import DataError, InsufficientDataError, UndefinedCorrelationError
from .findings import Finding, warning

if TYPE_CHECKING:
    from .corpus import EvaluationCorpus, SystemMeta
    from .judgments import SegmentDA, SystemDA
    from .metrics import MetricScoreTable

BAD = "bad"
AVERAGE = "average"
GOOD = "good"
BIN_LABELS = (BAD, AVERAGE, GOOD)

GOOD_UNDERSCORED = "good-underscored"
BAD_OVERSCORED = "bad-overscored"

GROUP_FIELDS = ("system_type", "track")


@dataclass(frozen=True)
class BinAssignment:
    """Equal-count split of DA-scored points into bad/average/good.

    Attributes:
        boundaries: the two cut values (highest DA in the bad bin, highest
            in the average bin).  With heavily tied scores the two can
            coincide; the equal-count partition takes precedence.
        labels: the bin names, worst first.
        membership: (system_id, segment_id) -> label.
        da_scores: (system_id, segment_id) -> DA score, retained so exports
            and failure mining need no second data source.
    """

    boundaries: tuple[float, float]
    labels: tuple[str, str, str]
    membership: dict[tuple[str, int], str]
    da_scores: dict[tuple[str, int], float]

    def keys_for(self, label: str) -> list[tuple[str, int]]:
        return sorted(k for k, lab in self.membership.items() if lab == label)


@dataclass(frozen=True)
class BinSummary:
    """Distribution summary of one bin's metric scores."""

    label: str
    count: int
    mean: float
    q1: float
    median: float
    q3: float
    min: float
    max: float
    values: tuple[float, ...]


@dataclass(frozen=True)
class FailureCase:
    """One large metric-human disagreement, with full text for inspection."""

    system_id: str
    segment_id: int
    source: str
    references: tuple[str, ...]
    hypothesis: str
    da_score: float
    metric_score: float
    direction: str
    rank: int


@dataclass(frozen=True)
class GroupCorrelation:
    """System-level correlation within one metadata group.

    result is None when the group was flagged instead of computed; flag is
    "" for a computed group, "insufficient" for fewer than 3 systems,
    "undefined" when a score vector was constant within the group.
    """

    group: str
    result: CorrelationResult | None
    n_systems: int
    flag: str = ""


@dataclass(frozen=True)
class AgreementReport:
    """Kendall agreement between a metric and DA at system level."""

    metric_id: str
    tau: float
    concordant: int
    discordant: int
    n_systems: int
    interpretation: str
    note: str


def tertile_bins(das: Iterable["SegmentDA"]) -> BinAssignment:
    """Split segment DA scores into three near-equal-count bins.

    Points are ordered by (da_score, system_id, segment_id); the identifier
    part makes boundary ties deterministic.  The lower bin takes ceil(N/3)
    points, the upper bin half of the rest rounded up, the middle bin the
    remainder, so all sizes differ by at most 1.

    Raises:
        InsufficientDataError: fewer than 3 points.
    """
    points = sorted((d.da_score, d.system_id, d.segment_id) for d in das)
    n = len(points)
    if n < 3:
        raise InsufficientDataError(f"{n} DA points; binning needs at least 3")
    if len({(s, i) for _, s, i in points}) != n:
        raise DataError("duplicate (system, segment) in DA input")
    n_bad = -(-n // 3)
    n_good = -(-(n - n_bad) // 2)
    n_mid = n - n_bad - n_good
    membership = {}
    da_scores = {}
    for idx, (da, system_id, segment_id) in enumerate(points):
        if idx < n_bad:
            label = BAD
        elif idx < n_bad + n_mid:
            label = AVERAGE
        else:
            label = GOOD
        membership[(system_id, segment_id)] = label
        da_scores[(system_id, segment_id)] = da
    boundaries = (points[n_bad - 1][0], points[n_bad + n_mid - 1][0])
    return BinAssignment(boundaries, BIN_LABELS, membership, da_scores)


def _bin_scores(
    table: "MetricScoreTable", metric_id: str, bins: BinAssignment
) -> dict[tuple[str, int], float]:
    scores = table.segment_map(metric_id)
    missing = sorted(k for k in bins.membership if k not in scores)
    if missing:
        shown = ", ".join(f"{s}:{i}" for s, i in missing[:5])
        if len(missing) > 5:
            shown += ", ..."
        raise DataError(
            f"metric {metric_id!r} lacks scores for {len(missing)} binned "
            f"point(s): {shown}"
        )
    return {k: scores[k] for k in bins.membership}


def _mean(values: Sequence[float]) -> float:
    if all(v == values[0] for v in values):
        return values[0]
    return math.fsum(values) / len(values)


def conditional_distribution(
    table: "MetricScoreTable", metric_id: str, bins: BinAssignment
) -> dict[str, BinSummary]:
    """Summarize one metric's score distribution inside each DA bin.

    Returns one BinSummary per label, raw values included so the caller can
    plot real distributions.  Quartiles use linear interpolation.

    Raises:
        DataError: the metric lacks scores for some binned points (listed).
    """
    scores = _bin_scores(table, metric_id, bins)
    out = {}
    for label in bins.labels:
        values = [scores[k] for k in bins.keys_for(label)]
        q1, median, q3 = np.percentile(values, [25, 50, 75])
        out[label] = BinSummary(
            label=label,
            count=len(values),
            mean=_mean(values),
            q1=float(q1),
            median=float(median),
            q3=float(q3),
            min=min(values),
            max=max(values),
            values=tuple(values),
        )
    return out


def failure_cases(
    corpus: "EvaluationCorpus",
    table: "MetricScoreTable",
    metric_id: str,
    bins: BinAssignment,
    k: int,
) -> tuple[list[FailureCase], list[Finding]]:
    """Mine the k worst metric-human disagreements in each direction.

    From the good bin: the k lowest-scored points (output humans liked, the
    metric punished).  From the bad bin: the k highest-scored points (output
    humans disliked, the metric rewarded).  Equal scores are ordered by
    (system_id, segment_id).  A k exceeding a bin returns the whole bin with
    a finding.

    Returns:
        (cases, findings); good-underscored cases first, each direction
        ranked from 1.
    """
    if k < 1:
        raise ValueError(f"k must be positive, got {k}")
    scores = _bin_scores(table, metric_id, bins)
    findings: list[Finding] = []
    cases: list[FailureCase] = []
    for label, direction, descending in (
        (GOOD, GOOD_UNDERSCORED, False),
        (BAD, BAD_OVERSCORED, True),
    ):
        keys = bins.keys_for(label)
        if k > len(keys):
            findings.append(
                warning(
                    f"k={k} exceeds the {label} bin ({len(keys)} points); "
                    "returning the whole bin",
                    code="k-exceeds-bin",
                )
            )
        ordered = sorted(
            keys,
            key=lambda key: (-scores[key] if descending else scores[key], key),
        )
        for rank, (system_id, segment_id) in enumerate(ordered[:k], start=1):
            segment = corpus.test_set.segments[segment_id]
            cases.append(
                FailureCase(
                    system_id=system_id,
                    segment_id=segment_id,
                    source=segment.source,
                    references=segment.references,
                    hypothesis=corpus.hypothesis(system_id, segment_id),
                    da_score=bins.da_scores[(system_id, segment_id)],
                    metric_score=scores[(system_id, segment_id)],
                    direction=direction,
                    rank=rank,
                )
            )
    return cases, findings


def grouped_correlation(
    system_das: Iterable["SystemDA"],
    table: "MetricScoreTable",
    metric_id: str,
    meta: Mapping[str, "SystemMeta"],
    group_by: str = "system_type",
    kind: str = "pearson",
) -> tuple[list[GroupCorrelation], list[Finding]]:
    """System-level correlation computed separately per metadata group.

    Groups with fewer than 3 systems are flagged "insufficient" rather than
    computed; a constant score vector inside a group flags it "undefined".
    Systems without metadata are excluded with a finding.

    Raises:
        DataError: group_by is not a metadata field, or no system in the
            intersection has metadata at all.
    """
    if group_by not in GROUP_FIELDS:
        raise DataError(
            f"cannot group by {group_by!r}; expected one of {GROUP_FIELDS}"
        )
    human = {d.system_id: d.da_score for d in system_das}
    scores = table.system_map(metric_id)
    shared = sorted(human.keys() & scores.keys())
    findings: list[Finding] = []
    with_meta = [s for s in shared if s in meta]
    if not with_meta:
        raise DataError(
            f"no metadata for any of the {len(shared)} systems scored by "
            f"both DA and {metric_id!r}"
        )
    if len(with_meta) < len(shared):
        findings.append(
            warning(
                f"{len(shared) - len(with_meta)} system(s) lack metadata and "
                "were excluded from grouping",
                code="missing-metadata",
            )
        )
    groups: dict[str, list[str]] = {}
    for system_id in with_meta:
        label = getattr(meta[system_id], group_by)
        groups.setdefault(label, []).append(system_id)
    out = []
    for label in sorted(groups):
        ids = groups[label]
        if len(ids) < 3:
            out.append(GroupCorrelation(label, None, len(ids), "insufficient"))
            continue
        sample = PairedSample(
            tuple(scores[s] for s in ids), tuple(human[s] for s in ids)
        )
        scope = f"{metric_id}|{group_by}={label}"
        try:
            result = correlate(sample, kind, level="system", scope=scope)
        except UndefinedCorrelationError as exc:
            findings.append(
                warning(f"group {label!r}: {exc}", code="undefined-in-group")
            )
            out.append(GroupCorrelation(label, None, len(ids), "undefined"))
            continue
        out.append(GroupCorrelation(label, result, len(ids)))
    return out, findings


def kendall_agreement_report(
    system_das: Iterable["SystemDA"],
    table: "MetricScoreTable",
    metric_id: str,
) -> AgreementReport:
    """Kendall's tau between metric and DA system rankings, in words.

    Raises:
        InsufficientDataError: fewer than 3 systems scored by both.
        UndefinedCorrelationError: propagated from kendall_tau.
    """
    human = {d.system_id: d.da_score for d in system_das}
    scores = table.system_map(metric_id)
    shared = sorted(human.keys() & scores.keys())
    if len(shared) < 3:
        raise InsufficientDataError(
            f"only {len(shared)} systems scored by both; need at least 3"
        )
    xs = [scores[s] for s in shared]
    ys = [human[s] for s in shared]
    tau = kendall_tau(xs, ys)
    concordant, discordant, _, _ = kendall_pair_counts(xs, ys)
    margin = f"{round(100 * tau, 1):g}"
    return AgreementReport(
        metric_id=metric_id,
        tau=tau,
        concordant=concordant,
        discordant=discordant,
        n_systems=len(shared),
        interpretation=(
            f"agrees more than disagrees by {margin} percentage points "
            "on pairwise system comparisons"
        ),
        note=(
            "the percentage is 100*tau: the margin by which pairwise "
            "agreements exceed disagreements among untied system pairs, "
            "not a raw agreement rate"
        ),
    )


def bins_to_csv(
    bins: BinAssignment, table: "MetricScoreTable", metric_id: str
) -> str:
    """Render bin membership as CSV: system_id,segment_id,da,metric_score,bin.

    Points the metric did not score get an empty metric_score cell.
    """
    scores = table.segment_map(metric_id)
    out = io.StringIO()
    out.write("system_id,segment_id,da,metric_score,bin\r\n")
    for key in sorted(bins.membership):
        system_id, segment_id = key
        score = repr(scores[key]) if key in scores else ""
        out.write(
            f"{system_id},{segment_id},{bins.da_scores[key]!r},{score},"
            f"{bins.membership[key]}\r\n"
        )
    return out.getvalue()


def failures_to_json(cases: Sequence[FailureCase]) -> str:
    """Render failure cases as a JSON array with full texts."""
    payload = [
        {
            "system_id": c.system_id,
            "segment_id": c.segment_id,
            "source": c.source,
            "references": list(c.references),
            "hypothesis": c.hypothesis,
            "da_score": c.da_score,
            "metric_score": c.metric_score,
            "direction": c.direction,
            "rank": c.rank,
        }
        for c in cases
    ]
    return json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True) + "\n"


def failures_to_text(cases: Sequence[FailureCase]) -> str:
    """Plain-text rendering, one block per case."""
    blocks = []
    for c in cases:
        lines = [
            f"[{c.direction} #{c.rank}] system={c.system_id} segment={c.segment_id} "
            f"da={c.da_score:.3f} metric={c.metric_score:.3f}",
            f"  source:     {c.source}",
        ]
        for ref in c.references:
            lines.append(f"  reference:  {ref}")
        lines.append(f"  hypothesis: {c.hypothesis}")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n" if blocks else ""


def groups_to_csv(groups: Sequence[GroupCorrelation]) -> str:
    """Render grouped correlations as CSV: group,kind,n_systems,value,flag."""
    out = io.StringIO()
    out.write("group,kind,n_systems,value,flag\r\n")
    for g in groups:
        kind = g.result.kind if g.result else ""
        value = repr(g.result.value) if g.result else ""
        out.write(f"{g.group},{kind},{g.n_systems},{value},{g.flag}\r\n")
    return out.getvalue()
