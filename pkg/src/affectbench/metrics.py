"""Agreement analytics between original and corrupted prediction sequences.

All moments are population moments (divide by n).  The concordance
correlation coefficient is computed in covariance form,

    ccc = 2 cov(x, y) / (var(x) + var(y) + (mean(x) - mean(y))^2),

which equals 2 rho sigma_x sigma_y / (sigma_x^2 + sigma_y^2 + (mu_x - mu_y)^2)
whenever both variances are positive and stays well defined when one
sequence is constant.  Degenerate conventions: both sequences constant and
equal -> 1; one sequence constant -> 0 (zero covariance); Pearson on zero
variance reports 0 with a degeneracy flag.
"""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median
from typing import NamedTuple, Sequence

import numpy as np

from .bridge import AffectSample, AffectSequence
from .errors import ValidationError

DIMENSIONS = ("arousal", "valence")


class PearsonResult(NamedTuple):
    value: float
    degenerate: bool


class TrendShare(NamedTuple):
    pos_pct: float
    neg_pct: float
    zero_pct: float


@dataclass(frozen=True)
class AlignedPair:
    frame_index: int
    orig: AffectSample
    cond: AffectSample


@dataclass
class PairedSequences:
    """Inner join of an original and a condition sequence on frame index."""

    participant_id: str
    condition: str
    pairs: list[AlignedPair]

    def values(self, dimension: str) -> tuple[np.ndarray, np.ndarray]:
        _check_dimension(dimension)
        orig = np.array([getattr(p.orig, dimension) for p in self.pairs], dtype=np.float64)
        cond = np.array([getattr(p.cond, dimension) for p in self.pairs], dtype=np.float64)
        return orig, cond

    def __len__(self) -> int:
        return len(self.pairs)


@dataclass
class DeviationSeries:
    """Signed per-frame differences, condition minus original."""

    participant_id: str
    condition: str
    dimension: str
    deltas: list[tuple[int, float]]

    def __len__(self) -> int:
        return len(self.deltas)


@dataclass(frozen=True)
class AgreementStats:
    """Per participant x condition x dimension agreement summary."""

    ccc: float
    pearson: float
    pearson_degenerate: bool
    pos_pct: float
    neg_pct: float
    zero_pct: float
    mean_delta: float
    min_delta: float
    max_delta: float
    n: int


@dataclass
class ConditionSummary:
    """Across-participant aggregate for one condition x dimension cell."""

    condition: str
    dimension: str
    participants: list[str]
    ccc_values: list[float]
    ccc_min: float
    ccc_max: float
    ccc_mean: float
    ccc_median: float
    trend_mean: TrendShare
    trend_pooled: TrendShare
    total_n: int


def _check_dimension(dimension: str) -> None:
    if dimension not in DIMENSIONS:
        raise ValidationError(f"unknown dimension {dimension!r}; expected one of {DIMENSIONS}")


def align(orig: AffectSequence, cond: AffectSequence) -> PairedSequences:
    """Pairwise deletion join: keep frame indices where both samples are valid."""
    if orig.participant_id != cond.participant_id:
        raise ValidationError(
            f"participant mismatch: {orig.participant_id!r} vs {cond.participant_id!r}"
        )
    if orig.condition == cond.condition:
        raise ValidationError(f"cannot align a condition with itself: {orig.condition!r}")
    cond_by_index = {s.frame_index: s for s in cond.samples if s.valid}
    pairs = [
        AlignedPair(s.frame_index, s, cond_by_index[s.frame_index])
        for s in orig.samples
        if s.valid and s.frame_index in cond_by_index
    ]
    return PairedSequences(orig.participant_id, cond.condition, pairs)


def deviation(paired: PairedSequences, dimension: str) -> DeviationSeries:
    """delta_t = condition value minus original value, per aligned frame."""
    _check_dimension(dimension)
    deltas = [
        (p.frame_index, getattr(p.cond, dimension) - getattr(p.orig, dimension))
        for p in paired.pairs
    ]
    return DeviationSeries(paired.participant_id, paired.condition, dimension, deltas)


def trend_frequency(dev: DeviationSeries, zero_tolerance: float = 0.0) -> TrendShare:
    """Percent of deltas above, below, and within the zero tolerance band."""
    n = len(dev.deltas)
    if n == 0:
        raise ValidationError("trend frequency undefined for an empty deviation series")
    pos = sum(1 for _, d in dev.deltas if d > zero_tolerance)
    neg = sum(1 for _, d in dev.deltas if d < -zero_tolerance)
    zero = n - pos - neg
    return TrendShare(100.0 * pos / n, 100.0 * neg / n, 100.0 * zero / n)


def _moments(x: np.ndarray, y: np.ndarray):
    if x.shape != y.shape:
        raise ValidationError(f"length mismatch: {x.shape} vs {y.shape}")
    if x.ndim != 1 or len(x) < 2:
        raise ValidationError(f"need at least 2 paired samples, got {x.shape}")
    mx = float(x.mean())
    my = float(y.mean())
    dx = x - mx
    dy = y - my
    n = len(x)
    return mx, my, float(dx @ dy) / n, float(dx @ dx) / n, float(dy @ dy) / n


def pearson(x: Sequence[float], y: Sequence[float]) -> PearsonResult:
    """Population-moment Pearson correlation.

    Zero variance in either input makes the coefficient undefined; that
    reports as value 0.0 with the degenerate flag set.
    """
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    _, _, cov, var_x, var_y = _moments(x, y)
    if var_x == 0.0 or var_y == 0.0:
        return PearsonResult(0.0, True)
    value = cov / np.sqrt(var_x * var_y)
    return PearsonResult(float(np.clip(value, -1.0, 1.0)), False)


def ccc(x: Sequence[float], y: Sequence[float]) -> float:
    """Concordance correlation coefficient in covariance form."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    mx, my, cov, var_x, var_y = _moments(x, y)
    denom = var_x + var_y + (mx - my) ** 2
    if denom == 0.0:
        return 1.0
    return float(np.clip(2.0 * cov / denom, -1.0, 1.0))


def agreement_stats(
    paired: PairedSequences, dimension: str, zero_tolerance: float = 0.0
) -> AgreementStats:
    """All per-cell statistics for one dimension of an aligned pair."""
    orig, cond = paired.values(dimension)
    if len(orig) < 2:
        raise ValidationError(
            f"need at least 2 aligned samples for {paired.participant_id}/{paired.condition},"
            f" got {len(orig)}"
        )
    dev = deviation(paired, dimension)
    trend = trend_frequency(dev, zero_tolerance)
    deltas = np.array([d for _, d in dev.deltas])
    rho = pearson(orig, cond)
    return AgreementStats(
        ccc=ccc(orig, cond),
        pearson=rho.value,
        pearson_degenerate=rho.degenerate,
        pos_pct=trend.pos_pct,
        neg_pct=trend.neg_pct,
        zero_pct=trend.zero_pct,
        mean_delta=float(deltas.mean()),
        min_delta=float(deltas.min()),
        max_delta=float(deltas.max()),
        n=len(deltas),
    )


def aggregate(
    stats: dict[tuple[str, str, str], AgreementStats],
    conditions: Sequence[str] | None = None,
) -> list[ConditionSummary]:
    """Across-participant summaries per condition x dimension.

    `stats` maps (participant_id, condition, dimension) to that cell's
    AgreementStats.  Trend percentages are aggregated two ways: unweighted
    mean over participants, and pooled over frames (weighted by each
    participant's n).
    """
    if not stats:
        raise ValidationError("cannot aggregate an empty stats collection")
    if conditions is None:
        conditions = sorted({c for _, c, _ in stats})
    summaries = []
    for condition in conditions:
        for dimension in DIMENSIONS:
            cell = sorted(
                (pid, s)
                for (pid, cond, dim), s in stats.items()
                if cond == condition and dim == dimension
            )
            if not cell:
                continue
            participants = [pid for pid, _ in cell]
            values = [s.ccc for _, s in cell]
            total_n = sum(s.n for _, s in cell)
            pooled = TrendShare(
                sum(s.pos_pct * s.n for _, s in cell) / total_n,
                sum(s.neg_pct * s.n for _, s in cell) / total_n,
                sum(s.zero_pct * s.n for _, s in cell) / total_n,
            )
            mean_trend = TrendShare(
                sum(s.pos_pct for _, s in cell) / len(cell),
                sum(s.neg_pct for _, s in cell) / len(cell),
                sum(s.zero_pct for _, s in cell) / len(cell),
            )
            summaries.append(
                ConditionSummary(
                    condition=condition,
                    dimension=dimension,
                    participants=participants,
                    ccc_values=values,
                    ccc_min=min(values),
                    ccc_max=max(values),
                    ccc_mean=sum(values) / len(values),
                    ccc_median=float(median(values)),
                    trend_mean=mean_trend,
                    trend_pooled=pooled,
                    total_n=total_n,
                )
            )
    return summaries
