"""Testset construction and per-period accuracy reporting.

The testset builder draws a near-uniform sample across the 11 periods:
the total is split round-robin in chronological order so per-period
quotas differ by at most one, with any remainder going to the earliest
periods. The report renderer reproduces the reference table layout,
with percentages truncated (not rounded) at the printed precision.
"""

from __future__ import annotations

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping

from dingdate.periods import PERIODS, Dynasty, InvalidPeriodError, Period


class InsufficientImagesError(ValueError):
    def __init__(self, period: Period, needed: int, available: int):
        super().__init__(
            f"period {period}: need {needed} images, only {available} available"
        )
        self.period = period
        self.needed = needed
        self.available = available


class ImageUnreadableError(OSError):
    def __init__(self, ref: str):
        super().__init__(f"image unreadable: {ref}")
        self.ref = ref


class DatasetParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"dataset manifest line {line_no}: {reason}")
        self.line_no = line_no


@dataclass(frozen=True)
class DatasetManifest:
    """Labeled image pool: (image_ref, period) entries, refs unique."""

    entries: tuple[tuple[str, Period], ...]

    def __post_init__(self) -> None:
        refs = [ref for ref, _ in self.entries]
        if len(set(refs)) != len(refs):
            raise ValueError("image_refs must be unique")
        if any(not isinstance(p, Period) for _, p in self.entries):
            raise ValueError("every entry needs a valid Period")

    def count_by_period(self) -> dict[Period, int]:
        counts = {p: 0 for p in PERIODS}
        for _, period in self.entries:
            counts[period] += 1
        return counts

    def save(self, path: str | Path) -> None:
        lines = [f"{ref}\t{period}" for ref, period in self.entries]
        Path(path).write_text("\n".join(lines) + ("\n" if lines else ""), "utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "DatasetManifest":
        entries = []
        for line_no, line in enumerate(
            Path(path).read_text("utf-8").splitlines(), start=1
        ):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DatasetParseError(line_no, f"expected 2 fields, got {len(parts)}")
            try:
                entries.append((parts[0], Period.parse(parts[1])))
            except InvalidPeriodError as exc:
                raise DatasetParseError(line_no, str(exc)) from None
        return cls(entries=tuple(entries))


@dataclass(frozen=True)
class PeriodStats:
    correct: int
    total: int

    @property
    def accuracy(self) -> float:
        return self.correct / self.total

    def __post_init__(self) -> None:
        if self.total <= 0 or not (0 <= self.correct <= self.total):
            raise ValueError(f"bad counts: {self.correct}/{self.total}")


@dataclass(frozen=True)
class AccuracyReport:
    """Per-period and overall accuracy, plus the dataset composition.

    `dataset_counts` is the size of the full collected dataset per
    period, which the table's Number row reports; it defaults to the
    testset totals when no separate collection counts are known.
    """

    per_period: Mapping[Period, PeriodStats]
    dataset_counts: Mapping[Period, int] | None = None

    def __post_init__(self) -> None:
        for period in self.per_period:
            if period not in PERIODS:
                raise ValueError(f"unknown period {period}")

    @property
    def overall(self) -> PeriodStats:
        return PeriodStats(
            correct=sum(s.correct for s in self.per_period.values()),
            total=sum(s.total for s in self.per_period.values()),
        )

    def number_shares(self) -> dict[Period, float]:
        """Fraction of the dataset per period, used by the Number row."""
        counts: Mapping[Period, int]
        if self.dataset_counts is not None:
            counts = self.dataset_counts
        else:
            counts = {p: s.total for p, s in self.per_period.items()}
        grand = sum(counts.values())
        return {p: (counts.get(p, 0) / grand if grand else 0.0) for p in PERIODS}

    def dataset_total(self) -> int:
        if self.dataset_counts is not None:
            return sum(self.dataset_counts.values())
        return sum(s.total for s in self.per_period.values())


def quotas(total_count: int) -> dict[Period, int]:
    """Near-uniform split: remainder goes to the earliest periods."""
    if total_count < 1:
        raise ValueError("total_count must be >= 1")
    base, remainder = divmod(total_count, len(PERIODS))
    return {p: base + (1 if i < remainder else 0) for i, p in enumerate(PERIODS)}


def build_testset(
    manifest: DatasetManifest, total_count: int, seed: int
) -> DatasetManifest:
    """Draw a deterministic near-uniform testset without replacement."""
    pools: dict[Period, list[str]] = {p: [] for p in PERIODS}
    for ref, period in manifest.entries:
        pools[period].append(ref)
    wanted = quotas(total_count)
    rng = random.Random(seed)
    chosen: list[tuple[str, Period]] = []
    for period in PERIODS:
        pool = sorted(pools[period])
        need = wanted[period]
        if len(pool) < need:
            raise InsufficientImagesError(period, need, len(pool))
        sample = rng.sample(pool, need)
        chosen.extend((ref, period) for ref in sorted(sample))
    return DatasetManifest(entries=tuple(chosen))


def evaluate(
    predict_fn: Callable[[str], Period | None],
    testset: DatasetManifest,
    workers: int = 1,
    dataset_counts: Mapping[Period, int] | None = None,
) -> AccuracyReport:
    """Count exact per-period accuracy.

    `predict_fn` maps an image ref to a Period, or None for the reject
    outcome (counted as an error). Predictions may fan out across
    `workers` threads; aggregation is order-independent.
    """
    refs = [ref for ref, _ in testset.entries]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            predictions = list(pool.map(predict_fn, refs))
    else:
        predictions = [predict_fn(ref) for ref in refs]

    correct = {p: 0 for p in PERIODS}
    total = {p: 0 for p in PERIODS}
    for (ref, truth), predicted in zip(testset.entries, predictions):
        total[truth] += 1
        if predicted == truth:
            correct[truth] += 1
    per_period = {
        p: PeriodStats(correct=correct[p], total=total[p])
        for p in PERIODS
        if total[p] > 0
    }
    return AccuracyReport(per_period=per_period, dataset_counts=dataset_counts)


_DYNASTY_TITLES = {
    Dynasty.SHANG: "Shang",
    Dynasty.WESTERN_ZHOU: "Western Zhou",
    Dynasty.SPRING_AND_AUTUMN: "Spring and Autumn",
    Dynasty.WARRING_STATES: "Warring States",
}

_CELL = 9
_LABEL = 10
_TOTAL = 9


def truncate_percent(value: float, decimals: int) -> str:
    """Format value*100 truncated (not rounded) to `decimals` places."""
    scaled = int(value * 100 * 10**decimals + 1e-9)
    text = f"{scaled / 10**decimals:.{decimals}f}"
    return text


def render_table(report: AccuracyReport) -> str:
    """Fixed-width table: dynasty header, Number row, Accuracy row."""
    shares = report.number_shares()
    header_top = ["Period".ljust(_LABEL), "Total".rjust(_TOTAL)]
    header_phase = ["".ljust(_LABEL), "".rjust(_TOTAL)]
    dynasty_cells: list[str] = []
    for dynasty in Dynasty:
        phases = [p for p in PERIODS if p.dynasty == dynasty]
        width = _CELL * len(phases)
        dynasty_cells.append(_DYNASTY_TITLES[dynasty].center(width))
        for p in phases:
            header_phase.append(p.phase.value.rjust(_CELL))
    header_top.extend(dynasty_cells)

    number_row = ["Number".ljust(_LABEL), str(report.dataset_total()).rjust(_TOTAL)]
    for p in PERIODS:
        number_row.append((truncate_percent(shares[p], 1) + "%").rjust(_CELL))

    overall = report.overall
    accuracy_row = [
        "Accuracy".ljust(_LABEL),
        (truncate_percent(overall.accuracy, 2) + "%").rjust(_TOTAL),
    ]
    for p in PERIODS:
        stats = report.per_period.get(p)
        cell = "-" if stats is None else truncate_percent(stats.accuracy, 2) + "%"
        accuracy_row.append(cell.rjust(_CELL))

    return "\n".join(
        [
            "".join(header_top),
            "".join(header_phase),
            "".join(number_row),
            "".join(accuracy_row),
        ]
    ) + "\n"


def report_to_kv(report: AccuracyReport) -> str:
    """Machine-readable key=value form of the report."""
    lines = []
    overall = report.overall
    lines.append(f"overall.correct={overall.correct}")
    lines.append(f"overall.total={overall.total}")
    lines.append(f"overall.accuracy={overall.accuracy!r}")
    for p in PERIODS:
        stats = report.per_period.get(p)
        if stats is None:
            continue
        lines.append(f"{p}.correct={stats.correct}")
        lines.append(f"{p}.total={stats.total}")
        lines.append(f"{p}.accuracy={stats.accuracy!r}")
    return "\n".join(lines) + "\n"
