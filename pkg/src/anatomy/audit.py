"""Corpus statistics for prompt collections.

Single-pass streaming accumulation with integer counters; every derived
ratio is computed at report time from exact integer sums, so sharded
accumulation merges bit-identically and any context length can be
evaluated after one tokenization pass. Token-frequency and length
statistics are properties of the untruncated token streams; the context
length only enters the utilization reports.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Iterator

from anatomy.bpe import MergeTable, content_token_ids, normalize_text
from anatomy.errors import ValidationError

TOPK_POINTS = (1, 10, 100, 1000)


@dataclass(frozen=True)
class PromptRecord:
    text: str
    source: str = ""


@dataclass(frozen=True)
class ContextUtilizationReport:
    """Context-window utilization of a corpus at one context length."""

    context_len: int
    info_density: float
    padding_fraction: float
    truncation_rate: float
    token_loss: float
    n_prompts: int

    def to_dict(self) -> dict:
        return {
            "context_len": self.context_len,
            "info_density": self.info_density,
            "padding_fraction": self.padding_fraction,
            "truncation_rate": self.truncation_rate,
            "token_loss": self.token_loss,
            "n_prompts": self.n_prompts,
        }


@dataclass(frozen=True)
class VocabCoverageReport:
    used_tokens: int
    coverage: float
    special_share: float
    topk_share: dict[int, float]
    histogram: dict[str, dict[int, int]]

    def to_dict(self) -> dict:
        return {
            "used_tokens": self.used_tokens,
            "coverage": self.coverage,
            "special_share": self.special_share,
            "topk_share": {str(k): v for k, v in sorted(self.topk_share.items())},
            "histogram": {
                src: {str(n): c for n, c in sorted(h.items())}
                for src, h in sorted(self.histogram.items())
            },
        }


@dataclass
class AuditStats:
    """Mergeable integer accumulators over a (deduplicated) corpus.

    ``length_hist`` counts prompts by token length |t| (content tokens
    plus the two markers); ``freq`` counts token-id occurrences
    including the markers.
    """

    n_prompts: int = 0
    sum_len: int = 0
    length_hist: Counter = field(default_factory=Counter)
    length_by_source: dict[str, Counter] = field(default_factory=dict)
    freq: Counter = field(default_factory=Counter)
    n_skipped: int = 0

    def add(self, record: PromptRecord, table: MergeTable) -> None:
        text = record.text if isinstance(record.text, str) else None
        normalized = normalize_text(text) if text is not None else ""
        if not normalized:
            self.n_skipped += 1
            return
        ids = content_token_ids(table, normalized)
        t_len = len(ids) + 2
        self.n_prompts += 1
        self.sum_len += t_len
        self.length_hist[t_len] += 1
        self.length_by_source.setdefault(record.source, Counter())[t_len] += 1
        self.freq.update(ids)
        self.freq[table.sot_id] += 1
        self.freq[table.eot_id] += 1

    def merge(self, other: "AuditStats") -> "AuditStats":
        """Combine shard accumulators; associative and commutative."""
        out = AuditStats(
            n_prompts=self.n_prompts + other.n_prompts,
            sum_len=self.sum_len + other.sum_len,
            length_hist=self.length_hist + other.length_hist,
            freq=self.freq + other.freq,
            n_skipped=self.n_skipped + other.n_skipped,
        )
        for src_stats in (self.length_by_source, other.length_by_source):
            for src, hist in src_stats.items():
                out.length_by_source.setdefault(src, Counter()).update(hist)
        return out

    def context_report(self, context_len: int) -> ContextUtilizationReport:
        if context_len < 3:
            raise ValidationError(f"context length must be >= 3, got {context_len}")
        if self.n_prompts == 0:
            raise ValidationError("corpus is empty after deduplication")
        sum_min = 0
        truncated_prompts = 0
        dropped = 0
        for t_len, count in self.length_hist.items():
            sum_min += count * min(t_len, context_len)
            if t_len > context_len:
                truncated_prompts += count
                dropped += count * (t_len - context_len)
        info_density = sum_min / (self.n_prompts * context_len)
        return ContextUtilizationReport(
            context_len=context_len,
            info_density=info_density,
            padding_fraction=1.0 - info_density,
            truncation_rate=truncated_prompts / self.n_prompts,
            token_loss=dropped / self.sum_len,
            n_prompts=self.n_prompts,
        )

    def vocab_report(self, table: MergeTable) -> VocabCoverageReport:
        if self.n_prompts == 0:
            raise ValidationError("corpus is empty after deduplication")
        used = len(self.freq)
        total = sum(self.freq.values())
        specials = self.freq[table.sot_id] + self.freq[table.eot_id]
        # Ties broken by id so the top-k curve is deterministic.
        ordered = sorted(self.freq.items(), key=lambda kv: (-kv[1], kv[0]))
        topk: dict[int, float] = {}
        running = 0
        points = [k for k in TOPK_POINTS if k < used] + [used]
        next_i = 0
        for rank, (_tok, count) in enumerate(ordered, start=1):
            running += count
            while next_i < len(points) and rank == points[next_i]:
                topk[rank] = running / total
                next_i += 1
        return VocabCoverageReport(
            used_tokens=used,
            coverage=used / table.vocab_size,
            special_share=specials / total,
            topk_share=topk,
            histogram={src: dict(h) for src, h in self.length_by_source.items()},
        )


def dedup(records: Iterable[PromptRecord]) -> Iterator[PromptRecord]:
    """Drop later records whose normalized text was already seen."""
    seen: set[str] = set()
    for rec in records:
        key = normalize_text(rec.text) if isinstance(rec.text, str) else ""
        if key:
            if key in seen:
                continue
            seen.add(key)
        yield rec


def accumulate(records: Iterable[PromptRecord], table: MergeTable) -> AuditStats:
    """Deduplicate and tokenize a corpus into mergeable statistics."""
    stats = AuditStats()
    for rec in dedup(records):
        stats.add(rec, table)
    return stats


def audit(
    records: Iterable[PromptRecord], table: MergeTable, context_len: int
) -> tuple[ContextUtilizationReport, VocabCoverageReport]:
    """Full corpus audit at one context length."""
    stats = accumulate(records, table)
    return stats.context_report(context_len), stats.vocab_report(table)


def sweep(
    records: Iterable[PromptRecord], table: MergeTable, context_lens: list[int]
) -> list[ContextUtilizationReport]:
    """Utilization reports for several context lengths, one pass."""
    if not context_lens:
        raise ValidationError("need at least one context length")
    for length in context_lens:
        if length < 3:
            raise ValidationError(f"context length must be >= 3, got {length}")
    stats = accumulate(records, table)
    return [stats.context_report(length) for length in context_lens]
