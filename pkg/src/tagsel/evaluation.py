"""Scoring: tag accuracy, attachment scores, timing, significance tests.

All tokens count by default; an option drops tokens whose form consists
entirely of Unicode punctuation.  Morphological accuracy is exact-set
equality over the declared attribute subset.  Significance between two
runs on the same corpus is a paired approximate randomization test over
per-sentence correct counts.
"""

from __future__ import annotations

import unicodedata
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tagsel.corpus import Sentence, morph_label

_EPS = 1e-12


def is_punctuation(form: str) -> bool:
    """True when every character is in a Unicode punctuation category."""
    return bool(form) and all(unicodedata.category(c).startswith("P") for c in form)


@dataclass
class EvalReport:
    pos_accuracy: float
    morph_accuracy: float
    uas: float
    las: float
    n_sentences: int
    n_tokens: int
    sec_per_sentence: float | None = None
    template_count: int | None = None
    full_template_count: int | None = None
    per_sentence: dict[str, np.ndarray] = field(default_factory=dict, repr=False)

    @property
    def reduction_pct(self) -> float | None:
        """Percent of the full template inventory dropped by selection."""
        if self.template_count is None or not self.full_template_count:
            return None
        return 100.0 * (1.0 - self.template_count / self.full_template_count)

    def to_record(self) -> dict:
        rec = {
            "pos_accuracy": self.pos_accuracy,
            "morph_accuracy": self.morph_accuracy,
            "uas": self.uas,
            "las": self.las,
            "n_sentences": self.n_sentences,
            "n_tokens": self.n_tokens,
        }
        if self.sec_per_sentence is not None:
            rec["sec_per_sentence"] = self.sec_per_sentence
        if self.template_count is not None:
            rec["template_count"] = self.template_count
        if self.full_template_count is not None:
            rec["full_template_count"] = self.full_template_count
            rec["reduction_pct"] = self.reduction_pct
        return rec


def evaluate(
    gold: Sequence[Sentence],
    pred: Sequence[Sentence],
    *,
    exclude_punct: bool = False,
    attributes: Sequence[str] | None = None,
    sec_per_sentence: float | None = None,
    template_count: int | None = None,
    full_template_count: int | None = None,
) -> EvalReport:
    """Score predicted sentences against gold, paired by position."""
    if len(gold) != len(pred):
        raise ValueError(f"corpus size mismatch: {len(gold)} vs {len(pred)}")
    n = len(gold)
    pos_c = np.zeros(n, dtype=np.int64)
    morph_c = np.zeros(n, dtype=np.int64)
    head_c = np.zeros(n, dtype=np.int64)
    lab_c = np.zeros(n, dtype=np.int64)
    toks = np.zeros(n, dtype=np.int64)
    for i, (gs, ps) in enumerate(zip(gold, pred)):
        if len(gs) != len(ps):
            raise ValueError(f"sentence {i}: length mismatch {len(gs)} vs {len(ps)}")
        for gt, pt in zip(gs, ps):
            if gt.form != pt.form:
                raise ValueError(
                    f"sentence {i}: token forms diverge ({gt.form!r} vs {pt.form!r})"
                )
            if exclude_punct and is_punctuation(gt.form):
                continue
            toks[i] += 1
            if gt.pos == pt.pos:
                pos_c[i] += 1
            if morph_label(gt.morph, attributes) == morph_label(pt.morph, attributes):
                morph_c[i] += 1
            if gt.head == pt.head:
                head_c[i] += 1
                if gt.deprel == pt.deprel:
                    lab_c[i] += 1
    total = int(toks.sum())
    if total == 0:
        raise ValueError("no tokens to score")
    return EvalReport(
        pos_accuracy=float(100.0 * pos_c.sum() / total),
        morph_accuracy=float(100.0 * morph_c.sum() / total),
        uas=float(100.0 * head_c.sum() / total),
        las=float(100.0 * lab_c.sum() / total),
        n_sentences=n,
        n_tokens=total,
        sec_per_sentence=sec_per_sentence,
        template_count=template_count,
        full_template_count=full_template_count,
        per_sentence={
            "pos": pos_c, "morph": morph_c, "heads": head_c,
            "labeled": lab_c, "tokens": toks,
        },
    )


def paired_randomization(
    correct_a,
    correct_b,
    tokens,
    *,
    shuffles: int = 10000,
    seed: int = 1,
) -> float:
    """Two-sided paired approximate randomization p-value.

    The statistic is the absolute difference of corpus-level accuracies;
    each shuffle swaps the two systems' per-sentence counts with
    probability one half.  p = (#{stat >= observed} + 1) / (shuffles + 1),
    so identical inputs give p = 1.
    """
    a = np.asarray(correct_a, dtype=np.float64)
    b = np.asarray(correct_b, dtype=np.float64)
    t = np.asarray(tokens, dtype=np.float64)
    if a.shape != b.shape or a.shape != t.shape:
        raise ValueError("per-sentence arrays must align")
    total = t.sum()
    if total <= 0:
        raise ValueError("no tokens")
    diff = a - b
    observed = abs(diff.sum()) / total
    rng = np.random.default_rng(seed)
    flips = rng.random((shuffles, diff.size)) < 0.5
    swapped = np.where(flips, -diff, diff).sum(axis=1)
    stats = np.abs(swapped) / total
    extreme = int(np.count_nonzero(stats >= observed - _EPS))
    return (extreme + 1) / (shuffles + 1)


@dataclass(slots=True)
class CompareResult:
    pos_delta: float
    morph_delta: float
    uas_delta: float
    las_delta: float
    pos_p: float
    morph_p: float
    uas_p: float
    las_p: float

    def to_record(self) -> dict:
        return {
            "pos_delta": self.pos_delta, "pos_p": self.pos_p,
            "morph_delta": self.morph_delta, "morph_p": self.morph_p,
            "uas_delta": self.uas_delta, "uas_p": self.uas_p,
            "las_delta": self.las_delta, "las_p": self.las_p,
        }


def compare_runs(
    a: EvalReport, b: EvalReport, *, shuffles: int = 10000, seed: int = 1
) -> CompareResult:
    """Metric deltas (a minus b) with paired significance per metric."""
    if not a.per_sentence or not b.per_sentence:
        raise ValueError("reports lack per-sentence scores")
    ta, tb = a.per_sentence["tokens"], b.per_sentence["tokens"]
    if ta.shape != tb.shape or not np.array_equal(ta, tb):
        raise ValueError("reports score different corpora")

    def p(key: str) -> float:
        return paired_randomization(
            a.per_sentence[key], b.per_sentence[key], ta,
            shuffles=shuffles, seed=seed,
        )

    return CompareResult(
        pos_delta=a.pos_accuracy - b.pos_accuracy,
        morph_delta=a.morph_accuracy - b.morph_accuracy,
        uas_delta=a.uas - b.uas,
        las_delta=a.las - b.las,
        pos_p=p("pos"), morph_p=p("morph"), uas_p=p("heads"), las_p=p("labeled"),
    )


def format_report(report: EvalReport) -> str:
    lines = [
        f"sentences        {report.n_sentences}",
        f"tokens           {report.n_tokens}",
        f"POS accuracy     {report.pos_accuracy:.2f}",
        f"MORPH accuracy   {report.morph_accuracy:.2f}",
        f"UAS              {report.uas:.2f}",
        f"LAS              {report.las:.2f}",
    ]
    if report.sec_per_sentence is not None:
        lines.append(f"sec/sentence     {report.sec_per_sentence:.4f}")
    if report.template_count is not None:
        lines.append(f"templates        {report.template_count}")
    if report.reduction_pct is not None:
        lines.append(f"reduction        {report.reduction_pct:.1f}%")
    return "\n".join(lines)
