"""Greedy forward template selection and morphological attribute selection.

The greedy loop keeps a best-so-far metric B and a selected set X.  Each
iteration takes the first remaining candidate (file order for static
runs; information-theoretic ranking for dynamic runs), trains a model on
X plus the candidate, and accepts the candidate iff the metric reaches
B + delta.  Every candidate is trained exactly once.

Dynamic ordering ranks candidates by the incremental gain of the
relevance-minus-redundancy objective

    Phi(S) = mean_i I(X_i; C) - mean_{i,j} I(X_i; X_j)

computed in bits over rare-merged template value distributions.  The
redundancy mean runs over all ordered pairs including the diagonal
(self-information, i.e. entropy); an off-diagonal variant is available.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from tagsel.corpus import Sentence, kfold_indices, morph_attributes
from tagsel.evaluation import evaluate, paired_randomization
from tagsel.learner import TrainConfig
from tagsel.parser import BeamConfig, parse_sentence, train_joint
from tagsel.tagger import accuracy, gold_label, jackknife_nbest, tag_corpus, train_tagger
from tagsel.templates import TagContext, TemplateSet, template_value

log = logging.getLogger(__name__)

RARE_THRESHOLD = 2  # values seen fewer times than this merge into one symbol


def mutual_information(counts) -> float:
    """Mutual information in bits from a joint contingency table.

    ``counts`` is a 2-D array of joint counts or a mapping
    {(x, y): count}.  Zero-count cells contribute nothing.
    """
    if isinstance(counts, dict):
        xs = sorted({x for x, _ in counts})
        ys = sorted({y for _, y in counts})
        xi = {v: i for i, v in enumerate(xs)}
        yi = {v: i for i, v in enumerate(ys)}
        table = np.zeros((len(xs), len(ys)))
        for (x, y), c in counts.items():
            table[xi[x], yi[y]] = c
    else:
        table = np.asarray(counts, dtype=float)
    if table.ndim != 2:
        raise ValueError("need a 2-D contingency table")
    if np.any(table < 0):
        raise ValueError("negative counts")
    total = table.sum()
    if total <= 0:
        raise ValueError("empty contingency table")
    p = table / total
    px = p.sum(axis=1, keepdims=True)
    py = p.sum(axis=0, keepdims=True)
    nz = p > 0
    ratio = np.ones_like(p)
    outer = px * py
    ratio[nz] = p[nz] / outer[nz]
    return float(np.sum(p[nz] * np.log2(ratio[nz])))


@dataclass
class MITable:
    """Relevance-to-class and pairwise redundancy, both in bits.

    The redundancy diagonal holds each variable's entropy (its
    self-information), by construction of I(X; X).
    """

    template_ids: tuple[int, ...]
    relevance: np.ndarray
    redundancy: np.ndarray

    def __post_init__(self):
        self._pos = {tid: i for i, tid in enumerate(self.template_ids)}

    def rel(self, tid: int) -> float:
        return float(self.relevance[self._pos[tid]])

    def red(self, a: int, b: int) -> float:
        return float(self.redundancy[self._pos[a], self._pos[b]])


def _encode_rare(values: list[str], threshold: int) -> np.ndarray:
    """Integer codes with all values seen < threshold merged into one."""
    counts: dict[str, int] = {}
    for v in values:
        counts[v] = counts.get(v, 0) + 1
    code: dict[str, int] = {}
    rare_code = -1
    for v in sorted(counts):
        if counts[v] < threshold:
            if rare_code < 0:
                rare_code = len(code)
                code["\x00rare"] = rare_code
            code[v] = rare_code
        else:
            code[v] = len(code)
    return np.asarray([code[v] for v in values], dtype=np.int64)


def _joint_mi(a: np.ndarray, b: np.ndarray) -> float:
    ka = int(a.max()) + 1
    kb = int(b.max()) + 1
    table = np.bincount(a * kb + b, minlength=ka * kb).reshape(ka, kb)
    return mutual_information(table)


def build_mi_table(
    sentences: Sequence[Sentence],
    templates: TemplateSet,
    candidate_ids: Sequence[int],
    *,
    target: str = "pos",
    attributes: Sequence[str] | None = None,
    rare_threshold: int = RARE_THRESHOLD,
) -> MITable:
    """Estimate the MI table over all token instances of the corpus.

    Template variables are instantiated against the sentences' own
    annotation; the class variable is the tagging target.
    """
    candidate_ids = list(candidate_ids)
    values: list[list[str]] = [[] for _ in candidate_ids]
    classes: list[str] = []
    restrict = attributes if target == "morph" else None
    for sent in sentences:
        ctx = TagContext.from_sentence(sent, restrict)
        for pos in range(len(sent)):
            classes.append(gold_label(sent.tokens[pos], target, attributes))
            for slot, tid in enumerate(candidate_ids):
                values[slot].append(template_value(templates[tid], sent, pos, ctx))
    if not classes:
        raise ValueError("empty corpus")
    codes = [_encode_rare(v, rare_threshold) for v in values]
    cls_code = _encode_rare(classes, 1)  # classes are never merged
    T = len(candidate_ids)
    relevance = np.zeros(T)
    redundancy = np.zeros((T, T))
    for i in range(T):
        relevance[i] = _joint_mi(codes[i], cls_code)
        for j in range(i, T):
            mi = _joint_mi(codes[i], codes[j])
            redundancy[i, j] = redundancy[j, i] = mi
    return MITable(tuple(candidate_ids), relevance, redundancy)


def mrmr_order(
    remaining: Sequence[int],
    selected: Sequence[int],
    table: MITable,
    exclude_diagonal: bool = False,
) -> list[int]:
    """Remaining candidates ranked by incremental objective gain.

    Equivalent to ranking by Phi(selected + {i}) since Phi(selected) is a
    shared constant; no mutual information is re-estimated.  Ties break
    toward the lower template id.
    """
    sel = list(selected)
    m = len(sel)
    sum_rel = sum(table.rel(t) for t in sel)
    pair_sum = sum(table.red(a, b) for a in sel for b in sel)
    if exclude_diagonal:
        pair_sum -= sum(table.red(a, a) for a in sel)
    scored = []
    for tid in remaining:
        d = (sum_rel + table.rel(tid)) / (m + 1)
        cross = sum(table.red(tid, s) for s in sel)
        if exclude_diagonal:
            pairs = (m + 1) * m
            r = (pair_sum + 2.0 * cross) / pairs if pairs else 0.0
        else:
            r = (pair_sum + 2.0 * cross + table.red(tid, tid)) / (m + 1) ** 2
        scored.append((-(d - r), tid))
    scored.sort()
    return [tid for _, tid in scored]


def mean_relevance(subset: Sequence[int], table: MITable) -> float:
    """Average class-relevance of a template subset; 0 for the empty set."""
    subset = list(subset)
    if not subset:
        return 0.0
    return sum(table.rel(t) for t in subset) / len(subset)


def mean_redundancy(
    subset: Sequence[int], table: MITable, exclude_diagonal: bool = False
) -> float:
    """Average pairwise redundancy over all ordered pairs of the subset.

    The default includes the diagonal (each variable against itself, i.e.
    its entropy), dividing by |subset|²; the off-diagonal variant averages
    the remaining |subset|·(|subset|−1) pairs.  0 for the empty set.
    """
    subset = list(subset)
    if not subset:
        return 0.0
    if exclude_diagonal:
        pairs = [(a, b) for a in subset for b in subset if a != b]
        return sum(table.red(a, b) for a, b in pairs) / len(pairs) if pairs else 0.0
    return sum(table.red(a, b) for a in subset for b in subset) / len(subset) ** 2


def phi_objective(
    subset: Sequence[int], table: MITable, exclude_diagonal: bool = False
) -> float:
    """Direct (non-incremental) objective value for a subset; test oracle aid."""
    if not subset:
        return 0.0
    return mean_relevance(subset, table) - mean_redundancy(subset, table, exclude_diagonal)


@dataclass(frozen=True, slots=True)
class SelectionConfig:
    delta: float = 0.02
    ordering: str = "static"      # "static" or "mrmr"
    figure1_literal: bool = False
    exclude_diagonal: bool = False

    def __post_init__(self):
        if self.ordering not in ("static", "mrmr"):
            raise ValueError(f"unknown ordering {self.ordering!r}")


@dataclass(slots=True)
class TraceRow:
    iteration: int
    template_id: int
    metric: float
    best: float
    accepted: bool
    ordering: tuple[int, ...] | None
    elapsed: float


@dataclass
class SelectionTrace:
    initial_metric: float
    rows: list[TraceRow] = field(default_factory=list)

    @property
    def best_sequence(self) -> list[float]:
        return [self.initial_metric] + [r.best for r in self.rows]


class SelectionAborted(RuntimeError):
    """A candidate training failed; carries the partial trace for persistence."""

    def __init__(self, cause: BaseException, selected: list[int], trace: "SelectionTrace"):
        super().__init__(f"selection aborted: {cause}")
        self.cause = cause
        self.selected = selected
        self.trace = trace


def greedy_select(
    candidates: Sequence[int],
    metric_fn: Callable[[list[int]], float],
    config: SelectionConfig = SelectionConfig(),
    mi_table: MITable | None = None,
) -> tuple[list[int], SelectionTrace]:
    """Greedy forward selection; every candidate is trained exactly once.

    The default acceptance rule admits a candidate iff the metric reaches
    best + delta, with best initialized to the empty-set metric.  The
    literal variant initializes best to 0 and accepts iff
    metric + delta > best, reproducing the original loop verbatim.
    A failure while training a candidate raises SelectionAborted carrying
    the rows recorded so far.
    """
    if config.ordering == "mrmr" and mi_table is None:
        raise ValueError("dynamic ordering needs an MI table")
    if config.figure1_literal:
        best = 0.0
    else:
        best = float(metric_fn([]))
    trace = SelectionTrace(initial_metric=best)
    selected: list[int] = []
    remaining = list(candidates)
    iteration = 0
    while remaining:
        snapshot = None
        if config.ordering == "mrmr":
            remaining = mrmr_order(remaining, selected, mi_table, config.exclude_diagonal)
            snapshot = tuple(remaining)
        head = remaining.pop(0)
        t0 = time.perf_counter()
        try:
            m = float(metric_fn(selected + [head]))
        except Exception as exc:
            raise SelectionAborted(exc, selected, trace) from exc
        elapsed = time.perf_counter() - t0
        if config.figure1_literal:
            accepted = m + config.delta > best
        else:
            accepted = m >= best + config.delta
        if accepted:
            best = m
            selected.append(head)
        iteration += 1
        trace.rows.append(
            TraceRow(iteration, head, m, best, accepted, snapshot, elapsed)
        )
        log.info(
            "selection %d: template %d metric %.4f best %.4f %s",
            iteration, head, m, best, "accepted" if accepted else "rejected",
        )
    return selected, trace


def make_tagger_metric(
    train: Sequence[Sentence],
    dev: Sequence[Sentence],
    templates: TemplateSet,
    config: TrainConfig,
    *,
    passes: int = 2,
    target: str = "pos",
    attributes: Sequence[str] | None = None,
) -> Callable[[list[int]], float]:
    """Metric closure: train the standalone tagger, return dev accuracy."""

    def metric(active_ids: list[int]) -> float:
        model = train_tagger(
            train, templates, active_ids, config,
            passes=passes, target=target, attributes=attributes,
        )
        pred, _ = tag_corpus(model, dev)
        return accuracy(pred, dev, field=target, attributes=attributes)

    return metric


def make_joint_metric(
    train: Sequence[Sentence],
    dev: Sequence[Sentence],
    templates: TemplateSet,
    config: TrainConfig,
    beam: BeamConfig,
    *,
    metric: str = "pos",
    target: str = "pos",
    attributes: Sequence[str] | None = None,
    tagger_config: TrainConfig | None = None,
    tagger_passes: int = 2,
    jackknife_folds: int = 10,
) -> Callable[[list[int]], float]:
    """Metric closure for the joint system.

    The preprocessing tagger is fixed across candidates, so its jackknifed
    training lists and the dev n-best lists are computed once up front.
    """
    if metric not in ("pos", "morph", "uas", "las"):
        raise ValueError(f"unknown metric {metric!r}")
    tcfg = tagger_config or config
    classes = sorted({gold_label(t, target, attributes) for s in train for t in s})
    nbest_train = jackknife_nbest(
        train, templates, templates.ids, tcfg,
        passes=tagger_passes, target=target, attributes=attributes,
        folds=jackknife_folds, classes=classes,
    )
    tagger_model = train_tagger(
        train, templates, templates.ids, tcfg,
        passes=tagger_passes, target=target, attributes=attributes, classes=classes,
    )
    _, dev_nbest = tag_corpus(tagger_model, dev)

    def run(active_ids: list[int]) -> float:
        jm = train_joint(
            train, templates, active_ids, config, beam,
            target=target, attributes=attributes,
            nbest_train=nbest_train, tagger_model=tagger_model,
        )
        parsed = [parse_sentence(jm, s, nbest=nb) for s, nb in zip(dev, dev_nbest)]
        if metric in ("pos", "morph"):
            return accuracy(parsed, dev, field=metric, attributes=attributes)
        report = evaluate(dev, parsed)
        return report.uas if metric == "uas" else report.las

    return run


@dataclass(slots=True)
class AttributeDecision:
    attribute: str
    las_delta: float
    uas_delta: float
    p_value: float
    accepted: bool
    las_with: float
    las_without: float


def _cv_parse(
    sentences: Sequence[Sentence],
    attributes: Sequence[str],
    templates: TemplateSet,
    active_ids: Sequence[int],
    config: TrainConfig,
    beam: BeamConfig,
    folds: Sequence[tuple[list[int], list[int]]],
    tagger_config: TrainConfig | None,
    tagger_passes: int,
    jackknife_folds: int,
) -> list[Sentence]:
    """Cross-validated parses: each sentence parsed by a fold it never trained."""
    out: list[Sentence | None] = [None] * len(sentences)
    for train_idx, test_idx in folds:
        model = train_joint(
            [sentences[i] for i in train_idx], templates, active_ids, config, beam,
            target="morph", attributes=attributes,
            tagger_config=tagger_config, tagger_passes=tagger_passes,
            jackknife_folds=jackknife_folds,
        )
        for i in test_idx:
            out[i] = parse_sentence(model, sentences[i])
    return out  # type: ignore[return-value]


def select_attributes(
    sentences: Sequence[Sentence],
    templates: TemplateSet,
    active_ids: Sequence[int],
    config: TrainConfig = TrainConfig(iterations=12, loss="hamming"),
    beam: BeamConfig = BeamConfig(tree_beam=8),
    *,
    attributes: Sequence[str] | None = None,
    folds: int = 10,
    min_delta: float = 0.1,
    max_p: float = 0.01,
    shuffles: int = 10000,
    seed: int = 1,
    tagger_config: TrainConfig | None = None,
    tagger_passes: int = 2,
    jackknife_folds: int = 10,
) -> list[AttributeDecision]:
    """Decide, per attribute, whether it helps labeled attachment.

    Each attribute is evaluated independently by cross-validated parsing
    with the morph bundle restricted to that single attribute, against a
    baseline with the empty bundle.  An attribute is accepted iff the
    labeled attachment gain reaches ``min_delta`` and a paired
    approximate randomization test over per-sentence scores yields
    p <= ``max_p``.
    """
    present = set(morph_attributes(sentences))
    if attributes is None:
        attributes = sorted(present)
    else:
        absent = [a for a in attributes if a not in present]
        if absent:
            log.warning("skipping attribute(s) absent from the corpus: %s", ", ".join(absent))
            attributes = [a for a in attributes if a in present]
    fold_idx = kfold_indices(len(sentences), folds, seed)
    base = _cv_parse(
        sentences, [], templates, active_ids, config, beam, fold_idx,
        tagger_config, tagger_passes, jackknife_folds,
    )
    base_report = evaluate(sentences, base)
    decisions = []
    for attr in attributes:
        parsed = _cv_parse(
            sentences, [attr], templates, active_ids, config, beam, fold_idx,
            tagger_config, tagger_passes, jackknife_folds,
        )
        report = evaluate(sentences, parsed)
        las_delta = report.las - base_report.las
        uas_delta = report.uas - base_report.uas
        p = paired_randomization(
            report.per_sentence["labeled"], base_report.per_sentence["labeled"],
            report.per_sentence["tokens"], shuffles=shuffles, seed=seed,
        )
        decisions.append(
            AttributeDecision(
                attribute=attr,
                las_delta=las_delta,
                uas_delta=uas_delta,
                p_value=p,
                accepted=las_delta >= min_delta and p <= max_p,
                las_with=report.las,
                las_without=base_report.las,
            )
        )
        log.info(
            "attribute %s: LAS %+0.2f p=%.4f -> %s",
            attr, las_delta, p, "accepted" if decisions[-1].accepted else "rejected",
        )
    return decisions
