"""Joint tagging and dependency parsing with a shift-reduce beam decoder.

The transition system keeps the artificial root at the bottom of the
stack.  SHIFT(t) moves the buffer front onto the stack and assigns it
the tag t, chosen from a filtered per-token n-best candidate list.
LEFT-ARC(l) makes the stack top the head of the second-top and pops the
second-top; it never applies to the root.  RIGHT-ARC(l) makes the
second-top the head of the top and pops the top; attachment to the root
is allowed only for the last remaining word once the buffer is empty,
so every derivation yields a single-root projective tree and has length
exactly 2n.

The beam is breadth-synchronous.  After every step the candidate pool
is pruned in two phases: the best-scoring representatives of the
highest-scoring distinct trees (by labeled arc-set signature) survive
first, then a bounded number of tag variants of the kept trees, in
global score order.  Ties are broken by transition kind (SHIFT before
LEFT-ARC before RIGHT-ARC), then by tag or label vocabulary index,
applied lexicographically over the derivation history.

Training uses early updates: the first step at which no beam item
matches the gold derivation prefix triggers a passive-aggressive update
against the current best item, with hamming loss (wrong tags plus wrong
arcs).  N-best lists for training come from jackknifed taggers so the
parser never sees oracle-quality input.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

import numpy as np

from tagsel import __version__
from tagsel.corpus import Sentence, is_parser_trainable, morph_label, parse_feats
from tagsel.learner import TrainConfig, WeightStore, load_model, save_model
from tagsel.tagger import (
    NBest,
    TaggerModel,
    gold_label,
    jackknife_nbest,
    tag_corpus,
    train_tagger,
)
from tagsel.templates import (
    NONE_VALUE,
    PART_SEP,
    Extractor,
    TemplateSet,
    feature_key,
    parse_template_spec,
)

log = logging.getLogger(__name__)

SHIFT, LEFT, RIGHT = 0, 1, 2

# Structural features live in a reserved template-id range so their keys
# cannot collide with selectable template ids from a spec file.
STRUCT_ID_BASE = 1 << 32

_STRUCT_TEMPLATES: tuple[tuple[str, ...], ...] = (
    ("form:s0",),
    ("form:s1",),
    ("form:b0",),
    ("form:b1",),
    ("pos:s0",),
    ("pos:s1",),
    ("pos:s2",),
    ("morph:s0",),
    ("morph:s1",),
    ("pos:s0", "pos:s1"),
    ("form:s0", "form:s1"),
    ("pos:s0", "form:b0"),
    ("pos:s0", "pos:s1", "form:b0"),
    ("morph:s0", "morph:s1"),
    ("pos:s0", "morph:s1"),
    ("morph:s0", "pos:s1"),
    ("dist",),
    ("bias",),
)


class OracleError(ValueError):
    """Raised when no derivation can produce the gold tree."""


@dataclass(frozen=True, slots=True)
class BeamConfig:
    tree_beam: int = 40
    tag_variant_beam: int = 8
    k: int = 2                    # n-best candidates kept per token
    alpha: float = 0.25           # drop candidates scoring below best - alpha
    variant_scope: str = "global"  # "global" or "per_tree"

    def __post_init__(self):
        if self.tree_beam < 1 or self.tag_variant_beam < 0:
            raise ValueError("beam sizes must be positive")
        if self.k < 1 or self.alpha < 0:
            raise ValueError("need k >= 1 and alpha >= 0")
        if self.variant_scope not in ("global", "per_tree"):
            raise ValueError(f"unknown variant scope {self.variant_scope!r}")


def filter_candidates(nbest: NBest, k: int = 2, alpha: float = 0.25) -> list[str]:
    """Top-k tags, minus those scoring more than alpha below the best.

    The result is never empty: the best candidate always survives.
    """
    if not nbest:
        raise ValueError("empty n-best list")
    best = nbest[0][1]
    out = [tag for tag, score in nbest[:k] if score >= best - alpha]
    return out


class ActionSpace:
    """Transition vocabulary: one class per SHIFT tag and per arc label."""

    def __init__(self, tags: Sequence[str], labels: Sequence[str]):
        self.tags = tuple(tags)
        self.labels = tuple(labels)
        self.classes = (
            tuple(f"SHIFT:{t}" for t in self.tags)
            + tuple(f"LEFT:{l}" for l in self.labels)
            + tuple(f"RIGHT:{l}" for l in self.labels)
        )
        self.tag_index = {t: i for i, t in enumerate(self.tags)}
        self.label_index = {l: i for i, l in enumerate(self.labels)}
        self.n_tags = len(self.tags)
        self.n_labels = len(self.labels)

    def class_of(self, kind: int, arg: str) -> int:
        if kind == SHIFT:
            return self.tag_index[arg]
        base = self.n_tags + (0 if kind == LEFT else self.n_labels)
        return base + self.label_index[arg]

    def tie_key(self, kind: int, arg: str) -> tuple[int, int]:
        idx = self.tag_index[arg] if kind == SHIFT else self.label_index[arg]
        return (kind, idx)


@dataclass(slots=True)
class ParserItem:
    """One beam item: a derivation prefix and its running score."""

    stack: tuple[int, ...]                      # tree positions, 0 = root
    cursor: int                                 # next 0-based buffer index
    arcs: tuple[tuple[int, int, str], ...]      # (head, dependent, label)
    tags: tuple[str | None, ...]                # per-position tag assignment
    score: float
    history: tuple[tuple[int, str], ...]        # (kind, arg) per step
    tie_key: tuple[tuple[int, int], ...]        # sort key alongside -score

    def config_sig(self):
        return (frozenset(self.arcs), self.tags)


def initial_item(n: int) -> ParserItem:
    return ParserItem((0,), 0, (), (None,) * n, 0.0, (), ())


def legal_transitions(
    item: ParserItem, n: int, candidates: Sequence[str], labels: Sequence[str]
) -> list[tuple[int, str]]:
    """All (kind, arg) pairs applicable in this state."""
    out: list[tuple[int, str]] = []
    if item.cursor < n:
        out.extend((SHIFT, t) for t in candidates)
    if len(item.stack) >= 2:
        s1 = item.stack[-2]
        if s1 != 0:
            out.extend((LEFT, l) for l in labels)
            out.extend((RIGHT, l) for l in labels)
        elif item.cursor == n and len(item.stack) == 2:
            out.extend((RIGHT, l) for l in labels)
    return out


def apply_transition(
    item: ParserItem, kind: int, arg: str, score_delta: float, tie: tuple[int, int]
) -> ParserItem:
    history = item.history + ((kind, arg),)
    tie_key = item.tie_key + (tie,)
    score = item.score + score_delta
    if kind == SHIFT:
        pos = item.cursor + 1
        tags = item.tags[: item.cursor] + (arg,) + item.tags[item.cursor + 1 :]
        return ParserItem(
            item.stack + (pos,), item.cursor + 1, item.arcs, tags, score, history, tie_key
        )
    if kind == LEFT:
        s0, s1 = item.stack[-1], item.stack[-2]
        arcs = item.arcs + ((s0, s1, arg),)
        return ParserItem(
            item.stack[:-2] + (s0,), item.cursor, arcs, item.tags, score, history, tie_key
        )
    s0, s1 = item.stack[-1], item.stack[-2]
    arcs = item.arcs + ((s1, s0, arg),)
    return ParserItem(item.stack[:-1], item.cursor, arcs, item.tags, score, history, tie_key)


def is_terminal(item: ParserItem, n: int) -> bool:
    return item.cursor == n and item.stack == (0,)


def item_rank(item: ParserItem) -> tuple[float, tuple]:
    return (-item.score, item.tie_key)


def prune(items: Sequence[ParserItem], cfg: BeamConfig) -> list[ParserItem]:
    """Two-phase beam prune; see the module docstring.

    Items with identical (arc set, tags) configurations are interchangeable
    going forward, so only the best-scoring one is retained.  The single
    highest-scoring item always survives.
    """
    ranked = sorted(items, key=item_rank)
    seen_config: set = set()
    reps: list[ParserItem] = []
    rep_sigs: set = set()
    rest: list[ParserItem] = []
    for it in ranked:
        sig = it.config_sig()
        if sig in seen_config:
            continue
        seen_config.add(sig)
        arcsig = sig[0]
        if arcsig not in rep_sigs:
            if len(reps) < cfg.tree_beam:
                reps.append(it)
                rep_sigs.add(arcsig)
            # groups past the tree beam are dropped along with their variants
        else:
            rest.append(it)
    if cfg.variant_scope == "global":
        variants = rest[: cfg.tag_variant_beam]
    else:
        taken: dict = {}
        variants = []
        for it in rest:
            arcsig = frozenset(it.arcs)
            if taken.get(arcsig, 0) < cfg.tag_variant_beam:
                variants.append(it)
                taken[arcsig] = taken.get(arcsig, 0) + 1
    return sorted(reps + variants, key=item_rank)


def oracle(
    sentence: Sentence, target: str = "pos", attributes: Sequence[str] | None = None
) -> list[tuple[int, str]]:
    """Canonical gold derivation: (kind, arg) per step, length exactly 2n.

    LEFT-ARC applies as soon as it matches gold and the second-top has
    collected all its dependents; RIGHT-ARC under the same completeness
    condition; otherwise SHIFT with the gold tag.  Raises OracleError on
    non-projective or multi-root trees.
    """
    n = len(sentence)
    head = {t.index: t.head for t in sentence}
    label = {t.index: t.deprel for t in sentence}
    tags = [gold_label(t, target, attributes) for t in sentence]
    need: dict[int, int] = {i: 0 for i in range(n + 1)}
    for t in sentence:
        need[t.head] += 1
    got = {i: 0 for i in range(n + 1)}
    stack = [0]
    cursor = 0
    seq: list[tuple[int, str]] = []
    while not (cursor == n and stack == [0]):
        acted = False
        if len(stack) >= 2:
            s0, s1 = stack[-1], stack[-2]
            if s1 != 0 and head[s1] == s0 and got[s1] == need[s1]:
                seq.append((LEFT, label[s1]))
                stack.pop(-2)
                got[s0] += 1
                acted = True
            elif (
                head[s0] == s1
                and got[s0] == need[s0]
                and (s1 != 0 or (cursor == n and len(stack) == 2))
            ):
                seq.append((RIGHT, label[s0]))
                stack.pop()
                got[s1] += 1
                acted = True
        if not acted:
            if cursor < n:
                seq.append((SHIFT, tags[cursor]))
                stack.append(cursor + 1)
                cursor += 1
            else:
                raise OracleError(
                    "gold tree is not derivable (non-projective or multi-root)"
                )
    return seq


class _JointContext:
    """Tag lookups over a beam item's assignments (0-based positions)."""

    __slots__ = ("tags", "base_pos", "base_morph", "target_is_pos")

    def __init__(self, tags, base_pos, base_morph, target_is_pos):
        self.tags = tags
        self.base_pos = base_pos
        self.base_morph = base_morph
        self.target_is_pos = target_is_pos

    def pos_at(self, p: int) -> str | None:
        return self.tags[p] if self.target_is_pos else self.base_pos[p]

    def morph_at(self, p: int) -> str | None:
        return self.base_morph[p] if self.target_is_pos else self.tags[p]


class _SentenceDecoder:
    """Per-sentence scoring state: cached features and key tables."""

    def __init__(self, sentence: Sentence, prepared, target: str):
        self.sentence = sentence
        self.n = len(sentence)
        self.prepared = prepared
        self.target_is_pos = target == "pos"
        self.base_pos = [t.pos or None for t in sentence]
        self.base_morph = [morph_label(t.morph) for t in sentence]
        self.forms = [t.form for t in sentence]
        self._struct_cache: dict[tuple[int, str], int] = {}
        self._state_cache: dict[tuple, list[int]] = {}

    def ctx(self, item: ParserItem) -> _JointContext:
        return _JointContext(item.tags, self.base_pos, self.base_morph, self.target_is_pos)

    def _anchor_positions(self, item: ParserItem):
        s = item.stack
        L = len(s)
        c = item.cursor
        return {
            "s0": s[-1] if L >= 1 else None,
            "s1": s[-2] if L >= 2 else None,
            "s2": s[-3] if L >= 3 else None,
            "b0": c + 1 if c < self.n else None,
            "b1": c + 2 if c + 1 < self.n else None,
            "b2": c + 3 if c + 2 < self.n else None,
        }

    def _atom(self, spec: str, anchors, ctx) -> str:
        if spec == "bias":
            return "1"
        if spec == "dist":
            s0, s1 = anchors["s0"], anchors["s1"]
            if s1 is None:
                return "<nil>"
            return str(min(s0 - s1, 5))
        field, name = spec.split(":")
        tp = anchors[name]
        if tp is None:
            return f"<nil:{name}>"
        if tp == 0:
            return "<root>"
        p = tp - 1
        if field == "form":
            return self.forms[p]
        if field == "pos":
            v = ctx.pos_at(p)
        else:
            v = ctx.morph_at(p)
        return v if v is not None else NONE_VALUE

    def struct_keys(self, item: ParserItem, ctx) -> list[int]:
        # every input _atom can read is fixed per sentence except the tag
        # assignments at the six anchor positions, so (anchor positions,
        # tags at those positions) keys the whole feature bag exactly;
        # callers must not mutate the returned list
        s = item.stack
        tags = item.tags
        c = item.cursor
        L = len(s)
        n = self.n
        s0 = s[-1] if L >= 1 else None
        s1 = s[-2] if L >= 2 else None
        s2 = s[-3] if L >= 3 else None
        sig = (
            s0, s1, s2, c,
            tags[s0 - 1] if s0 else None,
            tags[s1 - 1] if s1 else None,
            tags[s2 - 1] if s2 else None,
            tags[c] if c < n else None,
            tags[c + 1] if c + 1 < n else None,
            tags[c + 2] if c + 2 < n else None,
        )
        cached = self._state_cache.get(sig)
        if cached is not None:
            return cached
        anchors = self._anchor_positions(item)
        cache = self._struct_cache
        keys = []
        for i, atoms in enumerate(_STRUCT_TEMPLATES):
            value = PART_SEP.join(self._atom(a, anchors, ctx) for a in atoms)
            cell = (i, value)
            key = cache.get(cell)
            if key is None:
                key = feature_key(STRUCT_ID_BASE + i, value)
                cache[cell] = key
            keys.append(key)
        self._state_cache[sig] = keys
        return keys

    def tag_keys(self, item: ParserItem, ctx) -> list[int]:
        return self.prepared.keys(item.cursor, ctx)


def _expand(
    dec: _SentenceDecoder,
    items: Sequence[ParserItem],
    ws: WeightStore,
    space: ActionSpace,
    candidates: Sequence[Sequence[str]],
) -> list[ParserItem]:
    children: list[ParserItem] = []
    n = dec.n
    for item in items:
        ctx = dec.ctx(item)
        struct_vec = ws.score_all(dec.struct_keys(item, ctx))
        moves = legal_transitions(
            item, n, candidates[item.cursor] if item.cursor < n else (), space.labels
        )
        tag_vec = None
        for kind, arg in moves:
            ci = space.class_of(kind, arg)
            delta = struct_vec[ci]
            if kind == SHIFT:
                if tag_vec is None:
                    tag_vec = ws.score_all(dec.tag_keys(item, ctx))
                delta = delta + tag_vec[ci]
            children.append(
                apply_transition(item, kind, arg, float(delta), space.tie_key(kind, arg))
            )
    return children


def beam_decode(
    dec: _SentenceDecoder,
    ws: WeightStore,
    space: ActionSpace,
    candidates: Sequence[Sequence[str]],
    cfg: BeamConfig,
    gold_sigs: Sequence | None = None,
) -> tuple[ParserItem, int | None]:
    """Run 2n breadth-synchronous steps; returns (best item, failure step).

    With gold configuration signatures supplied, decoding stops at the
    first step where no beam item matches the gold prefix, returning that
    step's best item and its index (early-update point); otherwise the
    failure step is None.
    """
    n = dec.n
    beam = [initial_item(n)]
    for step in range(2 * n):
        beam = prune(_expand(dec, beam, ws, space, candidates), cfg)
        if gold_sigs is not None:
            sig = gold_sigs[step]
            if not any(it.config_sig() == sig for it in beam):
                return beam[0], step + 1
    return beam[0], None


def _derivation_bags(
    dec: _SentenceDecoder, history: Sequence[tuple[int, str]], space: ActionSpace
) -> tuple[list[str], list[list[int]], ParserItem]:
    """Per-decision (class label, feature keys) groups for a derivation,
    plus the item the derivation ends in."""
    classes: list[str] = []
    groups: list[list[int]] = []
    item = initial_item(dec.n)
    for kind, arg in history:
        ctx = dec.ctx(item)
        keys = dec.struct_keys(item, ctx)
        if kind == SHIFT:
            keys = keys + dec.tag_keys(item, ctx)
        classes.append(space.classes[space.class_of(kind, arg)])
        groups.append(keys)
        item = apply_transition(item, kind, arg, 0.0, (0, 0))
    return classes, groups, item


def hamming_loss(pred: ParserItem, gold: ParserItem) -> float:
    """Tag errors plus arc errors between two (possibly partial) items.

    Tags are compared per position (an unassigned tag mismatching an
    assigned one counts); arcs are compared as per-dependent attachments,
    so a missing, extra, or differing attachment each count once.  The
    loss is therefore strictly positive whenever the configurations
    differ, which keeps the first update of training from degenerating
    when the predicted prefix simply omits the gold arcs.
    """
    loss = 0.0
    for a, b in zip(pred.tags, gold.tags):
        if a != b:
            loss += 1.0
    att_p = {d: (h, l) for h, d, l in pred.arcs}
    att_g = {d: (h, l) for h, d, l in gold.arcs}
    for d in att_p.keys() | att_g.keys():
        if att_p.get(d) != att_g.get(d):
            loss += 1.0
    return loss


@dataclass
class JointModel:
    templates: TemplateSet
    active_ids: tuple[int, ...]
    space: ActionSpace
    weights: WeightStore
    tagger: TaggerModel
    beam: BeamConfig
    target: str = "pos"
    attributes: tuple[str, ...] | None = None
    config: TrainConfig = TrainConfig()
    skipped_sentences: int = 0
    forced_gold_tags: int = 0


def _gold_prefix_sigs(n: int, derivation: Sequence[tuple[int, str]]):
    sigs = []
    item = initial_item(n)
    for kind, arg in derivation:
        item = apply_transition(item, kind, arg, 0.0, (0, 0))
        sigs.append(item.config_sig())
    return sigs


def train_joint(
    sentences: Sequence[Sentence],
    templates: TemplateSet,
    active_ids: Sequence[int],
    config: TrainConfig = TrainConfig(iterations=12, loss="hamming"),
    beam: BeamConfig = BeamConfig(),
    *,
    target: str = "pos",
    attributes: Sequence[str] | None = None,
    nbest_train: Sequence[Sequence[NBest]] | None = None,
    tagger_model: TaggerModel | None = None,
    tagger_config: TrainConfig | None = None,
    tagger_passes: int = 2,
    jackknife_folds: int = 10,
) -> JointModel:
    """Train the joint tagger-parser.

    Non-derivable sentences (non-projective or multi-root) are skipped with
    a logged count; they remain usable for tagger training elsewhere.
    Training n-best lists are jackknifed unless supplied; the bundled
    inference tagger is trained
    on the full filtered corpus unless supplied.  When the gold tag was
    filtered out of a token's candidates it is forced back in during
    training and counted.
    """
    keep_flags = [is_parser_trainable(s) for s in sentences]
    kept = [s for s, f in zip(sentences, keep_flags) if f]
    skipped = len(sentences) - len(kept)
    if skipped:
        log.info("skipped %d non-derivable sentence(s) for parser training", skipped)
    if not kept:
        raise ValueError("no derivable sentences in the training corpus")
    tagger_cfg = tagger_config or config
    gold_tag_vocab = sorted({gold_label(t, target, attributes) for s in kept for t in s})
    labels = sorted({t.deprel for s in kept for t in s})
    space = ActionSpace(gold_tag_vocab, labels)

    if tagger_model is None:
        tagger_model = train_tagger(
            kept, templates, templates.ids, tagger_cfg,
            passes=tagger_passes, target=target, attributes=attributes,
            classes=gold_tag_vocab,
        )

    if nbest_train is None:
        if len(kept) >= 2:
            nbest_all = jackknife_nbest(
                kept, templates, templates.ids, tagger_cfg,
                passes=tagger_passes, target=target, attributes=attributes,
                folds=jackknife_folds, classes=gold_tag_vocab,
            )
        else:
            # a single-sentence corpus cannot be jackknifed; fall back to
            # the full-corpus tagger's own lists
            log.info("corpus too small to jackknife; using full-corpus n-best")
            _, nbest_all = tag_corpus(tagger_model, kept)
    else:
        if len(nbest_train) != len(sentences):
            raise ValueError("nbest_train must align with the input corpus")
        nbest_all = [nb for nb, f in zip(nbest_train, keep_flags) if f]

    extractor = Extractor(templates, active_ids)
    decoders = [_SentenceDecoder(s, extractor.prepare(s), target) for s in kept]
    gold_data = []
    forced = 0
    for s, dec, sent_nbest in zip(kept, decoders, nbest_all):
        derivation = oracle(s, target, attributes)
        sigs = _gold_prefix_sigs(len(s), derivation)
        gold_tags = [gold_label(t, target, attributes) for t in s]
        cands = []
        for t, token_nbest in enumerate(sent_nbest):
            cand = [
                c for c in filter_candidates(token_nbest, beam.k, beam.alpha)
                if c in space.tag_index
            ]
            if gold_tags[t] not in cand:
                cand = cand + [gold_tags[t]]
                forced += 1
            cands.append(cand)
        gold_data.append((derivation, sigs, cands))
    if forced:
        log.info("forced the gold tag into the candidate list %d time(s)", forced)

    ws = WeightStore(space.classes)
    rng = random.Random(config.seed)
    order = list(range(len(kept)))
    for _ in range(config.iterations):
        rng.shuffle(order)
        for i in order:
            dec = decoders[i]
            derivation, sigs, cands = gold_data[i]
            ws.tick()
            best, fail_step = beam_decode(dec, ws, space, cands, beam, gold_sigs=sigs)
            if fail_step is None and best.config_sig() == sigs[-1]:
                continue
            upto = fail_step if fail_step is not None else len(derivation)
            g_classes, g_groups, g_item = _derivation_bags(dec, derivation[:upto], space)
            p_classes, p_groups, _ = _derivation_bags(dec, best.history, space)
            loss = hamming_loss(best, g_item)
            ws.mira_update(g_groups, p_groups, g_classes, p_classes, loss, config.C)

    return JointModel(
        templates=templates,
        active_ids=tuple(sorted(active_ids)),
        space=space,
        weights=ws.average_and_freeze(),
        tagger=tagger_model,
        beam=beam,
        target=target,
        attributes=tuple(attributes) if attributes is not None else None,
        config=config,
        skipped_sentences=skipped,
        forced_gold_tags=forced,
    )


def parse_sentence(
    model: JointModel, sentence: Sentence, nbest: Sequence[NBest] | None = None
) -> Sentence:
    """Parse one sentence; tags and arcs both come from the beam decode."""
    if len(sentence) == 0:
        return sentence
    if nbest is None:
        _, nb = tag_corpus(model.tagger, [sentence])
        nbest = nb[0]
    cands = []
    for token_nbest in nbest:
        cand = [
            c for c in filter_candidates(token_nbest, model.beam.k, model.beam.alpha)
            if c in model.space.tag_index
        ]
        cands.append(cand or [model.space.tags[0]])
    extractor = Extractor(model.templates, model.active_ids)
    dec = _SentenceDecoder(sentence, extractor.prepare(sentence), model.target)
    best, _ = beam_decode(dec, model.weights, model.space, cands, model.beam)
    heads = {d: (h, l) for h, d, l in best.arcs}
    toks = []
    for tok in sentence:
        h, l = heads[tok.index]
        tag = best.tags[tok.index - 1]
        if model.target == "pos":
            toks.append(replace(tok, pos=tag, head=h, deprel=l))
        else:
            toks.append(replace(tok, morph=parse_feats(tag), head=h, deprel=l))
    return Sentence(tuple(toks))


def parse_corpus(model: JointModel, sentences: Sequence[Sentence]) -> list[Sentence]:
    tagged, nbests = tag_corpus(model.tagger, sentences)
    return [
        parse_sentence(model, s, nbest=nb) for s, nb in zip(sentences, nbests)
    ]


def save_joint(path: str | Path, model: JointModel, extra: dict | None = None) -> None:
    metadata = {
        **(extra or {}),
        "kind": "joint",
        "code_version": __version__,
        "template_text": model.templates.text,
        "active_ids": list(model.active_ids),
        "target": model.target,
        "attributes": list(model.attributes) if model.attributes is not None else None,
        "tags": list(model.space.tags),
        "labels": list(model.space.labels),
        "beam": {
            "tree_beam": model.beam.tree_beam,
            "tag_variant_beam": model.beam.tag_variant_beam,
            "k": model.beam.k,
            "alpha": model.beam.alpha,
            "variant_scope": model.beam.variant_scope,
        },
        "config": {
            "iterations": model.config.iterations,
            "C": model.config.C,
            "seed": model.config.seed,
            "loss": model.config.loss,
        },
        "skipped_sentences": model.skipped_sentences,
        "forced_gold_tags": model.forced_gold_tags,
        "tagger": {
            "template_text": model.tagger.templates.text,
            "active_ids": list(model.tagger.active_ids),
            "passes": model.tagger.passes,
            "target": model.tagger.target,
            "attributes": list(model.tagger.attributes)
            if model.tagger.attributes is not None
            else None,
            "config": {
                "iterations": model.tagger.config.iterations,
                "C": model.tagger.config.C,
                "seed": model.tagger.config.seed,
                "loss": model.tagger.config.loss,
            },
        },
    }
    save_model(
        path, metadata, {"parser": model.weights, "tagger": model.tagger.weights}
    )


def load_joint(path: str | Path) -> JointModel:
    metadata, sections = load_model(path)
    if metadata.get("kind") != "joint":
        raise ValueError(f"not a joint model: kind={metadata.get('kind')!r}")
    t = metadata["tagger"]
    tcfg = t["config"]
    tagger = TaggerModel(
        templates=parse_template_spec(t["template_text"]),
        active_ids=tuple(t["active_ids"]),
        classes=sections["tagger"].classes,
        weights=sections["tagger"],
        passes=t["passes"],
        target=t["target"],
        attributes=tuple(t["attributes"]) if t["attributes"] is not None else None,
        config=TrainConfig(tcfg["iterations"], tcfg["C"], tcfg["seed"], tcfg["loss"]),
    )
    b = metadata["beam"]
    cfg = metadata["config"]
    return JointModel(
        templates=parse_template_spec(metadata["template_text"]),
        active_ids=tuple(metadata["active_ids"]),
        space=ActionSpace(metadata["tags"], metadata["labels"]),
        weights=sections["parser"],
        tagger=tagger,
        beam=BeamConfig(
            b["tree_beam"], b["tag_variant_beam"], b["k"], b["alpha"], b["variant_scope"]
        ),
        target=metadata["target"],
        attributes=tuple(metadata["attributes"])
        if metadata["attributes"] is not None
        else None,
        config=TrainConfig(cfg["iterations"], cfg["C"], cfg["seed"], cfg["loss"]),
        skipped_sentences=metadata["skipped_sentences"],
        forced_gold_tags=metadata["forced_gold_tags"],
    )
