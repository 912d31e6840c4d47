"""Shared test utilities: corpus builders, tree samplers, exhaustive search."""

from __future__ import annotations

import random
from typing import Sequence

import numpy as np

from tagsel.corpus import Sentence, Token
from tagsel.learner import WeightStore
from tagsel.parser import (
    ActionSpace,
    BeamConfig,
    ParserItem,
    _expand,
    _SentenceDecoder,
    initial_item,
    is_terminal,
    item_rank,
)
from tagsel.templates import Extractor, TemplateSet


class HashWeights(WeightStore):
    """Frozen pseudo-random weights: each key's vector is derived from its
    hash and a seed, so arbitrary models need no training or key registry."""

    def __init__(self, classes: Sequence[str], seed: int):
        super().__init__(classes)
        self._seed = seed

    def _vec(self, key: int) -> np.ndarray:
        vec = self._w.get(key)
        if vec is None:
            r = np.random.default_rng((self._seed * 1000003 + key) % (2 ** 63))
            vec = r.uniform(-1.0, 1.0, size=self.n_classes)
            self._w[key] = vec
        return vec

    def score(self, features, cls):
        ci = self.class_index(cls)
        return float(sum(self._vec(k)[ci] for k in features))

    def score_all(self, features):
        out = np.zeros(self.n_classes)
        for k in features:
            out += self._vec(k)
        return out


def make_sentence(
    forms: Sequence[str],
    pos: Sequence[str] | None = None,
    heads: Sequence[int] | None = None,
    deprels: Sequence[str] | None = None,
    morphs: Sequence = None,
    lemmas: Sequence[str] | None = None,
) -> Sentence:
    n = len(forms)
    pos = pos or [""] * n
    heads = heads if heads is not None else [0] * n
    deprels = deprels or [""] * n
    morphs = morphs or [()] * n
    lemmas = lemmas or [""] * n
    return Sentence(tuple(
        Token(index=i + 1, form=forms[i], lemma=lemmas[i], pos=pos[i],
              morph=tuple(morphs[i]), head=heads[i], deprel=deprels[i])
        for i in range(n)
    ))


def sample_projective_heads(n: int, rng: random.Random) -> list[int]:
    """Random projective single-root tree as a 1-based head array.

    Spans are recursively carved into contiguous chunks; each chunk's
    chosen node attaches to the span's head and dominates the rest of its
    chunk, so every subtree occupies a contiguous interval (projectivity)
    and the artificial root gets exactly one child.
    """
    heads = [0] * (n + 1)

    def build(lo: int, hi: int, head: int) -> None:
        i = lo
        while i <= hi:
            j = rng.randint(i, hi)
            c = rng.randint(i, j)
            heads[c] = head
            build(i, c - 1, c)
            build(c + 1, j, c)
            i = j + 1

    r = rng.randint(1, n)
    heads[r] = 0
    build(1, r - 1, r)
    build(r + 1, n, r)
    return heads[1:]


def random_tree_sentence(
    rng: random.Random,
    n: int,
    tagset: Sequence[str] = ("N", "V", "A"),
    labels: Sequence[str] = ("l1", "l2"),
) -> Sentence:
    heads = sample_projective_heads(n, rng)
    forms = [f"w{i}" for i in range(1, n + 1)]
    pos = [rng.choice(tagset) for _ in range(n)]
    deprels = [rng.choice(labels) for _ in range(n)]
    return make_sentence(forms, pos=pos, heads=heads, deprels=deprels)


def exhaustive_best(
    dec: _SentenceDecoder,
    ws,
    space: ActionSpace,
    candidates: Sequence[Sequence[str]],
) -> ParserItem:
    """Best terminal item by complete enumeration of all derivations.

    Expands every item with every legal transition (no pruning, no
    deduplication), scoring exactly as the beam decoder does, and returns
    the terminal item minimizing (-score, tie_key).
    """
    frontier = [initial_item(dec.n)]
    for _ in range(2 * dec.n):
        frontier = _expand(dec, frontier, ws, space, candidates)
    assert all(is_terminal(it, dec.n) for it in frontier)
    return min(frontier, key=item_rank)


def make_decoder(
    sentence: Sentence, templates: TemplateSet, active_ids: Sequence[int],
    target: str = "pos",
) -> _SentenceDecoder:
    extractor = Extractor(templates, active_ids)
    return _SentenceDecoder(sentence, extractor.prepare(sentence), target)


def context_corpus(
    n_sentences: int, rng: random.Random, trigger_rate: float = 0.35
) -> list[Sentence]:
    """Corpus where a token's tag is determined by the NEXT token's tag.

    Content words carry deterministic class suffixes ("ko" -> N,
    "ir" -> V).  Trigger words (constant form "da") are tagged A when the
    following content word is an N and B when it is a V, so a left-to-right
    single-pass tagger has no usable evidence at the trigger, while a
    second pass can read the first pass's prediction for the next word.
    """
    stems = [f"{a}{b}" for a in "bdgklm" for b in "aeiou"]
    sentences = []
    for _ in range(n_sentences):
        forms: list[str] = []
        tags: list[str] = []
        for _ in range(rng.randint(4, 8)):
            content_tag = rng.choice(["N", "V"])
            if rng.random() < trigger_rate:
                forms.append("da")
                tags.append("A" if content_tag == "N" else "B")
            suffix = "ko" if content_tag == "N" else "ir"
            forms.append(rng.choice(stems) + rng.choice(stems) + suffix)
            tags.append(content_tag)
        sentences.append(make_sentence(forms, pos=tags))
    return sentences


def template_id(templates: TemplateSet, text: str) -> int:
    for t in templates:
        if t.text == text:
            return t.id
    raise KeyError(text)
