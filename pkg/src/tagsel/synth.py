"""Deterministic synthetic treebank generator.

Produces small projective, single-root dependency corpora whose parts of
speech are surface-marked by word endings, so that affix features
generalize across an open stem vocabulary.  Options add a surface-marked
case distinction on nouns (agent vs patient), scrambled constituent
order (which makes arc labels unrecoverable from positions alone and
hence makes case genuinely informative), and a constant nuisance
attribute on every token.

Word shape conventions:

    noun   stem + "ka"              (+ "ta" when marked accusative)
    verb   stem + "ir"
    adj    stem + "ny"
    adv    stem + "ul"
    det    "er" / "ol"
    punct  "."

Every sentence is verb-rooted: agent and patient noun phrases attach to
the verb as ``subj`` and ``obj``; determiners and adjectives attach to
their noun; adverbs and final punctuation attach to the verb.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass

from tagsel.corpus import MorphBundle, Sentence, Token

_ONSETS = "bdgklmnprstv"
_VOWELS = "aeiou"


@dataclass(frozen=True, slots=True)
class SynthConfig:
    sentences: int = 200
    seed: int = 1
    noun_stems: int = 50
    verb_stems: int = 25
    adj_stems: int = 15
    p_det: float = 0.4
    p_adj: float = 0.3
    p_adv: float = 0.3
    p_punct: float = 0.9
    scrambled: bool = False   # patient-first order half the time
    with_case: bool = False   # annotate nom/acc case on nouns
    with_dummy: bool = False  # constant attribute on every token

    def __post_init__(self):
        if self.sentences <= 0:
            raise ValueError("need at least one sentence")


def _stem_pool(rng: random.Random, count: int, taken: set[str]) -> list[str]:
    syllables = ["".join(p) for p in itertools.product(_ONSETS, _VOWELS)]
    pool = []
    attempts = 0
    while len(pool) < count:
        stem = rng.choice(syllables) + rng.choice(syllables)
        attempts += 1
        if attempts > 100000:
            raise ValueError("stem pool exhausted; lower the stem counts")
        if stem in taken:
            continue
        taken.add(stem)
        pool.append(stem)
    return pool


def _bundle(pairs: list[tuple[str, str]], dummy: bool) -> MorphBundle:
    if dummy:
        pairs = pairs + [("dummy", "x")]
    return tuple(sorted(pairs))


def generate_treebank(config: SynthConfig = SynthConfig()) -> list[Sentence]:
    """Generate a fully deterministic corpus for the given configuration."""
    rng = random.Random(config.seed)
    taken: set[str] = set()
    nouns = _stem_pool(rng, config.noun_stems, taken)
    verbs = _stem_pool(rng, config.verb_stems, taken)
    adjs = _stem_pool(rng, config.adj_stems, taken)

    sentences = []
    for _ in range(config.sentences):
        # Draft tokens with symbolic heads, then number them.
        draft: list[dict] = []

        def noun_phrase(case: str, label: str) -> int:
            """Append an NP; return the draft index of its head noun."""
            head_slot = len(draft)
            n_extra = 0
            if rng.random() < config.p_det:
                draft.append({"form": rng.choice(["er", "ol"]), "lemma": "",
                              "pos": "DET", "morph": _bundle([], config.with_dummy),
                              "head": None, "deprel": "det"})
                n_extra += 1
            if rng.random() < config.p_adj:
                stem = rng.choice(adjs)
                draft.append({"form": stem + "ny", "lemma": stem,
                              "pos": "ADJ", "morph": _bundle([], config.with_dummy),
                              "head": None, "deprel": "amod"})
                n_extra += 1
            stem = rng.choice(nouns)
            form = stem + "ka" + ("ta" if case == "acc" else "")
            pairs = [("case", case)] if config.with_case else []
            draft.append({"form": form, "lemma": stem, "pos": "NOUN",
                          "morph": _bundle(pairs, config.with_dummy),
                          "head": None, "deprel": label})
            noun_idx = head_slot + n_extra
            for j in range(head_slot, noun_idx):
                draft[j]["head"] = noun_idx
            return noun_idx

        agent_first = not (config.scrambled and rng.random() < 0.5)
        first_case, first_label = ("nom", "subj") if agent_first else ("acc", "obj")
        second_case, second_label = ("acc", "obj") if agent_first else ("nom", "subj")

        first_head = noun_phrase(first_case, first_label)
        verb_idx = len(draft)
        stem = rng.choice(verbs)
        draft.append({"form": stem + "ir", "lemma": stem, "pos": "VERB",
                      "morph": _bundle([], config.with_dummy),
                      "head": -1, "deprel": "root"})
        second_head = noun_phrase(second_case, second_label)
        draft[first_head]["head"] = verb_idx
        draft[second_head]["head"] = verb_idx
        if rng.random() < config.p_adv:
            stem = rng.choice(adjs)
            draft.append({"form": stem + "ul", "lemma": stem, "pos": "ADV",
                          "morph": _bundle([], config.with_dummy),
                          "head": verb_idx, "deprel": "advmod"})
        if rng.random() < config.p_punct:
            draft.append({"form": ".", "lemma": "", "pos": "PUNCT",
                          "morph": _bundle([], config.with_dummy),
                          "head": verb_idx, "deprel": "punct"})

        tokens = []
        for i, d in enumerate(draft):
            head = 0 if d["head"] == -1 else d["head"] + 1
            tokens.append(Token(
                index=i + 1, form=d["form"], lemma=d["lemma"], pos=d["pos"],
                morph=d["morph"], head=head, deprel=d["deprel"],
            ))
        sentences.append(Sentence(tuple(tokens)))
    return sentences
