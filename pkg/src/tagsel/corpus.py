"""CoNLL corpus reading, writing, splitting and tree sanity checks.

The canonical dialect is the 10-column tab-separated format
(ID FORM LEMMA CPOS POS FEATS HEAD DEPREL PHEAD PDEPREL) with "_" for
absent values and FEATS encoded as "attr=value|attr=value".  Files in
the comment-bearing dialect are tolerated: comment lines and range or
decimal token ids are skipped.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Iterable, Iterator, Sequence

log = logging.getLogger(__name__)

# Morph bundles are ordered tuples of (attribute, value) pairs.  A value of
# None marks a bare flag written without "=".
MorphBundle = tuple[tuple[str, str | None], ...]


class CorpusFormatError(ValueError):
    """Raised on malformed input, with the offending line number."""


@dataclass(frozen=True, slots=True)
class Token:
    index: int              # 1-based position in the sentence
    form: str
    lemma: str = ""
    pos: str = ""
    morph: MorphBundle = ()
    head: int = 0           # 0 is the artificial root
    deprel: str = ""


@dataclass(frozen=True, slots=True)
class Sentence:
    tokens: tuple[Token, ...]

    def __len__(self) -> int:
        return len(self.tokens)

    def __iter__(self) -> Iterator[Token]:
        return iter(self.tokens)

    def __getitem__(self, i: int) -> Token:
        return self.tokens[i]


def parse_feats(text: str, lineno: int = 0) -> MorphBundle:
    """Parse a FEATS column into an ordered attribute bundle."""
    if text == "_" or text == "":
        return ()
    pairs: list[tuple[str, str | None]] = []
    seen: set[str] = set()
    for piece in text.split("|"):
        if "=" in piece:
            attr, value = piece.split("=", 1)
        else:
            attr, value = piece, None
        if attr in seen:
            raise CorpusFormatError(f"line {lineno}: duplicate morph attribute {attr!r}")
        seen.add(attr)
        pairs.append((attr, value))
    return tuple(pairs)


def format_feats(morph: MorphBundle) -> str:
    if not morph:
        return "_"
    return "|".join(a if v is None else f"{a}={v}" for a, v in morph)


def morph_label(morph: MorphBundle, attributes: Sequence[str] | None = None) -> str:
    """Canonical class-label string for a bundle, sorted by attribute name.

    When ``attributes`` is given the bundle is restricted to that subset
    first.  The empty bundle maps to "_".
    """
    pairs = morph
    if attributes is not None:
        keep = set(attributes)
        pairs = tuple(p for p in morph if p[0] in keep)
    if not pairs:
        return "_"
    return "|".join(a if v is None else f"{a}={v}" for a, v in sorted(pairs))


def morph_attributes(sentences: Iterable[Sentence]) -> list[str]:
    """All attribute names occurring in the corpus, sorted."""
    names: set[str] = set()
    for sent in sentences:
        for tok in sent:
            names.update(a for a, _ in tok.morph)
    return sorted(names)


def restrict_morph(sentences: Sequence[Sentence], attributes: Sequence[str]) -> list[Sentence]:
    """Copy of the corpus with morph bundles restricted to the given attributes."""
    keep = set(attributes)
    out = []
    for sent in sentences:
        toks = tuple(
            replace(t, morph=tuple(p for p in t.morph if p[0] in keep)) for t in sent
        )
        out.append(Sentence(toks))
    return out


def _parse_token(cols: list[str], lineno: int) -> Token:
    if len(cols) < 8:
        raise CorpusFormatError(
            f"line {lineno}: expected at least 8 tab-separated columns, got {len(cols)}"
        )
    try:
        index = int(cols[0])
    except ValueError:
        raise CorpusFormatError(f"line {lineno}: malformed token id {cols[0]!r}") from None
    form = cols[1]
    lemma = "" if cols[2] == "_" else cols[2]
    cpos, fpos = cols[3], cols[4]
    pos = fpos if fpos != "_" else (cpos if cpos != "_" else "")
    morph = parse_feats(cols[5], lineno)
    try:
        head = int(cols[6])
    except ValueError:
        raise CorpusFormatError(f"line {lineno}: non-integer head {cols[6]!r}") from None
    deprel = "" if cols[7] == "_" else cols[7]
    return Token(index, form, lemma, pos, morph, head, deprel)


def _finish_sentence(tokens: list[Token], lineno: int) -> Sentence:
    for want, tok in enumerate(tokens, start=1):
        if tok.index != want:
            raise CorpusFormatError(
                f"line {lineno}: token ids not sequential (expected {want}, got {tok.index})"
            )
    n = len(tokens)
    for tok in tokens:
        if not 0 <= tok.head <= n:
            raise CorpusFormatError(
                f"line {lineno}: head {tok.head} out of range for {n}-token sentence"
            )
        if tok.head == tok.index:
            raise CorpusFormatError(f"line {lineno}: token {tok.index} is its own head")
    return Sentence(tuple(tokens))


def read_conll(source: str | Path | Iterable[str]) -> list[Sentence]:
    """Read sentences from a path or an iterable of lines (UTF-8)."""
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8") as fh:
            return read_conll(fh)
    sentences: list[Sentence] = []
    tokens: list[Token] = []
    lineno = 0
    for line in source:
        lineno += 1
        line = line.rstrip("\n")
        if not line.strip():
            if tokens:
                sentences.append(_finish_sentence(tokens, lineno))
                tokens = []
            continue
        if line.startswith("#"):
            continue
        cols = line.split("\t")
        tok_id = cols[0]
        if "-" in tok_id or "." in tok_id:
            continue  # range or empty-node ids carry no tree positions
        tokens.append(_parse_token(cols, lineno))
    if tokens:
        sentences.append(_finish_sentence(tokens, lineno + 1))
    return sentences


def write_conll(sentences: Iterable[Sentence], path: str | Path, predicted: bool = False) -> None:
    """Write sentences in the canonical 10-column format.

    With ``predicted`` the HEAD/DEPREL values are mirrored into the
    PHEAD/PDEPREL columns, the usual convention for system output.
    """
    with open(path, "w", encoding="utf-8") as fh:
        for sent in sentences:
            for tok in sent:
                pos = tok.pos or "_"
                row = [
                    str(tok.index),
                    tok.form,
                    tok.lemma or "_",
                    pos,
                    pos,
                    format_feats(tok.morph),
                    str(tok.head),
                    tok.deprel or "_",
                    str(tok.head) if predicted else "_",
                    (tok.deprel or "_") if predicted else "_",
                ]
                fh.write("\t".join(row) + "\n")
            fh.write("\n")


def _round_half_up(x: float) -> int:
    return int(x + 0.5)


def split_train_dev(
    sentences: Sequence[Sentence], fraction: float = 0.8, seed: int = 1
) -> tuple[list[Sentence], list[Sentence]]:
    """Deterministic seeded split; train gets round(fraction * N) sentences.

    Membership is a pure function of (seed, sentence position); both halves
    keep the original corpus order.
    """
    if not 0.0 < fraction < 1.0:
        raise ValueError(f"fraction must be strictly between 0 and 1, got {fraction}")
    n = len(sentences)
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    n_train = _round_half_up(fraction * n)
    chosen = set(idx[:n_train])
    train = [sentences[i] for i in range(n) if i in chosen]
    dev = [sentences[i] for i in range(n) if i not in chosen]
    return train, dev


def kfold_indices(n: int, k: int, seed: int = 1) -> list[tuple[list[int], list[int]]]:
    """Seeded k-fold index partition; fold sizes differ by at most one.

    The first N mod k folds receive the extra item.  Returns
    (train, test) index pairs, each ascending.
    """
    if not 2 <= k <= n:
        raise ValueError(f"need 2 <= k <= {n}, got k={k}")
    idx = list(range(n))
    random.Random(seed).shuffle(idx)
    base, extra = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < extra else 0)
        test_idx = set(idx[start : start + size])
        start += size
        test = [j for j in range(n) if j in test_idx]
        train = [j for j in range(n) if j not in test_idx]
        folds.append((train, test))
    return folds


def kfold(
    sentences: Sequence[Sentence], k: int, seed: int = 1
) -> list[tuple[list[Sentence], list[Sentence]]]:
    """Seeded k-fold partition of the corpus; see kfold_indices."""
    return [
        ([sentences[i] for i in train], [sentences[i] for i in test])
        for train, test in kfold_indices(len(sentences), k, seed)
    ]


def _descendants(sentence: Sentence) -> list[set[int]] | None:
    """Descendant sets per head position (index 0 is the root), None on a cycle."""
    n = len(sentence)
    children: list[list[int]] = [[] for _ in range(n + 1)]
    for tok in sentence:
        children[tok.head].append(tok.index)
    seen: set[int] = set()
    desc: list[set[int]] = [set() for _ in range(n + 1)]
    order: list[int] = []
    stack = [0]
    while stack:
        node = stack.pop()
        if node in seen:
            return None
        seen.add(node)
        order.append(node)
        stack.extend(children[node])
    if len(seen) != n + 1:
        return None  # unreachable tokens, i.e. a cycle off the root
    for node in reversed(order):
        for child in children[node]:
            desc[node] |= desc[child] | {child}
    return desc


def is_projective(sentence: Sentence) -> bool:
    """True iff the arcs form a tree rooted at 0 with no crossing arcs.

    An arc (h, d) is projective when every position strictly between h and
    d is a descendant of h; the artificial root sits at position 0.
    """
    desc = _descendants(sentence)
    if desc is None:
        return False
    for tok in sentence:
        lo, hi = sorted((tok.head, tok.index))
        for k in range(lo + 1, hi):
            if k not in desc[tok.head]:
                return False
    return True


def is_parser_trainable(sentence: Sentence) -> bool:
    """Projective tree with exactly one child of the artificial root."""
    roots = sum(1 for tok in sentence if tok.head == 0)
    return roots == 1 and is_projective(sentence)


def filter_parseable(sentences: Sequence[Sentence]) -> tuple[list[Sentence], int]:
    """Drop sentences a shift-reduce derivation cannot produce.

    Returns the kept sentences and the skipped count (also logged).  Skipped
    sentences remain perfectly usable for tagger training.
    """
    kept = [s for s in sentences if is_parser_trainable(s)]
    skipped = len(sentences) - len(kept)
    if skipped:
        log.info("skipped %d non-derivable sentence(s) for parser training", skipped)
    return kept, skipped
