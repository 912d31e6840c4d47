"""Feature templates over token windows, with a tiny spec language.

A template file holds one template per line.  Each template is one or
more parts joined by "+"; a part is ``functor(offset[,offset...])``
where an offset is ``w``, ``w+1`` .. ``w+4`` or ``w-1`` .. ``w-4``.
A part with several offsets concatenates the functor's value at each
offset.  Lines starting with "#" and blank lines are skipped.  Template
ids are assigned by line order and stay stable across runs.

Functors::

    form        surface form                  formlc      lowercased form
    lemma       lemma ("_" when absent)       uppercase   "U"/"L" by first char
    prefix1-5   first n chars (whole word     suffix1-5   last n chars (whole
                when shorter)                             word when shorter)
    suffix1uc-suffix5uc   suffix plus the "U"/"L" capitalization mark
    chars<i>_<j>          characters i..j (1-based, 2<=i<=j<=6), or a
                          short-word marker when the word has < j chars
    length      form length as a string
    number      "Y" iff the form is digits with optional "."/"," groups
                (regex ^[0-9]+([.,][0-9]+)*$), else "N"
    pos, morph  tag assigned at the offset position, or a none marker
                when nothing is assigned there yet

Out-of-range offsets produce boundary values distinct per offset
("<s-1>", "<s-2>", "</s+1>", ...).  Feature keys are 64-bit hashes of
(template id, instantiated value); collisions are accepted.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from hashlib import blake2b
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

from tagsel.corpus import Sentence, morph_label

NONE_VALUE = "<none>"
SHORT_VALUE = "<short>"
PART_SEP = "\x1f"  # reserved joiner for multi-part values
MAX_OFFSET = 4

_NUM_RE = re.compile(r"[0-9]+([.,][0-9]+)*")
_OFFSET_RE = re.compile(r"w(?:([+-])([0-9]+))?$")
_CHARS_RE = re.compile(r"chars([2-6])_([2-6])$")


class TemplateSpecError(ValueError):
    """Raised on malformed template spec text, with the line number."""


@dataclass(frozen=True, slots=True)
class Part:
    kind: str           # functor family: form, prefix, chars, pos, ...
    param: tuple[int, ...]  # () or (n,) or (i, j)
    offset: int


@dataclass(frozen=True, slots=True)
class FeatureTemplate:
    id: int
    text: str                # canonical source line
    parts: tuple[Part, ...]

    @property
    def is_static(self) -> bool:
        """True when no part reads the evolving tag assignment."""
        return all(p.kind not in ("pos", "morph") for p in self.parts)


class TemplateSet:
    """An ordered, immutable collection of templates parsed from spec text."""

    def __init__(self, templates: Sequence[FeatureTemplate], text: str):
        self.templates = tuple(templates)
        self.text = text
        self._by_id = {t.id: t for t in self.templates}

    def __len__(self) -> int:
        return len(self.templates)

    def __iter__(self):
        return iter(self.templates)

    def __getitem__(self, template_id: int) -> FeatureTemplate:
        try:
            return self._by_id[template_id]
        except KeyError:
            raise KeyError(f"no template with id {template_id}") from None

    @property
    def ids(self) -> list[int]:
        return [t.id for t in self.templates]


def _parse_offset(text: str, lineno: int) -> int:
    m = _OFFSET_RE.fullmatch(text.strip())
    if not m:
        raise TemplateSpecError(f"line {lineno}: malformed offset {text!r}")
    if m.group(1) is None:
        return 0
    off = int(m.group(2)) * (1 if m.group(1) == "+" else -1)
    if off == 0 or abs(off) > MAX_OFFSET:
        raise TemplateSpecError(
            f"line {lineno}: offset {text!r} outside [-{MAX_OFFSET}, +{MAX_OFFSET}]"
        )
    return off


def _parse_functor(name: str, lineno: int) -> tuple[str, tuple[int, ...]]:
    if name in ("form", "formlc", "lemma", "uppercase", "length", "number", "pos", "morph"):
        return name, ()
    m = re.fullmatch(r"(prefix|suffix)([1-5])", name)
    if m:
        return m.group(1), (int(m.group(2)),)
    m = re.fullmatch(r"suffix([1-5])uc", name)
    if m:
        return "suffix_uc", (int(m.group(1)),)
    m = _CHARS_RE.fullmatch(name)
    if m:
        i, j = int(m.group(1)), int(m.group(2))
        if i > j:
            raise TemplateSpecError(f"line {lineno}: chars range {name!r} has i > j")
        return "chars", (i, j)
    raise TemplateSpecError(f"line {lineno}: unknown functor {name!r}")


def _split_conjuncts(text: str) -> list[str]:
    """Split on '+' at parenthesis depth 0; offsets like w+1 stay intact."""
    chunks: list[str] = []
    depth = 0
    start = 0
    for i, ch in enumerate(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        elif ch == "+" and depth == 0:
            chunks.append(text[start:i])
            start = i + 1
    chunks.append(text[start:])
    return chunks


def _parse_line(text: str, lineno: int, template_id: int) -> FeatureTemplate:
    parts: list[Part] = []
    for chunk in _split_conjuncts(text):
        chunk = chunk.strip()
        m = re.fullmatch(r"([a-z0-9_]+)\((.*)\)", chunk)
        if not m:
            raise TemplateSpecError(f"line {lineno}: malformed template part {chunk!r}")
        kind, param = _parse_functor(m.group(1), lineno)
        offsets = m.group(2).split(",")
        if not offsets or offsets == [""]:
            raise TemplateSpecError(f"line {lineno}: empty offset list in {chunk!r}")
        for off_text in offsets:
            parts.append(Part(kind, param, _parse_offset(off_text, lineno)))
    return FeatureTemplate(template_id, text, tuple(parts))


def parse_template_spec(text: str) -> TemplateSet:
    """Parse spec text into a TemplateSet; ids follow template line order."""
    templates: list[FeatureTemplate] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        templates.append(_parse_line(line, lineno, len(templates) + 1))
    return TemplateSet(templates, text)


def load_template_file(path: str | Path) -> TemplateSet:
    with open(path, encoding="utf-8") as fh:
        return parse_template_spec(fh.read())


def builtin_templates() -> TemplateSet:
    """The shipped standard template inventory."""
    text = resources.files("tagsel").joinpath("data/table1.templates").read_text("utf-8")
    return parse_template_spec(text)


class TagContext:
    """Tag assignments visible to the pos/morph functors.

    Entries are strings or None (nothing assigned there yet).  Decoders
    supply their own duck-typed contexts with the same two lookups.
    """

    __slots__ = ("_pos", "_morph")

    def __init__(self, pos: Sequence[str | None], morph: Sequence[str | None]):
        self._pos = list(pos)
        self._morph = list(morph)

    def pos_at(self, i: int) -> str | None:
        return self._pos[i]

    def morph_at(self, i: int) -> str | None:
        return self._morph[i]

    @classmethod
    def empty(cls, n: int) -> "TagContext":
        return cls([None] * n, [None] * n)

    @classmethod
    def from_sentence(cls, sentence: Sentence, attributes: Sequence[str] | None = None) -> "TagContext":
        """Context exposing the sentence's own annotation (gold or pipeline)."""
        pos = [t.pos or None for t in sentence]
        morph = [morph_label(t.morph, attributes) for t in sentence]
        return cls(pos, morph)


def part_value(part: Part, sentence: Sentence, position: int, ctx) -> str:
    """Instantiate one part at an absolute sentence position plus its offset."""
    p = position + part.offset
    n = len(sentence)
    if p < 0:
        return f"<s{p}>"
    if p >= n:
        return f"</s+{p - n + 1}>"
    kind = part.kind
    if kind == "pos":
        v = ctx.pos_at(p)
        return v if v is not None else NONE_VALUE
    if kind == "morph":
        v = ctx.morph_at(p)
        return v if v is not None else NONE_VALUE
    form = sentence.tokens[p].form
    if kind == "form":
        return form
    if kind == "formlc":
        return form.lower()
    if kind == "lemma":
        return sentence.tokens[p].lemma or "_"
    if kind == "prefix":
        return form[: part.param[0]]
    if kind == "suffix":
        return form[-part.param[0]:]
    if kind == "suffix_uc":
        mark = "U" if form[:1].isupper() else "L"
        return f"{form[-part.param[0]:]}/{mark}"
    if kind == "uppercase":
        return "U" if form[:1].isupper() else "L"
    if kind == "chars":
        i, j = part.param
        return form[i - 1 : j] if len(form) >= j else SHORT_VALUE
    if kind == "length":
        return str(len(form))
    if kind == "number":
        return "Y" if _NUM_RE.fullmatch(form) else "N"
    raise ValueError(f"unhandled functor kind {kind!r}")


def template_value(template: FeatureTemplate, sentence: Sentence, position: int, ctx) -> str:
    """The template's instantiated value string at a position."""
    if len(template.parts) == 1:
        return part_value(template.parts[0], sentence, position, ctx)
    return PART_SEP.join(part_value(p, sentence, position, ctx) for p in template.parts)


def feature_key(template_id: int, value: str) -> int:
    """Deterministic 64-bit key for (template id, value); collisions accepted."""
    digest = blake2b(
        value.encode("utf-8"), digest_size=8, key=template_id.to_bytes(8, "little")
    ).digest()
    return int.from_bytes(digest, "little")


def extract(
    templates: TemplateSet,
    active_ids: Sequence[int],
    sentence: Sentence,
    position: int,
    ctx,
) -> list[int]:
    """Feature keys of the active templates at one position.

    Inactive templates incur no value computation.  One key per active
    template, in ascending template-id order.
    """
    keys = []
    for tid in sorted(active_ids):
        t = templates[tid]
        keys.append(feature_key(tid, template_value(t, sentence, position, ctx)))
    return keys


class Extractor:
    """Compiled extractor with per-sentence caching of static values.

    Static templates (no pos/morph part) hash once per sentence position;
    dynamic templates cache their static part values and re-resolve only
    the tag lookups per call.
    """

    def __init__(self, templates: TemplateSet, active_ids: Sequence[int]):
        self.templates = templates
        self.active_ids = sorted(active_ids)
        self._static: list[FeatureTemplate] = []
        self._dynamic: list[FeatureTemplate] = []
        for tid in self.active_ids:
            t = templates[tid]
            (self._static if t.is_static else self._dynamic).append(t)
        self._seeds = {t.id: t.id.to_bytes(8, "little") for t in self._static + self._dynamic}

    def _key(self, template_id: int, value: str) -> int:
        digest = blake2b(
            value.encode("utf-8"), digest_size=8, key=self._seeds[template_id]
        ).digest()
        return int.from_bytes(digest, "little")

    def prepare(self, sentence: Sentence) -> "SentenceFeatures":
        n = len(sentence)
        gold_free = TagContext.empty(n)  # static parts never consult it
        static_keys: list[list[int]] = []
        dyn_values: list[list[list[str | None]]] = []
        for pos in range(n):
            static_keys.append(
                [self._key(t.id, template_value(t, sentence, pos, gold_free)) for t in self._static]
            )
            per_tpl: list[list[str | None]] = []
            for t in self._dynamic:
                per_tpl.append(
                    [
                        None if p.kind in ("pos", "morph") else part_value(p, sentence, pos, gold_free)
                        for p in t.parts
                    ]
                )
            dyn_values.append(per_tpl)
        return SentenceFeatures(self, sentence, static_keys, dyn_values)


class SentenceFeatures:
    """Cached per-sentence feature state produced by Extractor.prepare."""

    __slots__ = ("extractor", "sentence", "static_keys", "dyn_values", "_kcache")

    def __init__(self, extractor, sentence, static_keys, dyn_values):
        self.extractor = extractor
        self.sentence = sentence
        self.static_keys = static_keys
        self.dyn_values = dyn_values
        self._kcache: dict[tuple[int, str], int] = {}

    def keys(self, position: int, ctx) -> list[int]:
        ex = self.extractor
        out = list(self.static_keys[position])
        if ex._dynamic:
            sent = self.sentence
            kcache = self._kcache
            for t, cached in zip(ex._dynamic, self.dyn_values[position]):
                if len(t.parts) == 1:
                    value = part_value(t.parts[0], sent, position, ctx)
                else:
                    value = PART_SEP.join(
                        c if c is not None else part_value(p, sent, position, ctx)
                        for p, c in zip(t.parts, cached)
                    )
                cell = (t.id, value)
                key = kcache.get(cell)
                if key is None:
                    key = ex._key(t.id, value)
                    kcache[cell] = key
                out.append(key)
        return out
