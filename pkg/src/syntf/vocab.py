"""Tokenization, morphology normalization and vocabulary construction."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

MORPHOLOGY_MODES = ("lemma", "lower", "orth")

DEFAULT_STOPWORDS = frozenset(
    """
    a about above after again against all am an and any are as at be because
    been before being below between both but by can could did do does doing
    down during each few for from further had has have having he her here hers
    herself him himself his how i if in into is it its itself just me more most
    my myself no nor not now of off on once only or other our ours ourselves
    out over own same she should so some such than that the their theirs them
    themselves then there these they this those through to too under until up
    very was we were what when where which while who whom why will with would
    you your yours yourself yourselves also may might must shall upon us
    """.split()
)

_ALNUM_RUN = re.compile(r"[^\W_]+")
_ALPHA_RUN = re.compile(r"[^\W\d_]+")


class VocabularyTooSmallError(ValueError):
    pass


@dataclass(frozen=True)
class Token:
    surface: str
    normalized: str


@dataclass(frozen=True)
class VocabOptions:
    """Knobs for turning raw text into vocabulary terms.

    ``lemmas`` maps case-folded surface forms to lemmas and is only consulted in
    ``lemma`` mode. ``synonyms`` is only used when ``use_synonyms`` is set.
    """

    morphology: str = "lemma"
    use_synonyms: bool = False
    stopwords: frozenset = DEFAULT_STOPWORDS
    min_token_length: int = 2
    remove_numbers: bool = True
    lemmas: Mapping[str, str] = field(default_factory=dict)
    synonyms: Mapping[str, Sequence[str]] = field(default_factory=dict)

    def __post_init__(self):
        if self.morphology not in MORPHOLOGY_MODES:
            raise ValueError(
                f"morphology must be one of {MORPHOLOGY_MODES}, got {self.morphology!r}"
            )
        if self.min_token_length < 1:
            raise ValueError("min_token_length must be >= 1")
        object.__setattr__(self, "stopwords", frozenset(self.stopwords))

    def normalize(self, surface: str) -> str:
        if self.morphology == "orth":
            return surface
        folded = surface.casefold()
        if self.morphology == "lower":
            return folded
        return self.lemmas.get(folded, folded)

    def describe(self) -> dict:
        """JSON-friendly summary (dictionaries reported by size only)."""
        return {
            "morphology": self.morphology,
            "use_synonyms": self.use_synonyms,
            "stopwords": len(self.stopwords),
            "min_token_length": self.min_token_length,
            "remove_numbers": self.remove_numbers,
            "lemmas": len(self.lemmas),
            "synonyms": len(self.synonyms),
        }


class Vocabulary:
    """Ordered, duplicate-free term list; position is the vector coordinate."""

    def __init__(self, terms: Iterable[str]):
        self.terms = tuple(terms)
        self.index = {t: i for i, t in enumerate(self.terms)}
        if len(self.index) != len(self.terms):
            raise ValueError("vocabulary terms must be unique")

    def __len__(self):
        return len(self.terms)

    def __contains__(self, term):
        return term in self.index

    def __iter__(self):
        return iter(self.terms)

    def __eq__(self, other):
        return isinstance(other, Vocabulary) and self.terms == other.terms

    def __hash__(self):
        return hash(self.terms)

    def __repr__(self):
        head = ", ".join(self.terms[:5])
        more = ", ..." if len(self.terms) > 5 else ""
        return f"Vocabulary(K={len(self)}: {head}{more})"

    def restrict(self, keep: Iterable[str]) -> "Vocabulary":
        keep = set(keep)
        return Vocabulary(t for t in self.terms if t in keep)

    def save(self, path) -> None:
        Path(path).write_text("".join(t + "\n" for t in self.terms), encoding="utf-8")

    @classmethod
    def load(cls, path) -> "Vocabulary":
        lines = Path(path).read_text(encoding="utf-8").splitlines()
        return cls(line for line in lines if line)


def tokenize(text: str, options: VocabOptions = VocabOptions()) -> list[Token]:
    tokens = []
    for chunk in _ALNUM_RUN.findall(text):
        if chunk.isnumeric():
            if not options.remove_numbers:
                tokens.append(Token(chunk, chunk))
            continue
        for surface in _ALPHA_RUN.findall(chunk):
            if len(surface) < options.min_token_length:
                continue
            normalized = options.normalize(surface)
            if normalized.casefold() in options.stopwords:
                continue
            tokens.append(Token(surface, normalized))
    return tokens


def build_vocabulary(corpus: Sequence[str], options: VocabOptions = VocabOptions()) -> Vocabulary:
    if not corpus:
        raise ValueError("corpus is empty")
    terms = set()
    for doc in corpus:
        terms.update(tok.normalized for tok in tokenize(doc, options))
    if options.use_synonyms:
        for term in list(terms):
            terms.update(options.synonyms.get(term, ()))
    if len(terms) < 2:
        raise VocabularyTooSmallError(f"vocabulary too small: K={len(terms)} (need >= 2)")
    return Vocabulary(sorted(terms))


def extend_with_synonyms(vocab: Vocabulary, table: Mapping[str, Sequence[str]]) -> Vocabulary:
    terms = set(vocab.terms)
    for term in vocab.terms:
        terms.update(table.get(term, ()))
    return Vocabulary(sorted(terms))


# ---- file formats ----

def load_lemmas(path) -> dict[str, str]:
    """Read ``surface<TAB>lemma`` lines; surfaces are case-folded on load."""
    lemmas = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0] or not parts[1]:
            raise ValueError(f"{path}:{lineno}: expected 'surface<TAB>lemma'")
        lemmas.setdefault(parts[0].casefold(), parts[1].strip())
    return lemmas


def load_synonyms(path) -> dict[str, list[str]]:
    table = {}
    for lineno, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2 or not parts[0]:
            raise ValueError(f"{path}:{lineno}: expected 'term<TAB>syn,syn,...'")
        syns = [s.strip() for s in parts[1].split(",") if s.strip()]
        table.setdefault(parts[0], []).extend(syns)
    return table


def load_stopwords(path) -> frozenset:
    words = Path(path).read_text(encoding="utf-8").split()
    return frozenset(w.casefold() for w in words)


def read_corpus(path) -> list[dict]:
    """Read a JSON Lines corpus; each record needs at least ``id`` and ``text``."""
    docs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if "id" not in rec or "text" not in rec:
                raise ValueError(f"{path}:{lineno}: corpus record needs 'id' and 'text'")
            rec["id"] = str(rec["id"])
            docs.append(rec)
    return docs
