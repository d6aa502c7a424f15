"""Tokenization, vocabulary fitting, and TF-IDF encoding into sparse vectors."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass, field

from botdetect.corpus import Corpus
from botdetect.errors import EmptyVocabulary

# runs of Unicode letters/digits (\w minus underscore), lowercased
_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase unigram tokens: maximal runs of Unicode letters/digits."""
    return _TOKEN_RE.findall(text.lower())


@dataclass(frozen=True)
class Vocabulary:
    terms: dict[str, int]                # term -> dense index, lexicographic
    document_frequency: dict[str, int]   # documents containing the term
    n_documents: int

    def __len__(self) -> int:
        return len(self.terms)


@dataclass(frozen=True)
class TfIdfModel:
    vocabulary: Vocabulary
    idf: tuple[float, ...]  # indexed by feature index
    norm: str = "l2"        # "l2" or "none"
    use_idf: bool = True    # False: plain (optionally normalized) term counts


@dataclass(frozen=True)
class SparseVector:
    entries: dict[int, float] = field(default_factory=dict)
    dimension: int = 0

    def dot(self, other: "SparseVector") -> float:
        a, b = self.entries, other.entries
        if len(b) < len(a):
            a, b = b, a
        return sum(v * b[i] for i, v in a.items() if i in b)

    def norm2(self) -> float:
        return math.sqrt(sum(v * v for v in self.entries.values()))


def fit_vocabulary(corpus: Corpus, min_df: int = 1) -> Vocabulary:
    """Collect all terms appearing in at least ``min_df`` documents."""
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    df: Counter[str] = Counter()
    for c in corpus.comments:
        df.update(set(tokenize(c.text)))
    kept = sorted(t for t, n in df.items() if n >= min_df)
    if not kept:
        raise EmptyVocabulary(f"no term appears in >= {min_df} documents")
    return Vocabulary(
        terms={t: i for i, t in enumerate(kept)},
        document_frequency={t: df[t] for t in kept},
        n_documents=len(corpus.comments),
    )


def fit_tfidf(vocabulary: Vocabulary, norm: str = "l2", use_idf: bool = True) -> TfIdfModel:
    """Smoothed idf: ln((1 + N) / (1 + df)) + 1."""
    if norm not in ("l2", "none"):
        raise ValueError(f"unknown norm {norm!r}")
    n = vocabulary.n_documents
    idf = [0.0] * len(vocabulary.terms)
    for term, i in vocabulary.terms.items():
        if use_idf:
            idf[i] = math.log((1 + n) / (1 + vocabulary.document_frequency[term])) + 1.0
        else:
            idf[i] = 1.0
    return TfIdfModel(vocabulary=vocabulary, idf=tuple(idf), norm=norm, use_idf=use_idf)


def transform(model: TfIdfModel, text: str) -> SparseVector:
    """Encode text as tf * idf over in-vocabulary tokens; OOV tokens dropped."""
    terms = model.vocabulary.terms
    counts: Counter[int] = Counter()
    for tok in tokenize(text):
        idx = terms.get(tok)
        if idx is not None:
            counts[idx] += 1
    # sorted index order: float sums independent of input token order
    entries = {i: counts[i] * model.idf[i] for i in sorted(counts)}
    if model.norm == "l2" and entries:
        scale = 1.0 / math.sqrt(sum(v * v for v in entries.values()))
        entries = {i: v * scale for i, v in entries.items()}
    return SparseVector(entries=entries, dimension=len(terms))


def transform_corpus(model: TfIdfModel, corpus: Corpus) -> list[SparseVector]:
    return [transform(model, c.text) for c in corpus.comments]
