"""Exponential mechanism over the rating matrix and SynTF vector synthesis."""

from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .rating import RatingMatrix
from .vectorize import CompositionVector, SparseVector

log = logging.getLogger(__name__)

DEFAULT_OUTPUT_LENGTH = 150


@dataclass(frozen=True)
class PrivacyParams:
    epsilon: float
    n: int = DEFAULT_OUTPUT_LENGTH
    delta: float = 1.0

    def __post_init__(self):
        if not self.epsilon > 0 or not math.isfinite(self.epsilon):
            raise ValueError(f"epsilon must be a finite positive number, got {self.epsilon}")
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"output length n must be an integer >= 1, got {self.n}")
        if self.delta != 1.0:
            raise ValueError("rating sensitivity delta is fixed at 1")


def build_alias(p: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vose's alias table for a single probability vector.

    Returns ``(prob, alias)``; a draw picks a uniform column ``i`` and keeps it
    with probability ``prob[i]``, otherwise returns ``alias[i]``.
    """
    p = np.asarray(p, dtype=float)
    k = len(p)
    total = p.sum()
    if not total > 0 or np.any(p < 0) or not np.isfinite(total):
        raise ValueError("alias table needs non-negative weights with a positive finite sum")
    scaled = (p / total) * k
    prob = np.ones(k)
    alias = np.arange(k)
    small = [i for i in range(k) if scaled[i] < 1.0]
    large = [i for i in range(k) if scaled[i] >= 1.0]
    scaled = scaled.tolist()
    while small and large:
        lo = small.pop()
        hi = large.pop()
        prob[lo] = scaled[lo]
        alias[lo] = hi
        scaled[hi] = (scaled[hi] + scaled[lo]) - 1.0
        if scaled[hi] < 1.0:
            small.append(hi)
        else:
            large.append(hi)
    # leftovers are 1 up to rounding
    return prob, alias


def _alias_draw(prob, alias, size, rng) -> np.ndarray:
    cols = rng.integers(0, len(prob), size=size)
    keep = rng.random(size) < prob[cols]
    return np.where(keep, cols, alias[cols])


class AliasSampler:
    """Constant-time sampler for one categorical distribution."""

    def __init__(self, p):
        self.prob, self.alias = build_alias(p)

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return int(_alias_draw(self.prob, self.alias, 1, rng)[0])
        return _alias_draw(self.prob, self.alias, size, rng)


def sample_term(row, rng: np.random.Generator) -> int:
    return AliasSampler(row).sample(rng)


@dataclass
class MechanismTables:
    """Per-input output distributions of the exponential mechanism.

    ``log_pi`` is exact in log space; ``pi`` is its exponential and may
    underflow to 0 for extreme epsilon, in which case sampling still follows
    the representable distribution.
    """

    epsilon: float
    log_pi: np.ndarray
    pi: np.ndarray
    alias_prob: np.ndarray = field(repr=False)
    alias_idx: np.ndarray = field(repr=False)

    @property
    def dim(self) -> int:
        return self.pi.shape[0]

    def substitute(self, inputs: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """One exponential-mechanism draw per entry of ``inputs``."""
        inputs = np.asarray(inputs)
        cols = rng.integers(0, self.dim, size=inputs.shape)
        keep = rng.random(inputs.shape) < self.alias_prob[inputs, cols]
        return np.where(keep, cols, self.alias_idx[inputs, cols])


def log_softmax_rows(logits: np.ndarray) -> np.ndarray:
    m = logits.max(axis=1, keepdims=True)
    shifted = logits - m
    lse = np.log(np.sum(np.exp(shifted), axis=1, keepdims=True))
    return shifted - lse


def build_tables(ratings: RatingMatrix, params: PrivacyParams) -> MechanismTables:
    logits = params.epsilon * ratings.values / (2.0 * params.delta)
    log_pi = log_softmax_rows(logits)
    if not np.all(np.isfinite(log_pi)):
        raise FloatingPointError("non-finite exponential-mechanism normalizer")
    pi = np.exp(log_pi)
    pi /= pi.sum(axis=1, keepdims=True)
    if not np.all(pi > 0):
        log.warning("epsilon=%g underflows some output probabilities to 0 in float64", params.epsilon)
    K = pi.shape[0]
    alias_prob = np.empty((K, K))
    alias_idx = np.empty((K, K), dtype=np.intp)
    for v in range(K):
        alias_prob[v], alias_idx[v] = build_alias(pi[v])
    return MechanismTables(params.epsilon, log_pi, pi, alias_prob, alias_idx)


@dataclass
class SyntheticTfVector:
    dim: int
    counts: dict
    n: int

    def __post_init__(self):
        if sum(self.counts.values()) != self.n:
            raise ValueError("synthetic counts must sum to n")

    def as_sparse(self) -> SparseVector:
        return SparseVector(self.dim, dict(self.counts))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dim, dtype=np.int64)
        for i, c in self.counts.items():
            out[i] = c
        return out


def document_rng(master_seed: int, doc_id: str) -> np.random.Generator:
    """Independent stream per (master seed, document id); order of processing is irrelevant."""
    digest = hashlib.blake2b(str(doc_id).encode("utf-8"), digest_size=16).digest()
    return np.random.default_rng(np.random.SeedSequence([int(master_seed), int.from_bytes(digest, "little")]))


def synthesize(c: CompositionVector, tables: MechanismTables, params: PrivacyParams,
               rng: np.random.Generator) -> SyntheticTfVector:
    if c.dim != tables.dim:
        raise ValueError(f"composition dim {c.dim} != table dim {tables.dim}")
    support = np.array(sorted(c.entries), dtype=np.intp)
    if support.size == 0:
        raise ValueError("composition vector is empty")
    weights = np.array([c.entries[i] for i in support])
    prob, alias = build_alias(weights)
    drawn = support[_alias_draw(prob, alias, params.n, rng)]
    outputs = tables.substitute(drawn, rng)
    idx, cnt = np.unique(outputs, return_counts=True)
    return SyntheticTfVector(tables.dim, {int(i): int(k) for i, k in zip(idx, cnt)}, params.n)


def synthesize_corpus(items: Sequence[tuple[str, CompositionVector]], tables: MechanismTables,
                      params: PrivacyParams, master_seed: int, threads: int = 1) -> list[SyntheticTfVector]:
    """Synthesize every ``(doc_id, composition)``; results follow input order."""

    def one(item):
        doc_id, comp = item
        return synthesize(comp, tables, params, document_rng(master_seed, doc_id))

    if threads <= 1:
        return [one(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(one, items))


def output_distribution(c: CompositionVector, tables: MechanismTables) -> np.ndarray:
    """Exact distribution of one sample-then-substitute step: sum_v c_v pi[v]."""
    if c.dim != tables.dim:
        raise ValueError(f"composition dim {c.dim} != table dim {tables.dim}")
    p = np.zeros(tables.dim)
    for v in sorted(c.entries):
        p += c.entries[v] * tables.pi[v]
    return p


def multinomial_log_pmf(s: SyntheticTfVector, p: np.ndarray) -> float:
    out = math.lgamma(s.n + 1)
    for w, k in s.counts.items():
        if p[w] <= 0:
            return -math.inf
        out += k * math.log(p[w]) - math.lgamma(k + 1)
    return out
