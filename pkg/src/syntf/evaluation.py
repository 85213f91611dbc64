"""Utility-vs-attack evaluation: topic classification against author attribution.

Both tasks run tf-idf followed by multinomial naive Bayes on one of three
representations of each document:

original    raw surface tokens (case, stop words and numbers kept)
vectorized  term frequencies under the run's vocabulary options
synthetic   SynTF vectors synthesized from the vectorized documents

Relative performance of a stage is its macro F1 divided by the F1 on the
original representation.
"""

from __future__ import annotations

import csv
import hashlib
import itertools
import logging
import math
from collections import Counter
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .embeddings import EmbeddingTable, drop_missing
from .mechanism import (
    MechanismTables,
    PrivacyParams,
    SyntheticTfVector,
    build_tables,
    document_rng,
    synthesize,
)
from .rating import RatingMatrix, RatingParams, bigrams, build_rating_matrix
from .vectorize import (
    SparseVector,
    apply_idf_matrix,
    fit_idf_matrix,
    stack,
    tfidf_transform,
    to_composition,
    vectorize,
)
from .vocab import VocabOptions, Vocabulary, build_vocabulary, read_corpus, tokenize

log = logging.getLogger(__name__)

STAGES = ("original", "vectorized", "synthetic")
MNB_ALPHA = 0.01
DEFAULT_REPETITIONS = 10


class ScenarioError(ValueError):
    pass


# ---- classifier ----

@dataclass
class MNBModel:
    classes: list
    class_log_prior: np.ndarray
    feature_log_prob: np.ndarray

    def joint_log_likelihood(self, X) -> np.ndarray:
        X = X if sp.issparse(X) else np.atleast_2d(np.asarray(X, dtype=float))
        return np.asarray(X @ self.feature_log_prob.T) + self.class_log_prior


def _as_matrix(vectors):
    if sp.issparse(vectors) or isinstance(vectors, np.ndarray):
        return vectors
    return stack(vectors)


def train_mnb(vectors, labels: Sequence[Hashable], alpha: float = MNB_ALPHA) -> MNBModel:
    X = _as_matrix(vectors)
    labels = list(labels)
    if X.shape[0] != len(labels):
        raise ValueError("one label per training vector is required")
    classes = sorted(set(labels))
    if len(classes) < 2:
        raise ValueError(f"need at least 2 classes, got {classes}")
    y = np.array([classes.index(c) for c in labels])
    K = X.shape[1]
    prior = np.log(np.bincount(y, minlength=len(classes)) / len(y))
    flp = np.empty((len(classes), K))
    for k in range(len(classes)):
        counts = np.asarray(X[y == k].sum(axis=0)).ravel()
        flp[k] = np.log(counts + alpha) - math.log(counts.sum() + alpha * K)
    return MNBModel(classes, prior, flp)


def predict(model: MNBModel, vectors) -> list:
    jll = model.joint_log_likelihood(_as_matrix(vectors))
    # np.argmax picks the first maximum: ties go to the lowest class index
    return [model.classes[i] for i in np.argmax(jll, axis=1)]


def f1_macro(predicted: Sequence, actual: Sequence) -> tuple[float, float, float]:
    """Unweighted mean of per-class F1, precision and recall (0 on empty denominators)."""
    if len(predicted) != len(actual):
        raise ValueError("predicted and actual differ in length")
    labels = sorted(set(actual) | set(predicted))
    f1s, ps, rs = [], [], []
    for c in labels:
        tp = sum(1 for p, a in zip(predicted, actual) if p == c and a == c)
        n_pred = sum(1 for p in predicted if p == c)
        n_act = sum(1 for a in actual if a == c)
        prec = tp / n_pred if n_pred else 0.0
        rec = tp / n_act if n_act else 0.0
        f1 = 2 * prec * rec / (prec + rec) if prec + rec else 0.0
        f1s.append(f1)
        ps.append(prec)
        rs.append(rec)
    return float(np.mean(f1s)), float(np.mean(ps)), float(np.mean(rs))


def reverse_vectorize(s, vocab: Vocabulary) -> str:
    """Pseudo-text: each term repeated by its count, in vocabulary order."""
    counts = s.counts if isinstance(s, SyntheticTfVector) else s.entries
    if (s.dim if hasattr(s, "dim") else len(vocab)) != len(vocab):
        raise ValueError("vector and vocabulary dimensions differ")
    words = []
    for i in sorted(counts):
        words.extend([vocab.terms[i]] * int(counts[i]))
    return " ".join(words)


# ---- corpus and scenarios ----

@dataclass(frozen=True)
class Document:
    id: str
    text: str
    topic: str | None
    author: str | None
    split: str


@dataclass
class LabeledCorpus:
    documents: list

    def __post_init__(self):
        ids = [d.id for d in self.documents]
        if len(set(ids)) != len(ids):
            raise ValueError("document ids must be unique")
        for d in self.documents:
            if d.split not in ("train", "test"):
                raise ValueError(f"{d.id}: split must be 'train' or 'test'")

    @classmethod
    def from_records(cls, records: Iterable[Mapping], train_fraction: float = 0.6) -> "LabeledCorpus":
        docs = []
        for rec in records:
            split = rec.get("split")
            if split is None:
                h = int.from_bytes(hashlib.sha256(str(rec["id"]).encode()).digest()[:8], "big")
                split = "train" if h / 2**64 < train_fraction else "test"
            docs.append(Document(str(rec["id"]), rec["text"], rec.get("label"), rec.get("author"), split))
        return cls(docs)

    @classmethod
    def load(cls, path) -> "LabeledCorpus":
        return cls.from_records(read_corpus(path))

    def labeled(self) -> list:
        return [d for d in self.documents if d.topic is not None and d.author is not None]


@dataclass(frozen=True)
class ScenarioConfig:
    suspects: int
    multi_group: bool = False

    def __post_init__(self):
        if self.suspects < 2:
            raise ValueError("need at least 2 suspects")

    @property
    def name(self) -> str:
        return f"top{self.suspects}/{'multi' if self.multi_group else 'any'}"


def select_suspects(docs: Sequence[Document], scenario: ScenarioConfig) -> list[str]:
    """Top authors by document count (ties by name), after the multi-group filter."""
    counts = Counter(d.author for d in docs)
    groups = {}
    for d in docs:
        groups.setdefault(d.author, set()).add(d.topic)
    candidates = [a for a in counts if not scenario.multi_group or len(groups[a]) >= 2]
    ranked = sorted(candidates, key=lambda a: (-counts[a], a))
    if len(ranked) < scenario.suspects:
        raise ScenarioError(
            f"{scenario.name}: only {len(ranked)} eligible authors for {scenario.suspects} suspects"
        )
    chosen = ranked[:scenario.suspects]
    for a in chosen:
        n_train = sum(1 for d in docs if d.author == a and d.split == "train")
        n_test = sum(1 for d in docs if d.author == a and d.split == "test")
        if n_train < 2 or n_test < 1:
            raise ScenarioError(
                f"{scenario.name}: author {a!r} has {n_train} train / {n_test} test documents "
                "(need >= 2 / >= 1)"
            )
    return chosen


# ---- SynTF resources ----

@dataclass(frozen=True)
class SynParams:
    """One point of the SynTF parameter lattice."""

    morphology: str = "lemma"
    use_synonyms: bool = False
    s: float = 0.3
    n: int = 150
    epsilon: float = 47.5

    def key(self) -> tuple:
        return (self.morphology, self.use_synonyms, self.s, self.n, self.epsilon)


class Resources:
    """Vocabularies, rating matrices and mechanism tables for a corpus, built on demand.

    The vocabulary comes from every document text of the corpus (a reference
    corpus without labels), minus terms lacking embeddings.
    """

    def __init__(self, texts: Sequence[str], embeddings: EmbeddingTable,
                 base_options: VocabOptions = VocabOptions()):
        self.texts = list(texts)
        self.embeddings = embeddings
        self.base_options = base_options
        self._vocab = lru_cache(maxsize=None)(self._build_vocab)
        self._ratings = lru_cache(maxsize=None)(self._build_ratings)
        self._tables = lru_cache(maxsize=8)(self._build_tables)

    def options(self, p: SynParams) -> VocabOptions:
        return replace(self.base_options, morphology=p.morphology, use_synonyms=p.use_synonyms)

    def _build_vocab(self, morphology, use_synonyms):
        opts = replace(self.base_options, morphology=morphology, use_synonyms=use_synonyms)
        vocab, _ = drop_missing(build_vocabulary(self.texts, opts), self.embeddings)
        return vocab

    def _build_ratings(self, morphology, use_synonyms, s):
        return build_rating_matrix(self._vocab(morphology, use_synonyms), self.embeddings, RatingParams(s))

    def _build_tables(self, morphology, use_synonyms, s, epsilon):
        return build_tables(self._ratings(morphology, use_synonyms, s), PrivacyParams(epsilon, 1))

    def vocabulary(self, p: SynParams) -> Vocabulary:
        return self._vocab(p.morphology, p.use_synonyms)

    def ratings(self, p: SynParams) -> RatingMatrix:
        return self._ratings(p.morphology, p.use_synonyms, p.s)

    def tables(self, p: SynParams) -> MechanismTables:
        return self._tables(p.morphology, p.use_synonyms, p.s, p.epsilon)


# ---- stage features ----

RAW_OPTIONS = VocabOptions(morphology="orth", stopwords=frozenset(), min_token_length=1,
                           remove_numbers=False)


def _count_vectors(texts, vocab, options):
    return [vectorize(t, vocab, options) for t in texts]


def _char_bigram_matrix(texts: Sequence[str], index: Mapping[str, int]) -> sp.csr_matrix:
    rows, cols, vals = [], [], []
    for r, text in enumerate(texts):
        g = Counter()
        for tok in text.split():
            g.update(bigrams(tok))
        for b, c in g.items():
            if b in index:
                rows.append(r)
                cols.append(index[b])
                vals.append(float(c))
    return sp.csr_matrix((vals, (rows, cols)), shape=(len(texts), max(len(index), 1)))


@dataclass
class StageData:
    """Per-document vectors of one stage plus the pseudo-text used for char features."""

    vectors: list
    texts: list

    def matrix(self, rows: Sequence[int], char_index: Mapping[str, int] | None = None) -> sp.csr_matrix:
        X = stack([self.vectors[i] for i in rows], self.vectors[0].dim)
        if char_index is not None:
            X = sp.hstack([X, _char_bigram_matrix([self.texts[i] for i in rows], char_index)]).tocsr()
        return X


def stage_data(stage: str, docs: Sequence[Document], resources: Resources, params: SynParams,
               seed: int, composition_from: str = "tf") -> StageData:
    if stage == "original":
        texts = [d.text for d in docs]
        vocab = build_vocabulary(texts, RAW_OPTIONS)
        return StageData(_count_vectors(texts, vocab, RAW_OPTIONS), texts)
    vocab = resources.vocabulary(params)
    tf = _count_vectors([d.text for d in docs], vocab, resources.options(params))
    if stage == "vectorized":
        return StageData(tf, [reverse_vectorize(v, vocab) for v in tf])
    if stage != "synthetic":
        raise ValueError(f"unknown stage {stage!r}")
    empty = [d.id for d, v in zip(docs, tf) if not v.entries]
    if empty:
        raise ScenarioError(f"documents without in-vocabulary terms: {', '.join(empty[:10])}")
    basis = tfidf_transform(tf) if composition_from == "tfidf" else tf
    tables = resources.tables(params)
    pp = PrivacyParams(params.epsilon, params.n)
    synth = [synthesize(to_composition(v), tables, pp, document_rng(seed, d.id)).as_sparse()
             for d, v in zip(docs, basis)]
    return StageData(synth, [reverse_vectorize(v, vocab) for v in synth])


def classify(X_train, y_train, X_test, y_test) -> tuple[float, float, float]:
    """tf-idf (idf fitted on the training rows) + MNB; (F1, P, R) on the test rows."""
    idf = fit_idf_matrix(X_train)
    model = train_mnb(apply_idf_matrix(X_train, idf), y_train)
    return f1_macro(predict(model, apply_idf_matrix(X_test, idf)), list(y_test))


def _task_scores(data: StageData, docs, rows, label_of, char_features: bool,
                 train_data: StageData | None = None):
    train = [i for i in rows if docs[i].split == "train"]
    test = [i for i in rows if docs[i].split == "test"]
    train_data = train_data or data
    char_index = None
    if char_features:
        grams = set()
        for text in [train_data.texts[i] for i in train] + [data.texts[i] for i in test]:
            for tok in text.split():
                grams.update(bigrams(tok))
        char_index = {b: k for k, b in enumerate(sorted(grams))}
    X_train = train_data.matrix(train, char_index)
    X_test = data.matrix(test, char_index)
    if X_train.shape[1] != X_test.shape[1]:
        raise ValueError("training and test representations have different feature spaces")
    return classify(X_train, [label_of(docs[i]) for i in train], X_test, [label_of(docs[i]) for i in test])


def _scores_dict(t):
    return {"f1": t[0], "precision": t[1], "recall": t[2]}


@dataclass
class EvalReport:
    stage: str
    scenario: str
    utility: dict
    attack: dict
    original_utility: dict
    original_attack: dict
    beta_u: float
    beta_a: float
    gap: float
    runs: list = field(default_factory=list)
    params: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def _ratio(a, b):
    return a / b if b > 0 else 0.0


def run_scenario(corpus: LabeledCorpus, scenario: ScenarioConfig, stage: str,
                 resources: Resources, params: SynParams = SynParams(), seed: int = 0,
                 repetitions: int = DEFAULT_REPETITIONS, char_features: bool = False,
                 attack_train_on_original: bool = False, composition_from: str = "tf") -> EvalReport:
    """Utility (topic) and attack (author) scores for one stage, averaged over repetitions.

    Repetition ``r`` of the synthetic stage uses master seed ``seed + r``; the
    other stages are deterministic and run once.
    """
    if stage not in STAGES:
        raise ValueError(f"stage must be one of {STAGES}")
    docs = corpus.labeled()
    if not docs:
        raise ScenarioError("corpus has no documents with both topic and author labels")
    suspects = set(select_suspects(docs, scenario))
    all_rows = list(range(len(docs)))
    attack_rows = [i for i in all_rows if docs[i].author in suspects]
    for name, rows, label_of in (("topic", all_rows, lambda d: d.topic),
                                 ("author", attack_rows, lambda d: d.author)):
        train_labels = {label_of(docs[i]) for i in rows if docs[i].split == "train"}
        all_labels = {label_of(docs[i]) for i in rows}
        if all_labels - train_labels:
            raise ScenarioError(f"{scenario.name}: {name} classes without training documents: "
                                f"{sorted(all_labels - train_labels)}")

    def scores_for(stage_name, rep_seed):
        data = stage_data(stage_name, docs, resources, params, rep_seed, composition_from)
        util = _task_scores(data, docs, all_rows, lambda d: d.topic, char_features)
        train_data = None
        if stage_name == "synthetic" and attack_train_on_original:
            train_data = stage_data("vectorized", docs, resources, params, rep_seed)
        att = _task_scores(data, docs, attack_rows, lambda d: d.author, char_features, train_data)
        return util, att

    orig_u, orig_a = scores_for("original", seed)
    reps = repetitions if stage == "synthetic" else 1
    runs = []
    for r in range(reps):
        u, a = (orig_u, orig_a) if stage == "original" else scores_for(stage, seed + r)
        runs.append({"seed": seed + r, "utility": _scores_dict(u), "attack": _scores_dict(a)})
    mean_u = tuple(float(np.mean([run["utility"][k] for run in runs])) for k in ("f1", "precision", "recall"))
    mean_a = tuple(float(np.mean([run["attack"][k] for run in runs])) for k in ("f1", "precision", "recall"))
    beta_u = _ratio(mean_u[0], orig_u[0])
    beta_a = _ratio(mean_a[0], orig_a[0])
    return EvalReport(stage, scenario.name, _scores_dict(mean_u), _scores_dict(mean_a),
                      _scores_dict(orig_u), _scores_dict(orig_a), beta_u, beta_a, beta_u - beta_a,
                      runs, asdict(params))


# ---- grid search ----

GRID_FIELDS = ("morphology", "use_synonyms", "s", "n", "epsilon")


@dataclass
class GridResult:
    best: SynParams
    best_score: float
    table: list

    def write_csv(self, path) -> None:
        if not self.table:
            return
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.DictWriter(fh, fieldnames=list(self.table[0]))
            writer.writeheader()
            writer.writerows(self.table)


def lattice(grid: Mapping[str, Sequence]) -> list[SynParams]:
    unknown = set(grid) - set(GRID_FIELDS)
    if unknown:
        raise ValueError(f"unknown grid parameters: {sorted(unknown)}")
    default = SynParams()
    axes = [list(grid.get(f, [getattr(default, f)])) for f in GRID_FIELDS]
    if any(not a for a in axes):
        raise ValueError("grid axes must be non-empty")
    return [SynParams(*combo) for combo in itertools.product(*axes)]


def grid_search(corpus: LabeledCorpus, scenarios: Sequence[ScenarioConfig],
                grid: Mapping[str, Sequence], resources: Resources, seed: int = 0,
                repetitions: int = DEFAULT_REPETITIONS, evaluate=None) -> GridResult:
    """Maximize the minimum (beta_U - beta_A) over scenarios on the synthetic stage.

    Ties go to the larger epsilon, then to the earlier lattice point.
    ``evaluate(params, scenario) -> EvalReport`` overrides ``run_scenario``.
    """
    points = lattice(grid)
    if evaluate is None:
        def evaluate(p, sc):
            return run_scenario(corpus, sc, "synthetic", resources, p, seed, repetitions)
    table = []
    best, best_key = None, None
    for order, p in enumerate(points):
        row = asdict(p)
        gaps = []
        for sc in scenarios:
            rep = evaluate(p, sc)
            row[f"{sc.name}:beta_u"] = rep.beta_u
            row[f"{sc.name}:beta_a"] = rep.beta_a
            row[f"{sc.name}:gap"] = rep.gap
            gaps.append(rep.gap)
        row["min_gap"] = min(gaps)
        table.append(row)
        key = (row["min_gap"], p.epsilon, -order)
        if best_key is None or key > best_key:
            best, best_key = p, key
    return GridResult(best, best_key[0], table)
