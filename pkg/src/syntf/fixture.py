"""Generator for the bundled toy corpus (4 topics x 6 authors) and its resources.

Words are pseudo-words. Every concept has two spelling variants that differ
only in a suffix (``-our``/``-or`` and the like) and two differently spelled
synonyms. Each author prefers one spelling variant per concept and has its
own stop-word, capitalization and plural habits, so authorship leaks through
spelling and style while the topic is carried by the concepts.

Embeddings are sums of near-orthogonal random directions: a topic direction,
a concept direction, a shared spelling direction for the two variants and a
word-specific direction.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .vocab import DEFAULT_STOPWORDS

TOPICS = ("astronomy", "cuisine", "football", "jazz")
AUTHORS = ("alice", "bruno", "chen", "dagny", "emeka", "fatima")
# author -> topics they write about; the last two are single-topic authors
AUTHOR_TOPICS = {
    "alice": (0, 1),
    "bruno": (1, 2),
    "chen": (2, 3),
    "dagny": (3, 0),
    "emeka": (0,),
    "fatima": (2,),
}
DOCS_PER_GROUP = {2: 15, 1: 34}
CONCEPTS_PER_TOPIC = 10
N_GENERAL = 30
DIM = 64
SUFFIX_PAIRS = [("our", "or"), ("ise", "ize"), ("tre", "ter"), ("lle", "le"),
                ("ogue", "og"), ("yse", "yze"), ("ence", "ense"), ("ae", "e")]
STYLE_STOPWORDS = sorted(DEFAULT_STOPWORDS)[:40]

_ONSETS = "b c d f g h k l m n p r s t v z br dr gr kl pl st tr".split()
_VOWELS = "a e i o u".split()


def _pseudo_words(rng, count, taken):
    out = []
    while len(out) < count:
        n_syl = rng.integers(2, 4)
        w = "".join(rng.choice(_ONSETS) + rng.choice(_VOWELS) for _ in range(n_syl))
        w = w + rng.choice(["n", "m", "l", "r", "t", ""])
        if w in taken or w in DEFAULT_STOPWORDS or w.endswith("s"):
            continue
        taken.add(w)
        out.append(w)
    return out


def _unit(rng, d):
    v = rng.normal(size=d)
    return v / np.linalg.norm(v)


def generate(seed: int = 2018):
    """Return ``(corpus_records, embeddings, lemmas, synonyms)``."""
    rng = np.random.default_rng(seed)
    taken = set()

    topic_dir = [_unit(rng, DIM) for _ in TOPICS]
    concepts = []  # (topic, [variant_a, variant_b], [syn1, syn2], rare_syn)
    emb = {}
    for t in range(len(TOPICS)):
        stems = _pseudo_words(rng, CONCEPTS_PER_TOPIC, taken)
        for j, stem in enumerate(stems):
            a_suf, b_suf = SUFFIX_PAIRS[(t * CONCEPTS_PER_TOPIC + j) % len(SUFFIX_PAIRS)]
            variants = [stem + a_suf, stem + b_suf]
            syns = _pseudo_words(rng, 3, taken)
            taken.update(variants)
            concept_dir = _unit(rng, DIM)
            spell_dir = _unit(rng, DIM)
            for v in variants:
                emb[v] = 0.55 * topic_dir[t] + 0.7 * concept_dir + 0.3 * spell_dir + 0.25 * _unit(rng, DIM)
            for s in syns:
                emb[s] = 0.55 * topic_dir[t] + 0.7 * concept_dir + 0.4 * _unit(rng, DIM)
            concepts.append((t, variants, syns[:2], syns[2]))
    general = _pseudo_words(rng, N_GENERAL, taken)
    for g in general:
        emb[g] = _unit(rng, DIM)

    lemmas = {}
    for word in list(emb):
        plural = word + "s"
        lemmas[plural] = word
        emb[plural] = emb[word] + 0.1 * _unit(rng, DIM)

    synonyms = {}
    for _, variants, syns, rare in concepts:
        group = variants + syns + [rare]
        for w in variants + syns:
            synonyms[w] = [g for g in group if g != w]

    by_topic = {t: [c for c in concepts if c[0] == t] for t in range(len(TOPICS))}
    records = []
    for a_idx, author in enumerate(AUTHORS):
        arng = np.random.default_rng([seed, a_idx])
        preferred = {c[1][0]: int(arng.integers(2)) for c in concepts}
        stop_p = arng.dirichlet(np.full(len(STYLE_STOPWORDS), 0.3))
        cap_rate = float(arng.choice([0.0, 0.05, 0.3]))
        plural_rate = float(arng.choice([0.05, 0.25, 0.5]))
        number_rate = float(arng.choice([0.0, 0.0, 0.05]))
        topics = AUTHOR_TOPICS[author]
        per_group = DOCS_PER_GROUP[len(topics)]
        for t in topics:
            n_train = round(0.6 * per_group)
            for k in range(per_group):
                words = []
                for _ in range(int(arng.integers(35, 50))):
                    u = arng.random()
                    if u < 0.3:
                        words.append(str(arng.choice(STYLE_STOPWORDS, p=stop_p)))
                        continue
                    if u < 0.4:
                        w = str(arng.choice(general))
                    else:
                        _, variants, syns, _ = by_topic[t][int(arng.integers(CONCEPTS_PER_TOPIC))]
                        if arng.random() < 0.7:
                            pick = preferred[variants[0]]
                            if arng.random() > 0.85:
                                pick = 1 - pick
                            w = variants[pick]
                        else:
                            w = syns[int(arng.integers(2))]
                    if arng.random() < plural_rate:
                        w += "s"
                    if arng.random() < cap_rate:
                        w = w.capitalize()
                    words.append(w)
                    if arng.random() < number_rate:
                        words.append(str(int(arng.integers(1, 100))))
                sentences = []
                for i in range(0, len(words), 9):
                    chunk = words[i:i + 9]
                    chunk[0] = chunk[0].capitalize()
                    sentences.append(" ".join(chunk) + ".")
                records.append({
                    "id": f"{author}-{TOPICS[t]}-{k:02d}",
                    "text": " ".join(sentences),
                    "label": TOPICS[t],
                    "author": author,
                    "split": "train" if k < n_train else "test",
                })
    return records, emb, lemmas, synonyms


def write_fixture(directory, seed: int = 2018) -> dict:
    """Write corpus.jsonl, embeddings.txt, lemmas.tsv and synonyms.tsv; returns their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    records, emb, lemmas, synonyms = generate(seed)
    paths = {name: directory / name for name in
             ("corpus.jsonl", "embeddings.txt", "lemmas.tsv", "synonyms.tsv")}
    with open(paths["corpus.jsonl"], "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec) + "\n")
    with open(paths["embeddings.txt"], "w", encoding="utf-8") as fh:
        for word in sorted(emb):
            fh.write(word + " " + " ".join(f"{x:.6f}" for x in emb[word]) + "\n")
    with open(paths["lemmas.tsv"], "w", encoding="utf-8") as fh:
        for surface in sorted(lemmas):
            fh.write(f"{surface}\t{lemmas[surface]}\n")
    with open(paths["synonyms.tsv"], "w", encoding="utf-8") as fh:
        for term in sorted(synonyms):
            fh.write(f"{term}\t{','.join(synonyms[term])}\n")
    return {k.split(".")[0]: p for k, p in paths.items()}


def bundled_path(name: str) -> Path:
    """Path of a bundled fixture file (corpus.jsonl, embeddings.txt, lemmas.tsv, synonyms.tsv)."""
    return Path(__file__).parent / "data" / "fixture" / name
