import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from syntf.embeddings import load_embeddings
from syntf.evaluation import LabeledCorpus, Resources
from syntf.fixture import bundled_path
from syntf.rating import RatingMatrix
from syntf.vocab import VocabOptions, load_lemmas, load_synonyms


def random_symmetric_ratings(rng, K):
    """Symmetric matrix with entries drawn beyond [0, 1] and then clamped."""
    a = rng.uniform(-0.4, 1.3, size=(K, K))
    a = np.triu(a) + np.triu(a, 1).T
    return RatingMatrix(np.clip(a, 0.0, 1.0))


@pytest.fixture(scope="session")
def fixture_paths():
    return {name: bundled_path(f"{name}.{ext}") for name, ext in
            (("corpus", "jsonl"), ("embeddings", "txt"), ("lemmas", "tsv"), ("synonyms", "tsv"))}


@pytest.fixture(scope="session")
def fixture_corpus(fixture_paths):
    return LabeledCorpus.load(fixture_paths["corpus"])


@pytest.fixture(scope="session")
def fixture_embeddings(fixture_paths):
    return load_embeddings(fixture_paths["embeddings"])


@pytest.fixture(scope="session")
def fixture_options(fixture_paths):
    return VocabOptions(lemmas=load_lemmas(fixture_paths["lemmas"]),
                        synonyms=load_synonyms(fixture_paths["synonyms"]))


@pytest.fixture(scope="session")
def fixture_resources(fixture_corpus, fixture_embeddings, fixture_options):
    return Resources([d.text for d in fixture_corpus.documents], fixture_embeddings, fixture_options)


# ---- acceptance summary: one line per criterion ----

_criteria = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    number = title = None
    for mark in getattr(report, "user_properties", []):
        if mark[0] == "criterion":
            number, title = mark[1]
    if number is None:
        return
    ok = _criteria.get(number, (title, True))[1] and report.passed
    _criteria[number] = (title, ok)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_setup(item):
    mark = item.get_closest_marker("criterion")
    if mark is not None:
        item.user_properties.append(("criterion", tuple(mark.args)))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria, key=int):
        title, ok = _criteria[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  criterion {number}: {title}")
