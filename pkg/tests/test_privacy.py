import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_symmetric_ratings
from oracles import brute_force_loss, eta_mp
from syntf.mechanism import PrivacyParams, build_tables, output_distribution
from syntf.privacy import (
    PrivacyReport,
    bound_curves,
    epsilon_conditions,
    eta,
    improved_loss,
    log_eta,
    privacy_report,
    standard_loss,
    tight_loss,
    utility_bounds,
)
from syntf.rating import RatingMatrix
from syntf.vectorize import SparseVector

# mpmath at 50 digits
LN_ETA_47_5_30000 = -13.441082127405688
IMPROVED_47_5_30000 = 34.058917872594312


@pytest.mark.parametrize("eps,n,expected", [(47.5, 150, 7125), (1, 1, 1), (2, 3, 6)])
def test_standard_loss(eps, n, expected):
    assert standard_loss(PrivacyParams(eps, n)) == expected


def test_eta_at_zero_is_one():
    for L in (2, 10, 30000):
        assert eta(0.0, L) == 1.0


@given(st.floats(0, 200))
def test_eta_l2_closed_form(e):
    assert log_eta(e, 2) == pytest.approx(-e / 2, abs=1e-12)


def test_eta_large_vocabulary_value():
    assert log_eta(47.5, 30000) == pytest.approx(LN_ETA_47_5_30000, abs=1e-12)
    assert improved_loss(PrivacyParams(47.5, 1), 30000) == pytest.approx(IMPROVED_47_5_30000, abs=1e-12)


@settings(max_examples=60)
@given(st.floats(0, 300), st.integers(2, 10**6))
def test_log_eta_matches_mpmath(e, L):
    import mpmath
    assert log_eta(e, L) == pytest.approx(float(mpmath.log(eta_mp(e, L))), abs=1e-12)


@given(st.floats(0.01, 100), st.integers(2, 10**5))
def test_eta_monotone(e, L):
    assert log_eta(e * 1.5, L) <= log_eta(e, L)
    assert log_eta(e, L + 10) >= log_eta(e, L)
    assert 0 < eta(e, L) <= 1


def test_improved_loss_examples():
    assert improved_loss(PrivacyParams(2.0, 1), 2) == pytest.approx(1.0, abs=1e-12)
    assert improved_loss(PrivacyParams(0.001, 1), 30000) == pytest.approx(0.001, rel=1e-4)


def test_tight_loss_identity_k2():
    t = build_tables(RatingMatrix(np.eye(2)), PrivacyParams(2.0))
    loss, witness = tight_loss(t)
    assert loss == pytest.approx(1.0, abs=1e-12)
    assert witness == (0, 1, 0)


def test_tight_loss_uniform_is_zero():
    t = build_tables(RatingMatrix(np.full((3, 3), 0.4)), PrivacyParams(9.0))
    assert tight_loss(t)[0] == pytest.approx(0.0, abs=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(2, 7), st.floats(0.1, 40))
def test_tight_loss_matches_brute_force(seed, K, eps):
    t = build_tables(random_symmetric_ratings(np.random.default_rng(seed), K), PrivacyParams(eps))
    loss, (v1, v2, w) = tight_loss(t)
    assert loss == pytest.approx(brute_force_loss(t.pi.tolist()), abs=1e-9)
    assert math.log(t.pi[v1, w] / t.pi[v2, w]) == pytest.approx(loss, abs=1e-9)
    assert loss <= eps + log_eta(eps, K) + 1e-9


def test_privacy_report_roundtrip_and_ordering():
    rng = np.random.default_rng(11)
    R = random_symmetric_ratings(rng, 5)
    p = PrivacyParams(12.0, n=20)
    rep = privacy_report(build_tables(R, p), p, terms=list("abcde"))
    assert rep.check_ordering()
    assert rep.standard_loss == 240
    assert rep.tight_loss_total == pytest.approx(rep.tight_loss_per_word * 20)
    assert rep.witness["v1_term"] == "abcde"[rep.witness["v1"]]
    assert PrivacyReport.from_dict(rep.to_dict()) == rep


def test_utility_bounds_examples():
    assert utility_bounds([0.5, 0.5, 0.5], 0.5, 3.0) == (1.0, 1.0, 3)
    lower, upper, size = utility_bounds([1.0, 0.2, 0.2, 0.2], 1.0, 2.0)
    assert size == 1
    assert lower == pytest.approx(0.42589675575166164, abs=1e-12)
    assert upper == pytest.approx(0.42589675575166164, abs=1e-12)
    with pytest.raises(ValueError):
        utility_bounds([0.1, 0.2], 0.9, 1.0)


def test_utility_bounds_sandwich_exact_probability():
    R = RatingMatrix(np.array([[1.0, 0.2, 0.2, 0.2], [0.2, 1, 0, 0], [0.2, 0, 1, 0], [0.2, 0, 0, 1]]))
    t = build_tables(R, PrivacyParams(2.0))
    exact = output_distribution(SparseVector(4, {0: 1.0}), t)[0]
    assert exact == pytest.approx(1 / (1 + 3 * math.exp(-0.8)), abs=1e-12)


def test_epsilon_conditions_examples():
    nec, _ = epsilon_conditions(0.5, 3, 10, 1.0, 1.0, 0.5)
    assert nec == pytest.approx(2 * math.log(7 / 3), abs=1e-12)
    assert epsilon_conditions(0.5, 5, 10, 1.0, 0.7, 0.2) == (0.0, 0.0)
    prev = None
    for Z in (2**10, 2**11, 2**12, 2**13, 2**14):
        nec, _ = epsilon_conditions(0.5, 1, Z, 1.0, 1.0, 1.0)
        if prev is not None:
            assert nec - prev == pytest.approx(2 * math.log(2), abs=0.005)
        prev = nec
    with pytest.raises(ValueError):
        epsilon_conditions(1.0, 1, 2, 1, 1, 1)


def test_sufficient_at_least_necessary():
    nec, suf = epsilon_conditions(0.9, 2, 50, 1.0, 0.8, 0.3)
    assert suf >= nec > 0


def test_bound_curves_rows():
    rows = bound_curves([0.0, 10.0], [2, 100])
    assert len(rows) == 4
    assert rows[0] == {"epsilon": 0.0, "L": 2, "standard": 0.0, "improved": 0.0}
    assert rows[1]["improved"] == pytest.approx(5.0)
