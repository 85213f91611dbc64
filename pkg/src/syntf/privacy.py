"""Privacy accounting for the SynTF mechanism.

Three per-output-word loss bounds are available, from loosest to exact:

* standard: epsilon (exponential mechanism with sensitivity 1);
* improved: epsilon + ln eta(epsilon, K), valid because symmetric ratings
  with all documents adjacent make the per-input rating spread equal the
  sensitivity;
* tight: max_w ln(max_v pi[v, w] / min_v pi[v, w]), read off the tables.

Totals multiply the per-word figure by the output length n (sequential
composition over the n draws).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.special import expit

from .mechanism import MechanismTables, PrivacyParams


def log_eta(epsilon_bar: float, L: int) -> float:
    if epsilon_bar < 0:
        raise ValueError("epsilon_bar must be >= 0")
    if L < 2:
        raise ValueError("output space size L must be >= 2")
    log_rest = math.log(L - 1)
    return float(np.logaddexp(-epsilon_bar / 2, log_rest) - np.logaddexp(epsilon_bar / 2, log_rest))


def eta(epsilon_bar: float, L: int) -> float:
    """(e^{-e/2} + L - 1) / (e^{e/2} + L - 1), evaluated in log space."""
    return math.exp(log_eta(epsilon_bar, L))


def standard_loss(params: PrivacyParams) -> float:
    return params.epsilon * params.n


def improved_loss_per_word(epsilon: float, K: int) -> float:
    return epsilon + log_eta(epsilon, K)


def improved_loss(params: PrivacyParams, K: int) -> float:
    return improved_loss_per_word(params.epsilon, K) * params.n


def tight_loss(tables: MechanismTables, tie_tol: float = 1e-12) -> tuple[float, tuple[int, int, int]]:
    """Exact per-word loss and the lowest-index maximizing ``(v1, v2, w)``.

    Two single-word documents ``v1`` and ``v2`` realize the ratio
    ``pi[v1, w] / pi[v2, w] = exp(loss)`` on output ``w``.
    """
    lp = tables.log_pi
    spread = lp.max(axis=0) - lp.min(axis=0)
    best = float(spread.max())
    candidates = []
    for w in np.flatnonzero(spread >= best - tie_tol):
        col = lp[:, w]
        candidates.append((int(np.argmax(col)), int(np.argmin(col)), int(w)))
    v1, v2, w = min(candidates)
    return float(lp[v1, w] - lp[v2, w]), (v1, v2, w)


@dataclass
class PrivacyReport:
    epsilon: float
    n: int
    K: int
    standard_loss: float
    eta: float
    improved_loss: float
    tight_loss_per_word: float
    tight_loss_total: float
    witness: dict
    standard_loss_per_word: float = 0.0
    improved_loss_per_word: float = 0.0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PrivacyReport":
        return cls(**d)

    def check_ordering(self, tol: float = 1e-9) -> bool:
        return (self.tight_loss_total <= self.improved_loss + tol
                and self.improved_loss <= self.standard_loss + tol)


def privacy_report(tables: MechanismTables, params: PrivacyParams,
                   terms: Sequence[str] | None = None) -> PrivacyReport:
    K = tables.dim
    tight, (v1, v2, w) = tight_loss(tables)
    witness = {"v1": v1, "v2": v2, "w": w}
    if terms is not None:
        witness.update(v1_term=terms[v1], v2_term=terms[v2], w_term=terms[w])
    improved_word = improved_loss_per_word(params.epsilon, K)
    return PrivacyReport(
        epsilon=params.epsilon,
        n=params.n,
        K=K,
        standard_loss=standard_loss(params),
        eta=eta(params.epsilon, K),
        improved_loss=improved_word * params.n,
        tight_loss_per_word=tight,
        tight_loss_total=tight * params.n,
        witness=witness,
        standard_loss_per_word=params.epsilon,
        improved_loss_per_word=improved_word,
    )


# ---- utility side ----

def utility_bounds(ratings_for_x, tau: float, epsilon: float,
                   delta: float = 1.0) -> tuple[float, float, int]:
    """Bounds on Pr[Em(x) in T] for T = {w : rating(x, w) >= tau}.

    Returns ``(lower, upper, |T|)``. ``lower`` uses the gap ``c`` between
    ``tau`` and the best rating outside T; ``upper`` uses the full rating
    spread of x.
    """
    r = np.asarray(ratings_for_x, dtype=float)
    in_t = r >= tau
    t_size = int(in_t.sum())
    if t_size == 0:
        raise ValueError(f"tau={tau} exceeds the maximum rating {r.max()}: T is empty")
    rest = r.size - t_size
    if rest == 0:
        return 1.0, 1.0, t_size
    c = tau - r[~in_t].max()
    spread = r.max() - r.min()
    base = math.log(t_size) - math.log(rest)
    lower = float(expit(base + epsilon * c / (2 * delta)))
    upper = float(expit(base + epsilon * spread / (2 * delta)))
    return lower, upper, t_size


def epsilon_conditions(p: float, T_size: int, Z_size: int, delta: float,
                       delta_bar: float, c: float) -> tuple[float, float]:
    """Necessary and sufficient epsilon for Pr[Em(x) in T] >= p."""
    if not 0 < p < 1:
        raise ValueError("p must lie in (0, 1)")
    if not 1 <= T_size < Z_size:
        raise ValueError("need 1 <= |T| < |Z|")
    if c <= 0 or delta_bar <= 0:
        raise ValueError("c and delta_bar must be positive")
    log_odds = math.log(p / (1 - p)) + math.log(Z_size - T_size) - math.log(T_size)
    return 2 * delta / delta_bar * log_odds, 2 * delta / c * log_odds


# ---- loss-vs-epsilon curves ----

def bound_curves(epsilons: Sequence[float], sizes: Sequence[int]) -> list[dict]:
    rows = []
    for L in sizes:
        for e in epsilons:
            rows.append({"epsilon": float(e), "L": int(L), "standard": float(e),
                         "improved": float(e) + log_eta(float(e), int(L))})
    return rows
