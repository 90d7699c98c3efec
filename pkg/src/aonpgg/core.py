"""Game mathematics of the all-or-nothing public goods game.

Players in a group of size ``k`` each hold a belief ``x`` that a random
co-player contributes and privately observe a reward ``lam``. Contributing
pays ``lam`` only if every player contributes (0 otherwise); defecting
always pays 1. A player contributes iff ``x**(k-1) * lam >= 1``.

``1/lam`` has CDF ``F(y) = y**(1/m)`` on [0, 1], so ``lam = u**-m`` for
``u ~ U(0, 1)`` and an onlooker sees a contribution with probability
``F(x**(k-1))``.

The underscore-prefixed functions are compiled and shared with the
simulation kernel; the public wrappers validate arguments.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numba
import numpy as np

from .rng import Stream, next_double


class Action(enum.IntEnum):
    DEFECT = 0
    CONTRIBUTE = 1


@dataclass(frozen=True)
class PayoffModel:
    """Reward distribution with ``P(1/lam <= y) = y**(1/m)``."""

    m: float = 4.0

    def __post_init__(self):
        if not (self.m > 0 and math.isfinite(self.m)):
            raise ValueError(f"exponent m must be positive and finite, got {self.m}")

    def cdf(self, y):
        """CDF of ``1/lam``, clipped to [0, 1] outside the support."""
        y = np.clip(y, 0.0, 1.0)
        return y ** (1.0 / self.m)


def check_alpha(alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"learning rate alpha must lie in (0, 1), got {alpha}")
    return float(alpha)


def _check_group(k: int):
    if k < 2:
        raise ValueError(f"a game needs at least 2 players, got k={k}")


@numba.njit(nogil=True, cache=True)
def _sample_lambda(s, m):
    u = next_double(s)
    while u == 0.0:
        u = next_double(s)
    return u ** (-m)


@numba.njit(nogil=True, cache=True)
def _fill_lambdas(s, m, out):
    for i in range(out.size):
        out[i] = _sample_lambda(s, m)


@numba.njit(inline="always")
def _contributes(x, k, lam):
    return x ** (k - 1) * lam >= 1.0


@numba.njit(inline="always")
def _updated(x, alpha, others_contributed, k):
    # x + alpha*(obs - x) keeps 0 and 1 exact fixed points
    obs = others_contributed / (k - 1)
    y = x + alpha * (obs - x)
    if y < 0.0:
        return 0.0
    if y > 1.0:
        return 1.0
    return y


def sample_lambda(rng: Stream, model: PayoffModel, size: int | None = None):
    """Draw private reward(s) ``lam = u**-m``; ``u == 0`` is redrawn."""
    if size is None:
        return float(_sample_lambda(rng.state, float(model.m)))
    out = np.empty(size, dtype=np.float64)
    _fill_lambdas(rng.state, float(model.m), out)
    return out


def decide_action(x: float, k: int, lam: float) -> Action:
    _check_group(k)
    return Action.CONTRIBUTE if _contributes(float(x), int(k), float(lam)) else Action.DEFECT


def contribute_probability(x, k: int, model: PayoffModel = PayoffModel()):
    """Probability ``F(x**(k-1))`` that a player with belief ``x`` contributes."""
    _check_group(k)
    # single power so that k - 1 == m returns x itself
    p = np.asarray(x, dtype=np.float64) ** ((k - 1) / model.m)
    return float(p) if p.ndim == 0 else p


def expected_utilities(x: float, k: int, lam: float) -> tuple[float, float]:
    """Myopic expected utilities ``(u_contribute, u_defect)``."""
    _check_group(k)
    return lam * x ** (k - 1), 1.0


def update_belief(x: float, alpha: float, contributors_among_others: int, k: int) -> float:
    """Exponential-moving-average step towards the observed contribution fraction."""
    _check_group(k)
    if not 0 <= contributors_among_others <= k - 1:
        raise ValueError(
            f"contributors among others must be in [0, {k - 1}], got {contributors_among_others}"
        )
    return float(_updated(float(x), check_alpha(alpha), int(contributors_among_others), int(k)))


def payoff(action: Action, all_contributed: bool, lam: float) -> float:
    if action == Action.DEFECT:
        return 1.0
    return float(lam) if all_contributed else 0.0
