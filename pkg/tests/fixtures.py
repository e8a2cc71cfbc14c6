"""Frozen fixture tables shared by several test modules."""

import numpy as np

from rbamkit.game import CooperativeGame

GAME_A_TABLE = {"": 0, "1": 3, "2": 4, "3": 0, "1,2": 7, "1,3": 3, "2,3": 24, "1,2,3": 27}
GAME_A_DIVIDENDS = {"": 0, "1": 3, "2": 4, "3": 0, "1,2": 0, "1,3": 0, "2,3": 20, "1,2,3": 0}
V_EX_TABLE = {"1": 1, "2": 2, "3": 4, "1,2": 3, "1,3": 5, "2,3": 7, "1,2,3": 8}


def game_a() -> CooperativeGame:
    return CooperativeGame.from_dict(3, GAME_A_TABLE)


def v_ex() -> CooperativeGame:
    return CooperativeGame.from_dict(3, V_EX_TABLE)


def conditional_sum_game(x1: float, x2: float, sigma: float) -> CooperativeGame:
    """A fixed reference table for f = x1 + x2 with singleton worths shifted down by sigma/2."""
    return CooperativeGame.from_dict(
        2, {"": 0.0, "1": x1 - sigma / 2, "2": x2 - sigma / 2, "1,2": x1 + x2}
    )


def random_expression(rng, d: int, terms: int = 4) -> str:
    """A seeded sum of small products and max/abs terms, defined everywhere."""
    parts = []
    for _ in range(terms):
        k = int(rng.integers(1, min(d, 3) + 1))
        players = sorted(rng.choice(np.arange(1, d + 1), size=k, replace=False).tolist())
        coef = round(float(rng.uniform(-2, 2)), 3)
        factors = [f"x{p}" for p in players]
        kind = int(rng.integers(0, 3))
        if kind == 0:
            body = "*".join(factors)
        elif kind == 1 and k >= 2:
            body = f"max({factors[0]},{'*'.join(factors[1:])})"
        else:
            body = f"abs({'+'.join(factors)})"
        parts.append(f"{coef}*({body})")
    return " + ".join(parts)
