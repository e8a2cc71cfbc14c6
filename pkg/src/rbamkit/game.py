"""Cooperative games in characteristic form.

A game on ``d`` players is a dense table of ``2**d`` reals indexed by the
coalition bitmask, with the empty coalition pinned to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .coalition import Coalition, Permutation, _check_d, permute_mask

DEFAULT_EPS = 1e-9


@dataclass(frozen=True, eq=False)
class CooperativeGame:
    d: int
    values: np.ndarray

    def __post_init__(self) -> None:
        _check_d(self.d)
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape[0] != 1 << self.d:
            raise ValueError(f"game on {self.d} players needs {1 << self.d} values, got {vals.shape[0]}")
        if vals[0] != 0.0:
            raise ValueError(f"v(∅) must be 0, got {vals[0]!r}")
        if not np.all(np.isfinite(vals)):
            raise ValueError("game values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_dict(cls, d: int, table: Mapping[Coalition | str, float]) -> "CooperativeGame":
        """Build from a coalition map.  Missing ``∅`` means 0; other gaps are errors."""
        vals = np.full(1 << d, np.nan)
        vals[0] = 0.0
        for key, value in table.items():
            c = Coalition.parse(key, d) if isinstance(key, str) else key
            if c.d != d:
                raise ValueError(f"coalition {c} has dimension {c.d}, expected {d}")
            if c.bits == 0 and float(value) != 0.0:
                raise ValueError(f"v(∅) must be 0, got {value!r}")
            vals[c.bits] = float(value)
        missing = np.flatnonzero(np.isnan(vals))
        if missing.size:
            raise ValueError(f"missing value for coalition {Coalition(int(missing[0]), d)}")
        return cls(d, vals)

    @classmethod
    def from_json(cls, text: str) -> "CooperativeGame":
        doc = json.loads(text)
        if not isinstance(doc, dict) or "d" not in doc or "values" not in doc:
            raise ValueError('game JSON needs keys "d" and "values"')
        return cls.from_dict(int(doc["d"]), doc["values"])

    def to_dict(self) -> dict[str, float]:
        return {Coalition(b, self.d).key(): float(self.values[b]) for b in range(1 << self.d)}

    def to_json(self) -> str:
        return json.dumps({"d": self.d, "values": self.to_dict()}, sort_keys=True)

    def __call__(self, c: Coalition | int) -> float:
        bits = c if isinstance(c, int) else c.bits
        return float(self.values[bits])

    @property
    def grand(self) -> float:
        return float(self.values[-1])

    def __add__(self, other: "CooperativeGame") -> "CooperativeGame":
        _same_d(self, other)
        return CooperativeGame(self.d, self.values + other.values)

    def __sub__(self, other: "CooperativeGame") -> "CooperativeGame":
        _same_d(self, other)
        return CooperativeGame(self.d, self.values - other.values)

    def __mul__(self, k: float) -> "CooperativeGame":
        return CooperativeGame(self.d, self.values * float(k))

    __rmul__ = __mul__

    def allclose(self, other: "CooperativeGame", tol: float = 1e-12) -> bool:
        return self.d == other.d and bool(np.max(np.abs(self.values - other.values)) <= tol)

    def __repr__(self) -> str:
        return f"CooperativeGame(d={self.d}, values={self.to_dict()})"


def _same_d(a: CooperativeGame, b: CooperativeGame) -> None:
    if a.d != b.d:
        raise ValueError(f"dimension mismatch: {a.d} vs {b.d}")


def zero_game(d: int) -> CooperativeGame:
    return CooperativeGame(d, np.zeros(1 << d))


def derivative_table(values: np.ndarray, s_bits: int, d: int) -> np.ndarray:
    """``out[T] = Δ_S v(T ∖ S)`` for every bitmask ``T``.

    Built by one finite difference per member of ``S``; entries with
    ``T ∩ S ≠ ∅`` repeat the value at ``T ∖ S``.
    """
    idx = np.arange(1 << d)
    out = np.asarray(values, dtype=float)
    for b in range(d):
        if s_bits >> b & 1:
            bit = 1 << b
            out = out[idx | bit] - out[idx & ~bit]
    return out


def discrete_derivative(v: CooperativeGame, S: Coalition, T: Coalition) -> float:
    """``Δ_S v(T) = Σ_{L⊆S} (−1)^{|S|−|L|} v((T∖S) ∪ L)``."""
    if S.d != v.d or T.d != v.d:
        raise ValueError(f"dimension mismatch: game on {v.d}, coalitions on {S.d}/{T.d}")
    base = T.bits & ~S.bits
    total = 0.0
    s = S.size
    sub = 0
    while True:
        sign = -1.0 if (s - sub.bit_count()) & 1 else 1.0
        total += sign * v.values[base | sub]
        if sub == S.bits:
            return total
        sub = (sub - S.bits) & S.bits


def moebius_array(values: np.ndarray, d: int) -> np.ndarray:
    """Fast Möbius transform over the subset lattice."""
    a = np.array(values, dtype=float)
    for b in range(d):
        view = a.reshape(-1, 2, 1 << b)
        view[:, 1, :] -= view[:, 0, :]
    return a


def zeta_array(values: np.ndarray, d: int) -> np.ndarray:
    """Inverse of :func:`moebius_array`: ``out[S] = Σ_{T⊆S} values[T]``."""
    a = np.array(values, dtype=float)
    for b in range(d):
        view = a.reshape(-1, 2, 1 << b)
        view[:, 1, :] += view[:, 0, :]
    return a


def moebius_transform(v: CooperativeGame) -> dict[Coalition, float]:
    """Harsanyi dividends ``d(v, S) = Δ_S v(∅)`` for every coalition."""
    div = moebius_array(v.values, v.d)
    return {Coalition(b, v.d): float(div[b]) for b in range(1 << v.d)}


def inverse_moebius(dividends: Mapping[Coalition, float], d: int | None = None) -> CooperativeGame:
    """Game whose dividends are ``dividends`` (absent coalitions contribute 0)."""
    if d is None:
        if not dividends:
            raise ValueError("cannot infer player count from an empty dividend map")
        d = next(iter(dividends)).d
    arr = np.zeros(1 << d)
    for c, val in dividends.items():
        if c.d != d:
            raise ValueError(f"coalition {c} has dimension {c.d}, expected {d}")
        arr[c.bits] = float(val)
    if arr[0] != 0.0:
        raise ValueError(f"dividend of ∅ must be 0, got {arr[0]!r}")
    return CooperativeGame(d, zeta_array(arr, d))


def unanimity_game(R: Coalition, d: int | None = None) -> CooperativeGame:
    """``v_R(T) = 1`` if ``R ⊆ T`` else 0."""
    d = R.d if d is None else d
    if R.d != d:
        raise ValueError(f"dimension mismatch: {R.d} vs {d}")
    if R.bits == 0:
        raise ValueError("unanimity game of the empty coalition is not a valid game")
    idx = np.arange(1 << d)
    return CooperativeGame(d, ((idx & R.bits) == R.bits).astype(float))


def permuted_game(pi: Permutation, v: CooperativeGame) -> CooperativeGame:
    """``(πv)(πS) = v(S)``."""
    if pi.d != v.d:
        raise ValueError(f"dimension mismatch: permutation on {pi.d}, game on {v.d}")
    out = np.empty_like(v.values)
    for b in range(1 << v.d):
        out[permute_mask(pi, b)] = v.values[b]
    return CooperativeGame(v.d, out)


def reduced_game(v: CooperativeGame, T: Coalition) -> CooperativeGame:
    """Merge the players of ``T`` into one player ``[T]``.

    The remaining players keep their relative order as players
    ``1..d-|T|`` and the merged player becomes the last player.
    """
    if T.d != v.d:
        raise ValueError(f"dimension mismatch: {T.d} vs {v.d}")
    if T.bits == 0:
        raise ValueError("cannot merge the empty coalition")
    rest = [i for i in range(v.d) if not T.bits >> i & 1]
    nd = len(rest) + 1
    out = np.empty(1 << nd)
    for b in range(1 << nd):
        orig = 0
        for k, i in enumerate(rest):
            if b >> k & 1:
                orig |= 1 << i
        if b >> (nd - 1) & 1:
            orig |= T.bits
        out[b] = v.values[orig]
    return CooperativeGame(nd, out)


def _outside(d: int, bits: int) -> np.ndarray:
    idx = np.arange(1 << d)
    return idx[(idx & bits) == 0]


def is_null_player(v: CooperativeGame, i: int, eps: float = DEFAULT_EPS) -> bool:
    bit = 1 << (i - 1)
    T = _outside(v.d, bit)
    return bool(np.all(np.abs(v.values[T | bit] - v.values[T]) <= eps))


def is_dummy_player(v: CooperativeGame, i: int, eps: float = DEFAULT_EPS) -> bool:
    return is_dummy_coalition(v, Coalition.of(v.d, [i]), eps)


def is_dummy_coalition(v: CooperativeGame, S: Coalition, eps: float = DEFAULT_EPS) -> bool:
    """``v(T ∪ S) = v(T) + v(S)`` for all ``T ⊆ N ∖ S``."""
    T = _outside(v.d, S.bits)
    return bool(np.all(np.abs(v.values[T | S.bits] - v.values[T] - v.values[S.bits]) <= eps))


def is_null_coalition(v: CooperativeGame, S: Coalition, eps: float = DEFAULT_EPS) -> bool:
    return is_dummy_coalition(v, S, eps) and abs(v(S)) <= eps


def is_symmetric_pair(v: CooperativeGame, i: int, j: int, eps: float = DEFAULT_EPS) -> bool:
    bi, bj = 1 << (i - 1), 1 << (j - 1)
    S = _outside(v.d, bi | bj)
    return bool(np.all(np.abs(v.values[S | bi] - v.values[S | bj]) <= eps))


def is_partnership(v: CooperativeGame, P: Coalition, eps: float = DEFAULT_EPS) -> bool:
    """``v(T ∪ S) = v(T)`` for every ``T ⊆ N ∖ P`` and every strict subset ``S ⊊ P``."""
    if P.bits == 0:
        return False
    T = _outside(v.d, P.bits)
    sub = 0
    while sub != P.bits:
        if np.any(np.abs(v.values[T | sub] - v.values[T]) > eps):
            return False
        sub = (sub - P.bits) & P.bits
    return True


def is_k_monotonic(v: CooperativeGame, k: int, eps: float = DEFAULT_EPS) -> bool:
    """``Δ_S v(T) ≥ −ε`` for all ``1 ≤ |S| ≤ k`` and ``T ⊆ N ∖ S``."""
    for s in range(1, 1 << v.d):
        if s.bit_count() > k:
            continue
        D = derivative_table(v.values, s, v.d)
        if np.min(D[_outside(v.d, s)]) < -eps:
            return False
    return True


def is_monotonic(v: CooperativeGame, eps: float = DEFAULT_EPS) -> bool:
    return is_k_monotonic(v, 1, eps)


def random_game(d: int, rng: np.random.Generator, scale: float = 1.0) -> CooperativeGame:
    vals = rng.normal(0.0, scale, 1 << d)
    vals[0] = 0.0
    return CooperativeGame(d, vals)
