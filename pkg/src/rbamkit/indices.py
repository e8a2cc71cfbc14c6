"""Values, interaction indices and a coefficient-taxonomy classifier.

Every sum runs over coalitions in increasing bitmask order so results are
reproducible bit-for-bit.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Iterable, Mapping, Protocol

import numpy as np

from .coalition import Coalition, Permutation, coalitions_up_to
from .game import CooperativeGame, derivative_table

TAXONOMY_TOL = 1e-9
RANDOM_ORDER_MAX_D = 8


def _marginals(v: CooperativeGame) -> tuple[np.ndarray, np.ndarray]:
    """Per-player marginal contributions ``Δ_i v(S)`` over ``S ∌ i``, and ``|S|``.

    Returns arrays of shape ``(d, 2**(d-1))``; column ``k`` of row ``i``
    belongs to the ``k``-th coalition (increasing bitmask) that omits ``i``.
    """
    d = v.d
    idx = np.arange(1 << d)
    sizes = np.array([b.bit_count() for b in range(1 << d)])
    deltas, sz = [], []
    for i in range(d):
        bit = 1 << i
        S = idx[(idx & bit) == 0]
        deltas.append(v.values[S | bit] - v.values[S])
        sz.append(sizes[S])
    return np.array(deltas), np.array(sz)


def shapley_value(v: CooperativeGame) -> np.ndarray:
    deltas, sizes = _marginals(v)
    d = v.d
    w = np.array([1.0 / (d * comb(d - 1, s)) for s in range(d)])
    return np.sum(deltas * w[sizes], axis=1)


def banzhaf_value(v: CooperativeGame) -> np.ndarray:
    deltas, _ = _marginals(v)
    return np.sum(deltas, axis=1) / 2.0 ** (v.d - 1)


@dataclass(frozen=True, eq=False)
class SubsetWeights:
    """Per-player weights ``α_T^i`` on coalitions ``T ∌ i``.

    ``table[i - 1, T]`` holds ``α_T^i``; entries with ``i ∈ T`` must be zero.
    """

    d: int
    table: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.table, dtype=float)
        if t.shape != (self.d, 1 << self.d):
            raise ValueError(f"weight table must have shape ({self.d}, {1 << self.d}), got {t.shape}")
        for i in range(self.d):
            bit = 1 << i
            if any(t[i, b] != 0.0 for b in range(1 << self.d) if b & bit):
                raise ValueError(f"player {i + 1} has weight on a coalition containing itself")
        t.setflags(write=False)
        object.__setattr__(self, "table", t)

    @classmethod
    def from_cardinal(cls, d: int, weight: Callable[[int], float]) -> "SubsetWeights":
        t = np.zeros((d, 1 << d))
        for i in range(d):
            for b in range(1 << d):
                if not b >> i & 1:
                    t[i, b] = weight(b.bit_count())
        return cls(d, t)

    @classmethod
    def uniform(cls, d: int) -> "SubsetWeights":
        return cls.from_cardinal(d, lambda s: 1.0 / 2 ** (d - 1))

    @classmethod
    def shapley(cls, d: int) -> "SubsetWeights":
        return cls.from_cardinal(d, lambda s: 1.0 / (d * comb(d - 1, s)))

    @classmethod
    def from_dict(cls, d: int, weights: Mapping[int, Mapping[Coalition, float]]) -> "SubsetWeights":
        t = np.zeros((d, 1 << d))
        for i, row in weights.items():
            for c, w in row.items():
                t[i - 1, c.bits] = float(w)
        return cls(d, t)

    def validate_probabilistic(self, tol: float = TAXONOMY_TOL) -> None:
        if np.any(self.table < -tol):
            raise ValueError("probabilistic weights must be nonnegative")
        sums = self.table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            raise ValueError(f"weights of player {bad[0] + 1} sum to {sums[bad[0]]}, not 1")


def probabilistic_value(v: CooperativeGame, weights: SubsetWeights) -> np.ndarray:
    """``φ_i = Σ_{S∌i} α_S^i Δ_i v(S)``."""
    if weights.d != v.d:
        raise ValueError(f"dimension mismatch: weights on {weights.d}, game on {v.d}")
    weights.validate_probabilistic()
    idx = np.arange(1 << v.d)
    out = np.empty(v.d)
    for i in range(v.d):
        bit = 1 << i
        S = idx[(idx & bit) == 0]
        out[i] = np.sum(weights.table[i, S] * (v.values[S | bit] - v.values[S]))
    return out


def random_order_value(v: CooperativeGame, perm_weights: Mapping[Permutation, float]) -> np.ndarray:
    """Expected marginal contribution under a distribution over arrival orders.

    A permutation's ``mapping`` lists players in order of arrival.
    """
    if v.d > RANDOM_ORDER_MAX_D:
        raise ValueError(f"random_order_value enumerates orders explicitly; d ≤ {RANDOM_ORDER_MAX_D}")
    w = np.array([float(x) for x in perm_weights.values()])
    if np.any(w < 0) or abs(w.sum() - 1.0) > TAXONOMY_TOL:
        raise ValueError("permutation weights must be nonnegative and sum to 1")
    out = np.zeros(v.d)
    for pi, wt in perm_weights.items():
        if pi.d != v.d:
            raise ValueError(f"dimension mismatch: permutation on {pi.d}, game on {v.d}")
        pred = 0
        for player in pi.mapping:
            bit = 1 << (player - 1)
            out[player - 1] += wt * (v.values[pred | bit] - v.values[pred])
            pred |= bit
    return out


def uniform_order_weights(d: int) -> dict[Permutation, float]:
    from itertools import permutations

    perms = list(permutations(range(1, d + 1)))
    return {Permutation(p): 1.0 / len(perms) for p in perms}


@dataclass(frozen=True)
class InteractionTable:
    d: int
    order: int
    values: dict[Coalition, float] = field(hash=False)

    def __post_init__(self) -> None:
        for c in self.values:
            if not 1 <= c.size <= self.order:
                raise ValueError(f"coalition {c} outside order {self.order}")

    def __getitem__(self, key: Coalition | str) -> float:
        c = Coalition.parse(key, self.d) if isinstance(key, str) else key
        return self.values[c]

    def singletons(self) -> np.ndarray:
        return np.array([self.values[Coalition.of(self.d, [i])] for i in range(1, self.d + 1)])

    def total(self) -> float:
        return float(sum(self.values[c] for c in sorted(self.values, key=lambda c: c.bits)))

    def to_dict(self) -> dict[str, float]:
        return {c.key(): float(val) for c, val in sorted(self.values.items(), key=lambda kv: kv[0].bits)}

    def to_json(self) -> str:
        return json.dumps({"order": self.order, "values": self.to_dict()}, sort_keys=True)


def _index_table(v: CooperativeGame, order: int, weight: Callable[[int, int], float]) -> InteractionTable:
    """``φ_S = Σ_{T⊆N∖S} weight(|S|, |T|) Δ_S v(T)`` for ``1 ≤ |S| ≤ order``."""
    d = v.d
    idx = np.arange(1 << d)
    sizes = np.array([b.bit_count() for b in range(1 << d)])
    out = {}
    for S in coalitions_up_to(d, order):
        T = idx[(idx & S.bits) == 0]
        w = np.array([weight(S.size, t) for t in range(d - S.size + 1)])
        D = derivative_table(v.values, S.bits, d)
        out[S] = float(np.sum(w[sizes[T]] * D[T]))
    return InteractionTable(d, order, out)


def shapley_interaction_weight(d: int, s: int, t: int) -> float:
    return (s / (s + t)) / comb(d, s + t)


def banzhaf_interaction_weight(d: int, s: int, t: int) -> float:
    return 2.0 ** -(d - s)


def shapley_interaction_index(v: CooperativeGame, order: int | None = None) -> InteractionTable:
    d = v.d
    return _index_table(v, d if order is None else order, lambda s, t: shapley_interaction_weight(d, s, t))


def banzhaf_interaction_index(v: CooperativeGame, order: int | None = None) -> InteractionTable:
    d = v.d
    return _index_table(v, d if order is None else order, lambda s, t: banzhaf_interaction_weight(d, s, t))


def shapley_taylor_weight(d: int, k: int, s: int, t: int) -> float:
    if s < k:
        return 1.0 if t == 0 else 0.0
    if s == k:
        return (k / d) / comb(d - 1, t)
    return 0.0


def shapley_taylor_index(v: CooperativeGame, k: int) -> InteractionTable:
    d = v.d
    if not 1 <= k <= d:
        raise ValueError(f"Shapley-Taylor order must be in [1, {d}], got {k}")
    return _index_table(v, k, lambda s, t: shapley_taylor_weight(d, k, s, t))


class CoefficientSource(Protocol):
    """Anything exposing aggregation coefficients indexed by the removed set."""

    order: int

    def alpha(self, S: Coalition, removed: Coalition) -> float: ...


def _close(a: float, b: float, tol: float = TAXONOMY_TOL) -> bool:
    return abs(a - b) <= tol


def _all_close(values: Iterable[float], target: float) -> bool:
    return all(_close(x, target) for x in values)


def classify_aggregation(scheme: CoefficientSource, d: int) -> frozenset[str]:
    """Taxonomy labels that apply to an aggregation scheme on ``d`` features.

    Possible labels: ``MC`` (every attribution is a weighted sum of
    discrete derivatives ``Δ_S v(T)``), ``probabilistic``,
    ``cardinal-probabilistic``, ``random-order``, ``shapley``, ``banzhaf``;
    for order above one also ``cardinal``, ``interaction-efficient``,
    ``shapley-interaction``, ``banzhaf-interaction``, ``shapley-taylor``.
    Probabilistic and value labels are judged on the singleton coalitions.
    """
    order = scheme.order
    if not 1 <= order <= d:
        raise ValueError(f"scheme order {order} invalid for d={d}")
    full = (1 << d) - 1
    targets = coalitions_up_to(d, order)
    # game-indexed coefficients: coef[S][U] multiplies v(U) in m(f, S)
    coef: dict[Coalition, np.ndarray] = {}
    for S in targets:
        row = np.empty(1 << d)
        for u in range(1 << d):
            a = scheme.alpha(S, Coalition(full ^ u, d))
            a = float(a)
            if not np.isfinite(a):
                raise ValueError(f"coefficient for S={S}, removed={Coalition(full ^ u, d)} is not finite")
            row[u] = a
        coef[S] = row

    labels: set[str] = set()
    is_mc = True
    for S in targets:
        row = coef[S]
        for u in range(1 << d):
            for i in S.players:
                bit = 1 << (i - 1)
                # removed set T ∌ i  ⇔  present set U ∋ i
                if u & bit and not _close(row[u], -row[u & ~bit]):
                    is_mc = False
                    break
            if not is_mc:
                break
        if not is_mc:
            break
    if not is_mc:
        return frozenset()
    labels.add("MC")

    # derivative-form weights β_T^S = coef of v(T ∪ S), T ⊆ N∖S
    beta = {S: {t: coef[S][t | S.bits] for t in range(1 << d) if not t & S.bits} for S in targets}

    singles = [S for S in targets if S.size == 1]
    prob = all(min(beta[S].values()) >= -TAXONOMY_TOL and _close(sum(beta[S].values()), 1.0) for S in singles)
    cardinal_single = all(
        _close(w, _first_by_size(beta[S])[t.bit_count()]) for S in singles for t, w in beta[S].items()
    ) and all(
        np.allclose(_first_by_size(beta[S]), _first_by_size(beta[singles[0]]), atol=TAXONOMY_TOL, rtol=0)
        for S in singles
    )
    if prob:
        labels.add("probabilistic")
        if cardinal_single:
            labels.add("cardinal-probabilistic")
        efficient = True
        for u in range(1, 1 << d):
            total = sum(coef[S][u] for S in singles)
            if not _close(total, 1.0 if u == full else 0.0):
                efficient = False
                break
        if efficient:
            labels.add("random-order")
        if all(_close(w, 1.0 / (d * comb(d - 1, t.bit_count()))) for S in singles for t, w in beta[S].items()):
            labels.add("shapley")
        if all(_close(w, 2.0 ** -(d - 1)) for S in singles for t, w in beta[S].items()):
            labels.add("banzhaf")

    if order > 1:
        by_size: dict[int, np.ndarray] = {}
        cardinal = True
        for S in targets:
            ref = _first_by_size(beta[S])
            if any(not _close(w, ref[t.bit_count()]) for t, w in beta[S].items()):
                cardinal = False
                break
            if S.size in by_size and not np.allclose(by_size[S.size], ref, atol=TAXONOMY_TOL, rtol=0):
                cardinal = False
                break
            by_size.setdefault(S.size, ref)
        if cardinal:
            labels.add("cardinal")
        eff = all(
            _close(sum(coef[S][u] for S in targets), 1.0 if u == full else 0.0) for u in range(1, 1 << d)
        )
        if eff:
            labels.add("interaction-efficient")
        if all(
            _close(w, shapley_interaction_weight(d, S.size, t.bit_count()))
            for S in targets
            for t, w in beta[S].items()
        ):
            labels.add("shapley-interaction")
        if all(
            _close(w, banzhaf_interaction_weight(d, S.size, t.bit_count()))
            for S in targets
            for t, w in beta[S].items()
        ):
            labels.add("banzhaf-interaction")
        if all(
            _close(w, shapley_taylor_weight(d, order, S.size, t.bit_count()))
            for S in targets
            for t, w in beta[S].items()
        ):
            labels.add("shapley-taylor")
    return frozenset(labels)


def _first_by_size(beta_row: Mapping[int, float]) -> np.ndarray:
    """Weight of the first coalition (by bitmask) of each size, indexed by size."""
    sizes: dict[int, float] = {}
    for t in sorted(beta_row):
        sizes.setdefault(t.bit_count(), beta_row[t])
    return np.array([sizes[k] for k in sorted(sizes)])
