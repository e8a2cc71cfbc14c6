"""Removal-based attribution methods.

A method combines a behaviour mapping ``Φ``, a removal family ``{P_T}`` and
aggregation coefficients ``α_T^S`` (indexed by the removed set ``T``):

    m(f, S)(x) = Σ_T α_T^S Φ(P_T(f))(x).

Coefficients that flip sign whenever a member of ``S`` moves in or out of
the removed set can equivalently be written as weights ``β_T^S`` on discrete
derivatives of the pointwise game, ``m(f, S)(x) = Σ_{T⊆N∖S} β_T^S Δ_S v(T)``.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Literal, Mapping, Sequence

import numpy as np

from . import __version__
from .cad import CheckReport, component_values
from .coalition import Coalition, Permutation, SetFamily, apply_permutation, coalitions_up_to
from .distributions import Dataset, Empirical, Gaussian, GaussianSpec
from .exprfn import FunctionModel, permute_point, permuted_function
from .game import CooperativeGame, derivative_table
from .indices import (
    banzhaf_interaction_weight,
    shapley_interaction_weight,
    shapley_taylor_weight,
)
from .removal import (
    Anchored,
    BehaviourMapping,
    ConditionalGaussian,
    DatasetLoss,
    Identity,
    Marginal,
    RemovalFamily,
    Retraining,
    Variance,
    behaviour_values,
    is_independent_of,
    probe_points,
)
from .distributions import make_rng

CONSISTENCY_EPS = 1e-9


def _sign_flip_alpha(S: Coalition, removed: Coalition, beta: Callable[[Coalition, Coalition], float]) -> float:
    """``α_U^S`` of a derivative-form scheme: ``(−1)^{|S|−|P∩S|} β_{P∖S}^S`` with ``P = Ū``."""
    present = removed.complement()
    sign = -1.0 if (S.size - (present & S).size) & 1 else 1.0
    return sign * beta(S, present - S)


class AggregationScheme:
    """Common interface: ``order``, ``alpha(S, removed)``; MC schemes add ``beta``."""

    order: int
    name: str = "custom"

    def alpha(self, S: Coalition, removed: Coalition) -> float:
        raise NotImplementedError

    @property
    def derivative_form(self) -> bool:
        return hasattr(self, "beta")

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Explicit(AggregationScheme):
    """Sparse table ``{(S, removed T): α_T^S}``; absent entries are zero."""

    order: int
    coeffs: Mapping[tuple[Coalition, Coalition], float]
    name: str = "explicit"

    def __post_init__(self) -> None:
        clean = {}
        for (S, T), a in self.coeffs.items():
            if S.d != T.d:
                raise ValueError(f"coefficient key ({S}, {T}) mixes dimensions")
            if not 1 <= S.size <= self.order:
                raise ValueError(f"coefficient for {S} exceeds order {self.order}")
            a = float(a)
            if not np.isfinite(a):
                raise ValueError(f"coefficient for ({S}, {T}) is not finite")
            if a != 0.0:
                clean[(S, T)] = a
        object.__setattr__(self, "coeffs", clean)

    def alpha(self, S, removed):
        return self.coeffs.get((S, removed), 0.0)

    def support(self, S: Coalition) -> list[tuple[Coalition, float]]:
        return sorted(((T, a) for (S2, T), a in self.coeffs.items() if S2 == S), key=lambda kv: kv[0].bits)

    def satisfies_sign_flip(self, d: int, tol: float = CONSISTENCY_EPS) -> tuple[bool, dict | None]:
        """Check ``α_T^S = −α_{T∪i}^S`` for all ``i ∈ S`` and ``T ∌ i``."""
        for S in coalitions_up_to(d, self.order):
            for t in range(1 << d):
                T = Coalition(t, d)
                for i in S.players:
                    if i in T:
                        continue
                    a, b = self.alpha(S, T), self.alpha(S, T.with_player(i))
                    if abs(a + b) > tol:
                        return False, {"S": S.key(), "T": T.key(), "i": i, "alpha_T": a, "alpha_T_i": b}
        return True, None

    def describe(self):
        return {"kind": "explicit", "order": self.order, "name": self.name,
                "coeffs": [[S.key(), T.key(), a] for (S, T), a in
                           sorted(self.coeffs.items(), key=lambda kv: (kv[0][0].bits, kv[0][1].bits))]}


@dataclass(frozen=True, eq=False)
class DerivativeForm(AggregationScheme):
    """Sparse weights ``{(S, T): β_T^S}`` with ``T ⊆ N∖S``; absent entries are zero."""

    order: int
    coeffs: Mapping[tuple[Coalition, Coalition], float]
    name: str = "derivative"

    def __post_init__(self) -> None:
        clean = {}
        for (S, T), b in self.coeffs.items():
            if (S & T).bits:
                raise ValueError(f"derivative weight ({S}, {T}) needs T disjoint from S")
            if not 1 <= S.size <= self.order:
                raise ValueError(f"weight for {S} exceeds order {self.order}")
            if float(b) != 0.0:
                clean[(S, T)] = float(b)
        object.__setattr__(self, "coeffs", clean)

    def beta(self, S, T):
        return self.coeffs.get((S, T), 0.0)

    def alpha(self, S, removed):
        return _sign_flip_alpha(S, removed, self.beta)

    def describe(self):
        return {"kind": "derivative", "order": self.order, "name": self.name,
                "coeffs": [[S.key(), T.key(), b] for (S, T), b in
                           sorted(self.coeffs.items(), key=lambda kv: (kv[0][0].bits, kv[0][1].bits))]}


@dataclass(frozen=True, eq=False)
class Cardinal(AggregationScheme):
    """Weights ``β_t^s`` that depend only on ``s = |S|``, ``t = |T|`` and ``d``."""

    order: int
    weight: Callable[[int, int, int], float]
    name: str = "cardinal"
    params: dict = field(default_factory=dict)

    @classmethod
    def from_table(cls, order: int, table: Mapping[tuple[int, int], float], name: str = "cardinal") -> "Cardinal":
        frozen = {(int(s), int(t)): float(b) for (s, t), b in table.items()}
        return cls(order, lambda d, s, t: frozen.get((s, t), 0.0), name, {"table": frozen})

    def beta(self, S, T):
        return self.weight(S.d, S.size, T.size)

    def beta_by_size(self, d: int, s: int) -> np.ndarray:
        return np.array([self.weight(d, s, t) for t in range(d - s + 1)])

    def alpha(self, S, removed):
        return _sign_flip_alpha(S, removed, self.beta)

    def describe(self):
        out = {"kind": "cardinal", "order": self.order, "name": self.name}
        if "table" in self.params:
            out["table"] = [[s, t, b] for (s, t), b in sorted(self.params["table"].items())]
        else:
            out.update({k: v for k, v in self.params.items()})
        return out


AGGREGATION_PRESETS = ("shapley", "banzhaf", "stii", "sii", "cii", "bii", "pfi", "univariate",
                       "occlusion", "isolated", "constant")


def occlusion_scheme(d: int, patches: SetFamily | None = None) -> Explicit:
    """``α_∅^i = 1`` and ``α_T^i = −1/n_i`` for every patch ``T ∋ i``.

    ``n_i`` is the number of patches containing ``i``; singleton patches
    reduce this to removing one feature at a time.
    """
    if patches is None:
        patches = SetFamily((Coalition.of(d, [i]) for i in range(1, d + 1)), d)
    coeffs = {}
    for i in range(1, d + 1):
        S = Coalition.of(d, [i])
        covering = [T for T in patches if i in T]
        if not covering:
            raise ValueError(f"player {i} is not covered by any patch")
        coeffs[(S, Coalition.empty(d))] = 1.0
        for T in covering:
            coeffs[(S, T)] = coeffs.get((S, T), 0.0) - 1.0 / len(covering)
    return Explicit(1, coeffs, name="occlusion")


def aggregation_preset(name: str, d: int, *, order: int | None = None,
                       patches: SetFamily | None = None) -> AggregationScheme:
    """Named aggregation coefficients.

    ``shapley``, ``banzhaf``, ``pfi`` (weight on ``Δ_i v(N∖i)`` only) and
    ``univariate`` (weight on ``Δ_i v(∅)`` only) are order one.  ``stii``,
    ``sii`` (alias ``cii``) and ``bii`` take ``order``.  ``occlusion``,
    ``isolated`` (``α_{[d]∖i}^i = 1``) and ``constant`` (``α_{[d]}^i = 1``) are
    explicit tables.
    """
    full = Coalition.full(d)
    if name == "shapley":
        return Cardinal(1, lambda dd, s, t: 1.0 / (dd * comb(dd - 1, t)) if s == 1 else 0.0, "shapley")
    if name == "banzhaf":
        return Cardinal(1, lambda dd, s, t: 2.0 ** -(dd - 1) if s == 1 else 0.0, "banzhaf")
    if name == "pfi":
        return Cardinal(1, lambda dd, s, t: 1.0 if (s == 1 and t == dd - 1) else 0.0, "pfi")
    if name == "univariate":
        return Cardinal(1, lambda dd, s, t: 1.0 if (s == 1 and t == 0) else 0.0, "univariate")
    if name in ("stii", "sii", "cii", "bii"):
        k = d if order is None else order
        if not 1 <= k <= d:
            raise ValueError(f"order must be in [1, {d}], got {k}")
        if name == "stii":
            return Cardinal(k, lambda dd, s, t: shapley_taylor_weight(dd, k, s, t), "stii", {"k": k})
        if name == "bii":
            return Cardinal(k, lambda dd, s, t: banzhaf_interaction_weight(dd, s, t), "bii")
        return Cardinal(k, lambda dd, s, t: shapley_interaction_weight(dd, s, t), "sii")
    if name == "occlusion":
        return occlusion_scheme(d, patches)
    if name == "isolated":
        return Explicit(1, {(Coalition.of(d, [i]), full.without_player(i)): 1.0 for i in range(1, d + 1)},
                        name="isolated")
    if name == "constant":
        return Explicit(1, {(Coalition.of(d, [i]), full): 1.0 for i in range(1, d + 1)}, name="constant")
    raise ValueError(f"unknown aggregation preset {name!r}; known: {', '.join(AGGREGATION_PRESETS)}")


@dataclass(frozen=True, eq=False)
class Method:
    behaviour: BehaviourMapping
    removal: RemovalFamily
    aggregation: AggregationScheme
    order: int | None = None

    def __post_init__(self) -> None:
        if self.order is None:
            object.__setattr__(self, "order", self.aggregation.order)
        if self.order < 1:
            raise ValueError("method order must be at least 1")

    def describe(self) -> dict:
        return {"behaviour": self.behaviour.describe(), "removal": self.removal.describe(),
                "aggregation": self.aggregation.describe(), "order": self.order}

    def config_hash(self) -> str:
        text = json.dumps(self.describe(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode("utf-8")).hexdigest()


def game_from_behaviour(bv: np.ndarray, d: int) -> CooperativeGame:
    """``v(S) = bv[S̄] − bv[[d]]`` for a table ``bv`` indexed by the removed set."""
    full = (1 << d) - 1
    kept = bv[full ^ np.arange(1 << d)]
    vals = kept - bv[full]
    vals[0] = 0.0
    return CooperativeGame(d, vals)


def pointwise_game(behaviour: BehaviourMapping, family: RemovalFamily, f: FunctionModel, x) -> CooperativeGame:
    """``v(S) = Φ(P_{S̄}(f))(x) − Φ(P_{[d]}(f))(x)``."""
    return game_from_behaviour(behaviour_values(behaviour, family, f, x), f.d)


def _check_target(method: Method, S: Coalition, f: FunctionModel) -> None:
    if S.d != f.d:
        raise ValueError(f"dimension mismatch: coalition on {S.d}, model on {f.d}")
    if S.bits == 0:
        raise ValueError("attributions are defined for non-empty coalitions")


def _from_table(method: Method, bv: np.ndarray, S: Coalition, d: int,
                game: CooperativeGame | None = None) -> float:
    if S.size > method.order:
        return 0.0
    agg = method.aggregation
    if isinstance(agg, Explicit):
        return float(sum(a * bv[T.bits] for T, a in agg.support(S)))
    if not agg.derivative_form:
        # generic scheme: dense sum over every removed set
        return float(sum(agg.alpha(S, Coalition(u, d)) * bv[u] for u in range(1 << d)))
    game = game_from_behaviour(bv, d) if game is None else game
    D = derivative_table(game.values, S.bits, d)
    idx = np.arange(1 << d)
    T = idx[(idx & S.bits) == 0]
    if isinstance(agg, Cardinal):
        w = agg.beta_by_size(d, S.size)
        sizes = np.array([t.bit_count() for t in T])
        return float(np.sum(w[sizes] * D[T]))
    w = np.array([agg.beta(S, Coalition(int(t), d)) for t in T])
    return float(np.sum(w * D[T]))


def evaluate(method: Method, f: FunctionModel, S: Coalition, x) -> float:
    """``m(f, S)(x)``; zero for coalitions above the method's order."""
    _check_target(method, S, f)
    bv = behaviour_values(method.behaviour, method.removal, f, x)
    return _from_table(method, bv, S, f.d)


def attribute_point(method: Method, f: FunctionModel, x) -> dict[Coalition, float]:
    """Attributions for every coalition with ``1 ≤ |S| ≤ order`` at one point."""
    bv = behaviour_values(method.behaviour, method.removal, f, x)
    game = game_from_behaviour(bv, f.d)
    return {S: _from_table(method, bv, S, f.d, game) for S in coalitions_up_to(f.d, min(method.order, f.d))}


def representation_sum(method: Method, f: FunctionModel, S: Coalition, x) -> float:
    """``Σ_T α_{T̄}^S [v(T) + Φ(g_∅(f))(x)]`` through the pointwise game."""
    _check_target(method, S, f)
    d = f.d
    bv = behaviour_values(method.behaviour, method.removal, f, x)
    game = game_from_behaviour(bv, d)
    shift = bv[(1 << d) - 1]
    full = (1 << d) - 1
    total = 0.0
    for t in range(1 << d):
        a = method.aggregation.alpha(S, Coalition(full ^ t, d))
        if a:
            total += a * (game.values[t] + shift)
    return total


def derivative_sum(method: Method, game: CooperativeGame, S: Coalition) -> float:
    """``Σ_{T⊆N∖S} β_T^S Δ_S v(T)`` evaluated term by term."""
    from .game import discrete_derivative

    agg = method.aggregation
    if not agg.derivative_form:
        raise ValueError("scheme has no derivative-form weights")
    d = game.d
    return float(sum(agg.beta(S, Coalition(t, d)) * discrete_derivative(game, S, Coalition(t, d))
                     for t in range(1 << d) if not t & S.bits))


@dataclass(frozen=True)
class ComponentAttribution:
    value: float
    truncated: bool
    dropped_terms: int
    dropped_contribution: float
    max_order: int | None


def _superset_sums(beta: np.ndarray, free_bits: int, d: int) -> np.ndarray:
    """``out[T] = Σ_{T⊆U⊆free} beta[U]`` for ``T ⊆ free``."""
    out = beta.copy()
    for b in range(d):
        bit = 1 << b
        if free_bits & bit:
            view = out.reshape(-1, 2, bit)
            view[:, 0, :] += view[:, 1, :]
    return out


def component_weights(method: Method, S: Coalition) -> np.ndarray:
    """``β̄_T^S`` on ``T ⊆ N∖S`` (bitmask-indexed, zero elsewhere)."""
    agg = method.aggregation
    d = S.d
    free = ((1 << d) - 1) & ~S.bits
    sizes = np.array([b.bit_count() for b in range(1 << d)])
    outside = (np.arange(1 << d) & S.bits) == 0
    if agg.name == "shapley" and isinstance(agg, Cardinal):
        return np.where(outside, 1.0 / (sizes + 1.0), 0.0)
    if isinstance(agg, Cardinal):
        # β̄_t = Σ_i C(d−s−t, i) β_{t+i}
        beta = agg.beta_by_size(d, S.size)
        m = d - S.size
        collapsed = np.array([sum(comb(m - t, i) * beta[t + i] for i in range(m - t + 1)) for t in range(m + 1)])
        return np.where(outside, collapsed[np.minimum(sizes, m)], 0.0)
    if not agg.derivative_form:
        raise ValueError("component route needs derivative-form (MC) coefficients")
    beta = np.array([agg.beta(S, Coalition(t, d)) if t & S.bits == 0 else 0.0 for t in range(1 << d)])
    return _superset_sums(beta, free, d)


def mc_attribution_via_components(method: Method, f: FunctionModel, S: Coalition, x,
                                  max_order: int | None = None) -> ComponentAttribution:
    """``m(f, S)(x) = Σ_{T⊆N∖S} β̄_T^S g_{T∪S}(f)(x)``.

    ``max_order`` keeps only components of size at most ``max_order`` and
    reports what was dropped.
    """
    if not isinstance(method.behaviour, Identity):
        raise ValueError("the component route needs the identity behaviour mapping")
    _check_target(method, S, f)
    if S.size > method.order:
        return ComponentAttribution(0.0, False, 0, 0.0, max_order)
    d = f.d
    wbar = component_weights(method, S)
    g = component_values(method.removal, f, x)
    kept_total, dropped_total, dropped = 0.0, 0.0, 0
    for t in range(1 << d):
        if t & S.bits:
            continue
        term = wbar[t] * g[t | S.bits]
        if max_order is not None and (t | S.bits).bit_count() > max_order:
            if term != 0.0:
                dropped += 1
                dropped_total += term
            continue
        kept_total += term
    return ComponentAttribution(float(kept_total), dropped > 0, dropped, float(dropped_total), max_order)


# ---------------------------------------------------------------- method presets

METHOD_PRESETS = ("occlusion", "pfi", "loco", "univariate", "anchored_shapley", "marginal_shapley",
                  "conditional_shapley", "banzhaf", "shapley_effects", "isolated")


def preset(name: str, d: int, *, baseline: Sequence[float] | None = None, data: Dataset | None = None,
           gaussian: GaussianSpec | None = None, removal: RemovalFamily | None = None,
           behaviour: BehaviourMapping | None = None, order: int | None = None,
           patches: SetFamily | None = None, mc_samples: int = 1024, seed: int = 0,
           exact: bool = True) -> Method:
    """A fully configured method by name.

    Aggregation preset names (``shapley``, ``stii`` ...) combine with the
    given ``removal`` and ``behaviour`` (default: anchored at zero, identity).
    The named triples below fill in removal and behaviour themselves.
    """

    def need(value, what):
        if value is None:
            raise ValueError(f"preset {name!r} needs {what}")
        return value

    def anchored():
        return Anchored(np.zeros(d) if baseline is None else baseline)

    if name == "occlusion":
        if baseline is None and data is not None:
            base = Anchored(data.X.mean(axis=0))
        else:
            base = removal or anchored()
        return Method(behaviour or Identity(), base, occlusion_scheme(d, patches))
    if name == "pfi":
        data = need(data, "a labelled dataset")
        return Method(DatasetLoss("squared", data),
                      Marginal(Empirical(data), mc_samples, seed, exact),
                      aggregation_preset("pfi", d))
    if name == "loco":
        data = need(data, "a labelled dataset")
        return Method(DatasetLoss("squared", data), Retraining(data), aggregation_preset("pfi", d))
    if name == "anchored_shapley":
        return Method(Identity(), anchored(), aggregation_preset("shapley", d))
    if name == "marginal_shapley":
        data = need(data, "a dataset")
        return Method(Identity(), Marginal(Empirical(data), mc_samples, seed, exact), aggregation_preset("shapley", d))
    if name == "conditional_shapley":
        gaussian = need(gaussian, "a Gaussian spec")
        return Method(Identity(), ConditionalGaussian(gaussian, mc_samples, seed), aggregation_preset("shapley", d))
    if name == "shapley_effects":
        if gaussian is not None:
            return Method(Variance(Gaussian(gaussian), mc_samples, seed),
                          ConditionalGaussian(gaussian, mc_samples, seed), aggregation_preset("shapley", d))
        data = need(data, "a Gaussian spec or a dataset")
        return Method(Variance(Empirical(data), exact=True), Marginal(Empirical(data), exact=True),
                      aggregation_preset("shapley", d))
    if name in AGGREGATION_PRESETS:
        return Method(behaviour or Identity(), removal or anchored(),
                      aggregation_preset(name, d, order=order, patches=patches))
    raise ValueError(f"unknown preset {name!r}; known: {', '.join(sorted(set(METHOD_PRESETS + AGGREGATION_PRESETS)))}")


# ---------------------------------------------------------------- batch attribution


def with_seed(family: RemovalFamily, seed: int) -> RemovalFamily:
    """Copy of a seeded family with a different seed (and a fresh draw table)."""
    names = {f.name for f in dataclasses.fields(family)} if dataclasses.is_dataclass(family) else set()
    if "seed" not in names:
        return family
    kwargs = {"seed": seed}
    if "_cache" in names:
        kwargs["_cache"] = {}
    return dataclasses.replace(family, **kwargs)


@dataclass(frozen=True)
class AttributionReport:
    method_hash: str
    seed: int
    points: list[dict]
    version: str = __version__

    def to_dict(self) -> dict:
        return {"method_hash": self.method_hash, "seed": self.seed, "version": self.version,
                "points": self.points}


def _attribute_one(method: Method, f: FunctionModel, x, index: int, seed: int) -> dict:
    fam = with_seed(method.removal, seed ^ index)
    m = dataclasses.replace(method, removal=fam)
    vals = attribute_point(m, f, x)
    return {"x": [float(v) for v in np.asarray(x, dtype=float)],
            "attributions": {S.key(): v for S, v in sorted(vals.items(), key=lambda kv: kv[0].bits)}}


def attributions(method: Method, f: FunctionModel, points: Sequence[Sequence[float]], *, seed: int = 0,
                 threads: int = 1) -> AttributionReport:
    """Attribute every point; seeded families use seed ``seed XOR point_index`` per point."""
    pts = [np.asarray(p, dtype=float) for p in points]
    if threads > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(lambda ip: _attribute_one(method, f, ip[1], ip[0], seed), enumerate(pts)))
    else:
        rows = [_attribute_one(method, f, x, k, seed) for k, x in enumerate(pts)]
    return AttributionReport(method.config_hash(), seed, rows)


# ---------------------------------------------------------------- consistency and axioms


@dataclass
class ConsistencyReport:
    sign_flip_holds: bool
    sign_flip_witness: dict | None
    locally_independent: list[int]
    dependence_witness: dict[int, str]
    attributions: dict[str, float]
    dynamic_passed: bool

    @property
    def passed(self) -> bool:
        return self.sign_flip_holds and self.dynamic_passed

    def __bool__(self) -> bool:
        return self.passed


def check_internal_consistency(method: Method, f: FunctionModel, x, eps: float = CONSISTENCY_EPS) -> ConsistencyReport:
    """Static sign-flip test plus a local-independence test at ``x``.

    A feature ``i`` is locally independent at ``x`` when moving it in or out
    of any removed set leaves ``Φ(P_T(f))(x)`` unchanged.  Every coalition
    containing such a feature must then receive zero attribution.
    ``dependence_witness[i]`` names the first removed set ``T ∌ i`` where that
    fails.
    """
    d = f.d
    agg = method.aggregation
    if isinstance(agg, Explicit):
        flip, flip_witness = agg.satisfies_sign_flip(d, eps)
    else:
        flip, flip_witness = True, None
    bv = behaviour_values(method.behaviour, method.removal, f, x)
    game = game_from_behaviour(bv, d)
    local, witness = [], {}
    for i in range(1, d + 1):
        bit = 1 << (i - 1)
        bad = next((t for t in range(1 << d) if not t & bit and abs(bv[t | bit] - bv[t]) > eps), None)
        if bad is None:
            local.append(i)
        else:
            witness[i] = Coalition(bad, d).key()
    attrs = {}
    ok = True
    for S in coalitions_up_to(d, min(method.order, d)):
        if any(i in S for i in local):
            val = _from_table(method, bv, S, d, game)
            attrs[S.key()] = val
            if abs(val) > eps:
                ok = False
    return ConsistencyReport(flip, flip_witness, local, witness, attrs, ok)


AxiomName = Literal["null", "dummy", "symmetry", "anonymity"]


def check_functional_axiom(method: Method, axiom: AxiomName, f: FunctionModel, *, i: int | None = None,
                           j: int | None = None, pi: Permutation | None = None,
                           coalitions: Sequence[Coalition] | None = None, points=None, probes: int = 8,
                           seed: int = 0, eps: float = 1e-9) -> CheckReport:
    """Check one functional axiom for a declared premise.

    The premise (``X_i`` independent of ``f``, ``X_i`` additive in ``f``,
    ``X_i``/``X_j`` symmetric, or the permutation ``pi``) is the caller's
    assertion and is not verified here.
    """
    d = f.d
    pts = (np.atleast_2d(np.asarray(points, dtype=float)) if points is not None
           else probe_points(f.domain, probes, make_rng(seed)))
    order = min(method.order, d)
    worst, witness = 0.0, None
    values: dict[str, list[float]] = {}

    def track(dev: float, info: dict) -> None:
        nonlocal worst, witness
        if dev > worst:
            worst, witness = dev, info

    if axiom in ("null", "dummy"):
        if i is None:
            raise ValueError(f"{axiom} axiom needs the declared variable i")
        targets = [S for S in coalitions_up_to(d, order) if i in S]
        if axiom == "dummy":
            targets = [S for S in targets if S.size > 1]
        if coalitions is not None:
            targets = [S for S in targets if S in coalitions]
        for x in pts:
            vals = attribute_point(method, f, x)
            for S in targets:
                values.setdefault(S.key(), []).append(vals[S])
                track(abs(vals[S]), {"S": S.key(), "x": x.tolist(), "value": vals[S]})
        if axiom == "dummy":
            single = Coalition.of(d, [i])
            attr = FunctionModel(d, lambda X: np.array([evaluate(method, f, single, row) for row in X]), f.domain)
            rep = is_independent_of(attr, single.complement(), probes=max(probes, 4), seed=seed, eps=eps)
            track(rep.max_deviation, {"S": single.key(), "x": list(rep.witness or ()),
                                      "perturbed": list(rep.perturbed or ()), "reason": "depends on other features"})
    elif axiom == "symmetry":
        if i is None or j is None:
            raise ValueError("symmetry axiom needs the declared pair i, j")
        pts = pts.copy()
        pts[:, j - 1] = pts[:, i - 1]
        rest = [S for S in coalitions_up_to(d, order - 1, include_empty=True) if i not in S and j not in S]
        for x in pts:
            vals = attribute_point(method, f, x)
            for S in rest:
                a, b = vals[S.with_player(i)], vals[S.with_player(j)]
                track(abs(a - b), {"S": S.key(), "x": x.tolist(), "with_i": a, "with_j": b})
    elif axiom == "anonymity":
        if pi is None:
            raise ValueError("anonymity axiom needs the permutation pi")
        pf = permuted_function(pi, f)
        targets = coalitions if coalitions is not None else coalitions_up_to(d, order)
        for x in pts:
            lhs = attribute_point(method, pf, permute_point(pi, x))
            rhs = attribute_point(method, f, x)
            for S in targets:
                a, b = lhs[S], rhs[apply_permutation(pi, S)]
                track(abs(a - b), {"S": S.key(), "x": x.tolist(), "permuted": a, "original": b})
    else:
        raise ValueError(f"unknown axiom {axiom!r}")
    return CheckReport(worst <= eps, worst, witness if worst > eps else None, {"values": values})
