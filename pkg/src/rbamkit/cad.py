"""Canonical additive decompositions built from removal families.

The component of coalition ``S`` is the inclusion-exclusion sum

    g_S(f) = Σ_{T⊆S} (−1)^{|S|−|T|} P_{T̄}(f),

so that keeping the features ``T`` (removing ``T̄``) recovers
``P_{T̄}(f) = Σ_{S⊆T} g_S(f)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

import numpy as np

from .coalition import (
    Coalition,
    Permutation,
    SetFamily,
    all_coalitions,
    apply_permutation,
    ceiling,
    subset_masks,
    subsets_of,
)
from .distributions import make_rng
from .exprfn import FunctionModel, permute_point, permuted_function
from .game import moebius_array
from .removal import Anchored, RemovalFamily, probe_points

DECOMPOSITION_MAX_D = 12
MDS_EPS = 1e-6
MDS_PROBES = 64


def cad_component(family: RemovalFamily, f: FunctionModel, S: Coalition) -> FunctionModel:
    """The component ``g_S(f)`` as an evaluatable model."""
    if S.d != f.d:
        raise ValueError(f"dimension mismatch: coalition on {S.d}, model on {f.d}")
    terms = []
    for T in subsets_of(S):
        sign = -1.0 if (S.size - T.size) & 1 else 1.0
        terms.append((sign, family.remove(f, T.complement())))

    def fn(X: np.ndarray) -> np.ndarray:
        out = np.zeros(X.shape[0])
        for sign, g in terms:
            out = out + sign * g(X)
        return out

    return FunctionModel(f.d, fn, f.domain, label=f"g_{S}({f.label})")


def kept_values(family: RemovalFamily, f: FunctionModel, x) -> np.ndarray:
    """``out[T] = P_{T̄}(f)(x)``, indexed by the kept coalition ``T``."""
    removed = family.removed_values(f, x)
    full = (1 << f.d) - 1
    return removed[full ^ np.arange(1 << f.d)]


def component_values(family: RemovalFamily, f: FunctionModel, x) -> np.ndarray:
    """``out[S] = g_S(f)(x)`` for every coalition bitmask ``S``."""
    return moebius_array(kept_values(family, f, x), f.d)


def component_values_recursive(family: RemovalFamily, f: FunctionModel, x) -> np.ndarray:
    """Same as :func:`component_values` via ``g_S = P_{S̄} − Σ_{T⊊S} g_T``."""
    kept = kept_values(family, f, x)
    g = np.zeros_like(kept)
    for s in range(kept.shape[0]):
        # strict subsets have smaller bitmasks, so they are already filled
        g[s] = kept[s] - sum(g[t] for t in subset_masks(s) if t != s)
    return g


@dataclass(frozen=True, eq=False)
class DecompositionTable:
    family: RemovalFamily
    f: FunctionModel
    components: dict[Coalition, FunctionModel]

    def __getitem__(self, S: Coalition) -> FunctionModel:
        return self.components[S]

    def values_at(self, x) -> dict[Coalition, float]:
        g = component_values(self.family, self.f, x)
        return {Coalition(b, self.f.d): float(g[b]) for b in range(1 << self.f.d)}

    def grid_values(self, grid: Sequence[Sequence[float]]) -> dict[Coalition, list[float]]:
        rows = [component_values(self.family, self.f, x) for x in grid]
        return {Coalition(b, self.f.d): [float(r[b]) for r in rows] for b in range(1 << self.f.d)}

    def to_json(self, grid: Sequence[Sequence[float]]) -> str:
        vals = self.grid_values(grid)
        doc = {
            "grid": [list(map(float, x)) for x in grid],
            "components": {S.key(): v for S, v in vals.items()},
        }
        return json.dumps(doc, sort_keys=True)

    def summation_deviation(self, points: np.ndarray) -> float:
        """Largest ``|P_{T̄}(f)(x) − Σ_{S⊆T} g_S(f)(x)|`` over points and ``T``."""
        worst = 0.0
        d = self.f.d
        for x in points:
            kept = kept_values(self.family, self.f, x)
            g = np.array([self.components[Coalition(b, d)](x) for b in range(1 << d)])
            for t in range(1 << d):
                total = sum(g[s] for s in subset_masks(t))
                worst = max(worst, abs(total - kept[t]))
        return worst


def full_decomposition(family: RemovalFamily, f: FunctionModel, *, verify_probes: int = 4,
                       seed: int = 0, tol: float = 1e-8) -> DecompositionTable:
    """All ``2**d`` components, with the summation property checked on probes."""
    if f.d > DECOMPOSITION_MAX_D:
        raise ValueError(f"full decomposition is capped at d={DECOMPOSITION_MAX_D}, got {f.d}")
    comps = {S: cad_component(family, f, S) for S in all_coalitions(f.d)}
    table = DecompositionTable(family, f, comps)
    if verify_probes:
        pts = probe_points(f.domain, verify_probes, make_rng(seed))
        scale = 1.0 + max(abs(f(p)) for p in pts)
        dev = table.summation_deviation(pts)
        if dev > tol * scale:
            raise ArithmeticError(f"summation property violated by {dev:g}")
    return table


def minimal_dependency_structure(f: FunctionModel, probe_count: int = MDS_PROBES, seed: int = 0,
                                 eps: float = MDS_EPS,
                                 box: tuple[float, float] = (-2.0, 2.0)) -> SetFamily:
    """Ceiling of the coalitions whose anchored component is nonzero on some probe.

    The baseline is drawn at random (seeded) from the probe box so that
    structure is not hidden by a convenient anchor such as the origin.
    """
    rng = make_rng(seed)
    baseline = probe_points(f.domain, 1, rng, box)[0]
    pts = probe_points(f.domain, probe_count, rng, box)
    family = Anchored(baseline)
    peak = np.zeros(1 << f.d)
    for x in pts:
        peak = np.maximum(peak, np.abs(component_values(family, f, x)))
    nonzero = [Coalition(b, f.d) for b in range(1 << f.d) if peak[b] > eps]
    return ceiling(SetFamily(nonzero, f.d))


@dataclass
class CheckReport:
    """Outcome of a probe-based property check."""

    passed: bool
    max_deviation: float
    witness: dict | None = None
    details: dict = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.passed


def _probes(f: FunctionModel, probes: int, seed: int, points) -> np.ndarray:
    if points is not None:
        return np.atleast_2d(np.asarray(points, dtype=float))
    return probe_points(f.domain, probes, make_rng(seed))


def check_idempotence(family: RemovalFamily, f: FunctionModel, tol: float = 1e-10, *,
                      probes: int = 8, seed: int = 0, points=None) -> CheckReport:
    """Decompose every component again and compare with the semi-trivial pattern.

    ``details[(S, T)]`` holds ``g_T(g_S(f))`` at the probe points.
    """
    pts = _probes(f, probes, seed, points)
    d = f.d
    worst, witness = 0.0, None
    details = {}
    for S in all_coalitions(d):
        h = cad_component(family, f, S)
        own = h(pts)
        redo = np.array([component_values(family, h, x) for x in pts])
        for T in all_coalitions(d):
            vals = redo[:, T.bits]
            details[(S, T)] = vals
            target = own if T == S else 0.0
            dev = np.abs(vals - target)
            k = int(np.argmax(dev))
            if dev[k] > worst:
                worst = float(dev[k])
                witness = {"S": S.key(), "T": T.key(), "x": pts[k].tolist(), "value": float(vals[k])}
    return CheckReport(worst <= tol, worst, witness if worst > tol else None, details)


def check_separability(family: RemovalFamily, f: FunctionModel,
                       pairs: Iterable[tuple[Coalition, Coalition]] | None = None, tol: float = 1e-10, *,
                       probes: int = 8, seed: int = 0, points=None) -> CheckReport:
    """Compare ``P_{T′}(P_T(f))`` with ``P_{T∪T′}(f)`` on probes."""
    pts = _probes(f, probes, seed, points)
    d = f.d
    if pairs is None:
        nonempty = [c for c in all_coalitions(d) if c.bits]
        pairs = [(a, b) for a in nonempty for b in nonempty]
    worst, witness = 0.0, None
    for T, T2 in pairs:
        nested = family.remove(family.remove(f, T), T2)(pts)
        joint = family.remove(f, T | T2)(pts)
        dev = np.abs(nested - joint)
        k = int(np.argmax(dev))
        if dev[k] > worst:
            worst = float(dev[k])
            witness = {"T": T.key(), "T2": T2.key(), "x": pts[k].tolist(),
                       "nested": float(nested[k]), "joint": float(joint[k])}
    return CheckReport(worst <= tol, worst, witness if worst > tol else None)


PreservationKind = Literal["independence", "additivity", "symmetry", "anonymity"]


def check_preservation(family: RemovalFamily, kind: PreservationKind, f: FunctionModel, *,
                       i: int | None = None, j: int | None = None, pi: Permutation | None = None,
                       tol: float = 1e-9, probes: int = 16, seed: int = 0, points=None) -> CheckReport:
    """Check a removal-operator preservation condition for a declared structure.

    The caller asserts the premise (``X_i`` independent of ``f``, ``X_i``
    additive in ``f``, ``X_i`` and ``X_j`` symmetric, or a permutation
    ``pi``); it is not inferred.
    """
    pts = _probes(f, probes, seed, points)
    d = f.d
    worst, witness = 0.0, None

    def track(dev: np.ndarray, info: dict) -> None:
        nonlocal worst, witness
        k = int(np.argmax(dev))
        if dev[k] > worst:
            worst = float(dev[k])
            witness = {**info, "x": pts[k].tolist()}

    if kind in ("independence", "additivity"):
        if i is None:
            raise ValueError(f"{kind} check needs the declared variable i")
        I = Coalition.of(d, [i])
        others = [T for T in all_coalitions(d) if i not in T]
        base = family.remove(f, I)(pts) - f(pts)
        for T in others:
            diff = family.remove(f, T | I)(pts) - family.remove(f, T)(pts)
            if kind == "independence":
                track(np.abs(diff), {"T": T.key()})
            else:
                track(np.abs(diff - base), {"T": T.key()})
    elif kind == "symmetry":
        if i is None or j is None:
            raise ValueError("symmetry check needs the declared pair i, j")
        pts = pts.copy()
        pts[:, j - 1] = pts[:, i - 1]
        I, J = Coalition.of(d, [i]), Coalition.of(d, [j])
        for S in all_coalitions(d):
            if i in S or j in S:
                continue
            a = family.remove(f, S | I)(pts)
            b = family.remove(f, S | J)(pts)
            track(np.abs(a - b), {"S": S.key()})
    elif kind == "anonymity":
        if pi is None:
            raise ValueError("anonymity check needs the permutation pi")
        pf = permuted_function(pi, f)
        ppts = permute_point(pi, pts)
        for S in all_coalitions(d):
            a = family.remove(pf, S)(ppts)
            b = family.remove(f, apply_permutation(pi, S))(pts)
            track(np.abs(a - b), {"S": S.key()})
    else:
        raise ValueError(f"unknown preservation kind {kind!r}")
    return CheckReport(worst <= tol, worst, witness if worst > tol else None)
