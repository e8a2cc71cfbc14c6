"""Removal-operator families and behaviour mappings.

A removal family maps a model ``f`` and a coalition ``T`` of features to a
model ``P_T(f)`` that no longer depends on ``X_T``.  Expectation-based
families draw one table of reference rows per family (seeded) and reuse it
for every ``T`` and every evaluation point, so identities that hold in
expectation also hold to float precision between removals of the same
family.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Literal, Union

import numpy as np

from .coalition import Coalition
from .distributions import (
    Dataset,
    Empirical,
    Gaussian,
    GaussianSpec,
    PointMass,
    ProductOfMarginals,
    ReferenceDistribution,
    UniformBox,
    enumerate_support,
    gaussian_conditional,
    make_rng,
    sample,
)
from .exprfn import FunctionModel

DEFAULT_MC_SAMPLES = 1024
PRODUCT_ENUMERATION_CAP = 1 << 20
PROBE_BOX = (-2.0, 2.0)


def _cols(T: Coalition) -> list[int]:
    return [i - 1 for i in T.players]


def _check_dims(f: FunctionModel, T: Coalition) -> None:
    if f.d != T.d:
        raise ValueError(f"dimension mismatch: model on {f.d}, coalition on {T.d}")


def _substitute(X: np.ndarray, cols: list[int], R: np.ndarray) -> np.ndarray:
    """Stack of ``X[i]`` with ``cols`` replaced by ``R[k]``, row index ``i * m + k``."""
    n, m = X.shape[0], R.shape[0]
    out = np.repeat(X, m, axis=0)
    if cols:
        out[:, cols] = np.tile(R[:, cols], (n, 1))
    return out


def _weighted_rows(values: np.ndarray, n: int, w: np.ndarray) -> np.ndarray:
    # row-wise sum keeps the same summation order whatever the batch size
    return np.sum(values.reshape(n, w.shape[0]) * w, axis=1)


class RemovalFamily:
    """Base class.  Subclasses implement :meth:`_remove_batch`."""

    def remove(self, f: FunctionModel, T: Coalition) -> FunctionModel:
        _check_dims(f, T)
        if T.bits == 0:
            return f
        return FunctionModel(
            f.d, lambda X, T=T: self._remove_batch(f, T, X), f.domain, label=f"P_{T}({f.label})"
        )

    def removed_values(self, f: FunctionModel, x) -> np.ndarray:
        """``out[T] = P_T(f)(x)`` for every coalition bitmask ``T``."""
        x = np.asarray(x, dtype=float).reshape(1, -1)
        d = f.d
        out = np.empty(1 << d)
        out[0] = f(x)[0]
        for b in range(1, 1 << d):
            out[b] = self._remove_batch(f, Coalition(b, d), x)[0]
        return out

    def _remove_batch(self, f: FunctionModel, T: Coalition, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True, eq=False)
class Anchored(RemovalFamily):
    """``P_T(f)(x) = f(c_T, x_T̄)`` for a fixed baseline ``c``."""

    baseline: np.ndarray

    def __post_init__(self) -> None:
        b = np.array(self.baseline, dtype=float).reshape(-1)
        b.setflags(write=False)
        object.__setattr__(self, "baseline", b)

    def _remove_batch(self, f, T, X):
        Z = np.array(X, dtype=float, copy=True)
        cols = _cols(T)
        Z[:, cols] = self.baseline[cols]
        return f(Z)

    def removed_values(self, f, x):
        d = f.d
        if self.baseline.shape[0] != d:
            raise ValueError(f"baseline has {self.baseline.shape[0]} entries, model expects {d}")
        x = np.asarray(x, dtype=float).reshape(-1)
        masks = np.arange(1 << d)
        drop = (masks[:, None] >> np.arange(d)) & 1
        Z = np.where(drop == 1, self.baseline, x)
        return f(Z)

    def describe(self):
        return {"kind": "anchored", "baseline": self.baseline.tolist()}


@dataclass(frozen=True, eq=False)
class _TableRemoval(RemovalFamily):
    """Shared machinery: average over one fixed weighted table of reference rows."""

    def table(self, T: Coalition) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def _remove_batch(self, f, T, X):
        X = np.asarray(X, dtype=float)
        R, w = self.table(T)
        vals = f(_substitute(X, _cols(T), R))
        return _weighted_rows(vals, X.shape[0], w)


@dataclass(frozen=True, eq=False)
class Marginal(_TableRemoval):
    """``P_T(f)(x) = E_{X~ref}[f(x_T̄, X_T)]``.

    ``exact=True`` averages over the full support of an Empirical or PointMass
    reference; otherwise ``mc_samples`` seeded draws are used.
    """

    reference: ReferenceDistribution
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    exact: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def table(self, T):
        if "rows" not in self._cache:
            if self.exact:
                self._cache["rows"] = enumerate_support(self.reference)
            else:
                rows = sample(self.reference, self.mc_samples, self.seed)
                self._cache["rows"] = (rows, np.full(rows.shape[0], 1.0 / rows.shape[0]))
        return self._cache["rows"]

    def describe(self):
        return {"kind": "marginal", "reference": describe_reference(self.reference),
                "mc_samples": self.mc_samples, "seed": self.seed, "exact": self.exact}


@dataclass(frozen=True, eq=False)
class ProductMarginals(_TableRemoval):
    """Each removed column is integrated against its own empirical marginal.

    ``exact=True`` enumerates all ``n**|T|`` combinations of removed values.
    """

    data: Dataset
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    exact: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def table(self, T):
        if not self.exact:
            if "rows" not in self._cache:
                rows = sample(ProductOfMarginals(self.data), self.mc_samples, self.seed)
                self._cache["rows"] = (rows, np.full(rows.shape[0], 1.0 / rows.shape[0]))
            return self._cache["rows"]
        key = T.bits
        if key not in self._cache:
            n = self.data.n
            cols = _cols(T)
            total = n ** len(cols)
            if total > PRODUCT_ENUMERATION_CAP:
                raise ValueError(f"exact product enumeration needs {total} rows (cap {PRODUCT_ENUMERATION_CAP})")
            R = np.zeros((total, self.data.d))
            for k, combo in enumerate(itertools.product(range(n), repeat=len(cols))):
                for c, r in zip(cols, combo):
                    R[k, c] = self.data.X[r, c]
            self._cache[key] = (R, np.full(total, 1.0 / total))
        return self._cache[key]

    def describe(self):
        return {"kind": "product_marginals", "data": self.data.X.tolist(),
                "mc_samples": self.mc_samples, "seed": self.seed, "exact": self.exact}


@dataclass(frozen=True, eq=False)
class Uniform(_TableRemoval):
    """Integrate removed features uniformly over finite ``bounds``."""

    bounds: tuple[tuple[float, float], ...]
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "bounds", UniformBox(self.bounds).bounds)

    def table(self, T):
        if "rows" not in self._cache:
            rows = sample(UniformBox(self.bounds), self.mc_samples, self.seed)
            self._cache["rows"] = (rows, np.full(rows.shape[0], 1.0 / rows.shape[0]))
        return self._cache["rows"]

    def describe(self):
        return {"kind": "uniform", "bounds": [list(b) for b in self.bounds],
                "mc_samples": self.mc_samples, "seed": self.seed}


@dataclass(frozen=True, eq=False)
class ConditionalGaussian(RemovalFamily):
    """``P_T(f)(x) = E[f(x_T̄, X_T) | X_T̄ = x_T̄]`` under a Gaussian model.

    One table ``E`` of standard normals is drawn per family; removing ``T``
    uses the columns ``E[:, T]`` pushed through the conditional Cholesky factor.
    """

    spec: GaussianSpec
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    _cache: dict = field(default_factory=dict, repr=False)

    def normals(self) -> np.ndarray:
        if "E" not in self._cache:
            self._cache["E"] = make_rng(self.seed).standard_normal((self.mc_samples, self.spec.d))
        return self._cache["E"]

    def _remove_batch(self, f, T, X):
        X = np.asarray(X, dtype=float)
        d = self.spec.d
        if f.d != d:
            raise ValueError(f"dimension mismatch: Gaussian on {d}, model on {f.d}")
        cols = _cols(T)
        known = T.complement()
        kcols = _cols(known)
        E = self.normals()[:, cols]
        m = E.shape[0]
        n = X.shape[0]
        Z = np.repeat(X, m, axis=0)
        L = None
        for i in range(n):
            cond = gaussian_conditional(self.spec, known, X[i, kcols])
            if L is None:
                # the conditional covariance does not depend on the known values
                L = cond.factor()
            Z[i * m:(i + 1) * m][:, cols] = cond.mean + E @ L.T
        w = np.full(m, 1.0 / m)
        return _weighted_rows(f(Z), n, w)

    def describe(self):
        return {"kind": "conditional_gaussian", "mean": self.spec.mean.tolist(),
                "cov": self.spec.cov.tolist(), "mc_samples": self.mc_samples, "seed": self.seed}


@dataclass(frozen=True)
class OLSLearner:
    """Ordinary least squares with intercept."""

    def fit(self, X: np.ndarray, y: np.ndarray) -> Callable[[np.ndarray], np.ndarray]:
        X = np.asarray(X, dtype=float)
        y = np.asarray(y, dtype=float)
        A = np.hstack([np.ones((X.shape[0], 1)), X])
        coef, *_ = np.linalg.lstsq(A, y, rcond=None)
        intercept, slopes = float(coef[0]), coef[1:].copy()
        return lambda Z: intercept + np.asarray(Z, dtype=float) @ slopes

    def fit_model(self, data: Dataset) -> FunctionModel:
        g = self.fit(data.X, data.require_labels())
        return FunctionModel(data.d, g, label="ols")


@dataclass(frozen=True, eq=False)
class Retraining(RemovalFamily):
    """Retrain a model on the kept columns ``T̄``.

    ``target="labels"`` fits the dataset labels (leave-one-covariate-out
    style, independent of ``f``); ``target="model"`` fits ``f`` evaluated on
    the dataset, which makes the family linear in ``f``.  Removing every
    feature leaves the intercept-only model, the mean target.
    """

    data: Dataset
    learner: OLSLearner = field(default_factory=OLSLearner)
    target: Literal["labels", "model"] = "labels"
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self) -> None:
        if self.target not in ("labels", "model"):
            raise ValueError(f"unknown retraining target {self.target!r}")
        if self.target == "labels":
            self.data.require_labels()

    def _fitted(self, f: FunctionModel, T: Coalition):
        keep = _cols(T.complement())
        if self.target == "labels":
            if T.bits not in self._cache:
                self._cache[T.bits] = self.learner.fit(self.data.X[:, keep], self.data.y)
            return self._cache[T.bits], keep
        return self.learner.fit(self.data.X[:, keep], f(self.data.X)), keep

    def _remove_batch(self, f, T, X):
        g, keep = self._fitted(f, T)
        return g(np.asarray(X, dtype=float)[:, keep])

    def describe(self):
        return {"kind": "retraining", "data": self.data.X.tolist(),
                "labels": None if self.data.y is None else self.data.y.tolist(),
                "learner": "ols", "target": self.target}


@dataclass(frozen=True, eq=False)
class TrivialFamily(RemovalFamily):
    """``P_∅ = f`` and ``P_T = 0`` otherwise.

    Its decomposition puts all of ``f`` in the top component ``g_[d]``.
    """

    def _remove_batch(self, f, T, X):
        return np.zeros(np.asarray(X).shape[0])

    def describe(self):
        return {"kind": "trivial"}


def describe_reference(ref: ReferenceDistribution) -> dict:
    if isinstance(ref, Empirical):
        return {"kind": "empirical", "data": ref.data.X.tolist()}
    if isinstance(ref, ProductOfMarginals):
        return {"kind": "product_of_marginals", "data": ref.data.X.tolist()}
    if isinstance(ref, UniformBox):
        return {"kind": "uniform_box", "bounds": [list(b) for b in ref.bounds]}
    if isinstance(ref, Gaussian):
        return {"kind": "gaussian", "mean": ref.spec.mean.tolist(), "cov": ref.spec.cov.tolist()}
    if isinstance(ref, PointMass):
        return {"kind": "point_mass", "point": ref.point.tolist()}
    raise TypeError(f"unknown reference distribution {ref!r}")


def remove(family: RemovalFamily, f: FunctionModel, T: Coalition) -> FunctionModel:
    return family.remove(f, T)


# ---------------------------------------------------------------- behaviours

LossName = Literal["squared", "cross_entropy"]


def loss_values(loss: LossName, pred: np.ndarray, target: np.ndarray) -> np.ndarray:
    pred = np.asarray(pred, dtype=float)
    target = np.asarray(target, dtype=float)
    if loss == "squared":
        return (pred - target) ** 2
    if loss == "cross_entropy":
        if np.any((pred < 0) | (pred > 1)):
            raise ValueError("cross-entropy needs predictions in [0, 1]")
        p = np.clip(pred, 1e-15, 1 - 1e-15)
        return -(target * np.log(p) + (1 - target) * np.log1p(-p))
    raise ValueError(f"unknown loss {loss!r}")


@dataclass(frozen=True)
class Identity:
    local: bool = field(default=True, init=False)

    def describe(self):
        return {"kind": "identity"}


@dataclass(frozen=True, eq=False)
class LocalLoss:
    loss: LossName
    labeler: FunctionModel
    local: bool = field(default=True, init=False)

    def describe(self):
        return {"kind": "local_loss", "loss": self.loss, "labeler": self.labeler.label}


@dataclass(frozen=True, eq=False)
class DatasetLoss:
    loss: LossName
    data: Dataset
    local: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        self.data.require_labels()

    def describe(self):
        return {"kind": "dataset_loss", "loss": self.loss, "data": self.data.X.tolist(),
                "labels": self.data.y.tolist()}


@dataclass(frozen=True, eq=False)
class Variance:
    reference: ReferenceDistribution
    mc_samples: int = DEFAULT_MC_SAMPLES
    seed: int = 0
    exact: bool = False
    local: bool = field(default=False, init=False)

    def rows(self) -> tuple[np.ndarray, np.ndarray]:
        if self.exact:
            return enumerate_support(self.reference)
        R = sample(self.reference, self.mc_samples, self.seed)
        return R, np.full(R.shape[0], 1.0 / R.shape[0])

    def describe(self):
        return {"kind": "variance", "reference": describe_reference(self.reference),
                "mc_samples": self.mc_samples, "seed": self.seed, "exact": self.exact}


BehaviourMapping = Union[Identity, LocalLoss, DatasetLoss, Variance]


def _global_value(phi: BehaviourMapping, f: FunctionModel) -> float:
    if isinstance(phi, DatasetLoss):
        return -float(np.mean(loss_values(phi.loss, f(phi.data.X), phi.data.y)))
    if isinstance(phi, Variance):
        R, w = phi.rows()
        vals = f(R)
        mean = float(np.sum(vals * w))
        return float(np.sum(w * (vals - mean) ** 2))
    raise TypeError(f"{phi!r} is not a global behaviour mapping")


def apply_behaviour(phi: BehaviourMapping, f: FunctionModel) -> FunctionModel:
    if isinstance(phi, Identity):
        return f
    if isinstance(phi, LocalLoss):
        if phi.labeler.d != f.d:
            raise ValueError("labeler and model dimensions differ")
        g, y = f.fn, phi.labeler.fn
        return FunctionModel(f.d, lambda X: -loss_values(phi.loss, g(X), y(X)), f.domain,
                             label=f"-{phi.loss}({f.label})")
    if isinstance(phi, (DatasetLoss, Variance)):
        c = _global_value(phi, f)
        return FunctionModel.constant(f.d, c, f.domain)
    raise TypeError(f"unknown behaviour mapping {phi!r}")


def behaviour_values(phi: BehaviourMapping, family: RemovalFamily, f: FunctionModel, x) -> np.ndarray:
    """``out[T] = Φ(P_T(f))(x)`` for every coalition bitmask ``T``."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if isinstance(phi, Identity):
        return family.removed_values(f, x)
    if isinstance(phi, LocalLoss):
        preds = family.removed_values(f, x)
        return -loss_values(phi.loss, preds, np.full(preds.shape, phi.labeler(x)))
    d = f.d
    return np.array([_global_value(phi, family.remove(f, Coalition(b, d))) for b in range(1 << d)])


# ---------------------------------------------------------------- independence probing


def probe_points(domain, count: int, rng: np.random.Generator, box: tuple[float, float] = PROBE_BOX) -> np.ndarray:
    """Uniform points in the domain.

    Unbounded coordinates use ``box``; half-bounded ones use an interval of
    the same width starting at the finite end.
    """
    width = box[1] - box[0]
    lo, hi = [], []
    for a, b in domain:
        if np.isfinite(a) and np.isfinite(b):
            lo.append(a), hi.append(b)
        elif np.isfinite(a):
            lo.append(a), hi.append(a + width)
        elif np.isfinite(b):
            lo.append(b - width), hi.append(b)
        else:
            lo.append(box[0]), hi.append(box[1])
    lo_arr, hi_arr = np.array(lo), np.array(hi)
    return lo_arr + (hi_arr - lo_arr) * rng.random((count, len(domain)))


@dataclass(frozen=True)
class IndependenceReport:
    passed: bool
    max_deviation: float
    witness: tuple[float, ...] | None = None
    perturbed: tuple[float, ...] | None = None

    def __bool__(self) -> bool:
        return self.passed


def is_independent_of(f: FunctionModel, T: Coalition, probes: int = 64, seed: int = 0,
                      eps: float = 1e-9) -> IndependenceReport:
    """Probe whether changing only the ``T`` coordinates leaves ``f`` unchanged."""
    _check_dims(f, T)
    if probes < 1:
        raise ValueError("need at least one probe")
    rng = make_rng(seed)
    X = probe_points(f.domain, probes, rng)
    Z = probe_points(f.domain, probes, rng)
    cols = _cols(T)
    Xp = X.copy()
    Xp[:, cols] = Z[:, cols]
    dev = np.abs(f(X) - f(Xp))
    k = int(np.argmax(dev))
    worst = float(dev[k])
    if worst <= eps:
        return IndependenceReport(True, worst)
    return IndependenceReport(False, worst, tuple(X[k]), tuple(Xp[k]))
