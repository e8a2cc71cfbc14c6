"""Datasets and the reference distributions that parameterize removal.

All randomness flows through :func:`make_rng`, a Philox counter-based
generator seeded explicitly by the caller.  There is no global RNG state.
"""

from __future__ import annotations

import csv
import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np

from .coalition import Coalition


def make_rng(seed: int) -> np.random.Generator:
    """Philox-4x64 generator; identical seeds give identical streams on every platform."""
    return np.random.Generator(np.random.Philox(int(seed) & (2**64 - 1)))


def _frozen(a, *, ndim: int | None = None) -> np.ndarray:
    arr = np.array(a, dtype=float)
    if ndim is not None and arr.ndim != ndim:
        raise ValueError(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    y: np.ndarray | None = None

    def __post_init__(self) -> None:
        X = _frozen(self.X, ndim=2)
        if X.shape[0] < 1 or X.shape[1] < 1:
            raise ValueError("dataset needs at least one row and one column")
        if not np.all(np.isfinite(X)):
            raise ValueError("dataset contains missing or non-finite values")
        object.__setattr__(self, "X", X)
        if self.y is not None:
            y = _frozen(self.y, ndim=1)
            if y.shape[0] != X.shape[0]:
                raise ValueError(f"label column has {y.shape[0]} rows, features have {X.shape[0]}")
            if not np.all(np.isfinite(y)):
                raise ValueError("label column contains missing or non-finite values")
            object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def columns(self) -> list[str]:
        return [f"x{i}" for i in range(1, self.d + 1)] + (["y"] if self.y is not None else [])

    def require_labels(self) -> np.ndarray:
        if self.y is None:
            raise ValueError("this operation needs a labelled dataset (a 'y' column)")
        return self.y


def load_csv(path: str | Path, has_label: bool = False) -> Dataset:
    """Read a CSV whose header is ``x1,...,xd`` optionally followed by ``y``."""
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(cell.strip() for cell in r)]
    if not rows:
        raise ValueError(f"{path}: empty file, missing header")
    header = [h.strip() for h in rows[0]]
    names = header[:-1] if has_label else header
    if has_label and header[-1] != "y":
        raise ValueError(f"{path}: expected last column 'y', got {header[-1]!r}")
    if not has_label and "y" in header:
        raise ValueError(f"{path}: label column present but has_label is false")
    if not names or any(re.fullmatch(r"x[1-9]\d*", h) is None for h in names):
        raise ValueError(f"{path}: missing or malformed header {header}")
    if names != [f"x{i}" for i in range(1, len(names) + 1)]:
        raise ValueError(f"{path}: non-contiguous variable names {names}")
    data = []
    for lineno, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ValueError(f"{path}:{lineno}: ragged row with {len(row)} cells, header has {len(header)}")
        try:
            data.append([float(cell) for cell in row])
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric cell in {row}") from None
    if not data:
        raise ValueError(f"{path}: no data rows")
    arr = np.array(data)
    if has_label:
        return Dataset(arr[:, :-1], arr[:, -1])
    return Dataset(arr)


@dataclass(frozen=True, eq=False)
class GaussianSpec:
    mean: np.ndarray
    cov: np.ndarray

    def __post_init__(self) -> None:
        mean = _frozen(self.mean, ndim=1)
        cov = _frozen(self.cov, ndim=2)
        d = mean.shape[0]
        if cov.shape != (d, d):
            raise ValueError(f"covariance must be {d}x{d}, got {cov.shape}")
        if np.max(np.abs(cov - cov.T), initial=0.0) > 1e-12:
            raise ValueError("covariance is not symmetric")
        if d and np.min(np.linalg.eigvalsh(cov)) < -1e-10:
            raise ValueError("covariance is not positive semidefinite")
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    @classmethod
    def from_json(cls, text: str) -> "GaussianSpec":
        doc = json.loads(text)
        return cls(doc["mean"], doc["cov"])

    @classmethod
    def bivariate(cls, rho: float) -> "GaussianSpec":
        """Zero mean, unit variances, correlation ``rho``."""
        return cls([0.0, 0.0], [[1.0, rho], [rho, 1.0]])

    def to_json(self) -> str:
        return json.dumps({"mean": self.mean.tolist(), "cov": self.cov.tolist()})

    def factor(self) -> np.ndarray:
        """Matrix ``L`` with ``L @ L.T == cov``; Cholesky, else a symmetric root."""
        if self.d == 0:
            return np.zeros((0, 0))
        try:
            return np.linalg.cholesky(self.cov)
        except np.linalg.LinAlgError:
            w, V = np.linalg.eigh(self.cov)
            return V * np.sqrt(np.clip(w, 0.0, None))


def gaussian_conditional(spec: GaussianSpec, known: Coalition, x_known: Sequence[float]) -> GaussianSpec:
    """Distribution of the unknown coordinates given ``X_known = x_known``.

    The result is over the coordinates outside ``known`` in increasing order.
    """
    if known.d != spec.d:
        raise ValueError(f"dimension mismatch: coalition on {known.d}, spec on {spec.d}")
    k = [i - 1 for i in known.players]
    u = [i for i in range(spec.d) if i not in k]
    xk = np.asarray(x_known, dtype=float).reshape(-1)
    if xk.shape[0] != len(k):
        raise ValueError(f"need {len(k)} known values, got {xk.shape[0]}")
    if not k:
        return spec
    S_kk = spec.cov[np.ix_(k, k)]
    S_uk = spec.cov[np.ix_(u, k)]
    S_uu = spec.cov[np.ix_(u, u)]
    if np.linalg.matrix_rank(S_kk) < len(k):
        raise ValueError(f"covariance block of known coordinates {known} is singular")
    gain = np.linalg.solve(S_kk, S_uk.T).T
    mean = spec.mean[u] + gain @ (xk - spec.mean[k])
    cov = S_uu - gain @ S_uk.T
    cov = (cov + cov.T) / 2
    return GaussianSpec(mean, cov)


@dataclass(frozen=True, eq=False)
class Empirical:
    data: Dataset

    @property
    def d(self) -> int:
        return self.data.d


@dataclass(frozen=True, eq=False)
class ProductOfMarginals:
    data: Dataset

    @property
    def d(self) -> int:
        return self.data.d


@dataclass(frozen=True, eq=False)
class UniformBox:
    bounds: tuple[tuple[float, float], ...]

    def __post_init__(self) -> None:
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if not b or any(not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi) for lo, hi in b):
            raise ValueError(f"uniform bounds must be finite intervals with lo ≤ hi, got {self.bounds}")
        object.__setattr__(self, "bounds", b)

    @property
    def d(self) -> int:
        return len(self.bounds)


@dataclass(frozen=True, eq=False)
class Gaussian:
    spec: GaussianSpec

    @property
    def d(self) -> int:
        return self.spec.d


@dataclass(frozen=True, eq=False)
class PointMass:
    point: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "point", _frozen(self.point, ndim=1))

    @property
    def d(self) -> int:
        return self.point.shape[0]


ReferenceDistribution = Union[Empirical, ProductOfMarginals, UniformBox, Gaussian, PointMass]


def sample(dist: ReferenceDistribution, count: int, seed: int) -> np.ndarray:
    """``count`` rows drawn from ``dist``; bitwise deterministic given ``seed``.

    Gaussian rows are ``mean + Z @ L.T`` where ``Z`` is the first
    ``count * d`` standard normals of the seeded stream, filled row-major.
    """
    if count < 1:
        raise ValueError(f"count must be at least 1, got {count}")
    rng = make_rng(seed)
    if isinstance(dist, PointMass):
        return np.tile(dist.point, (count, 1))
    if isinstance(dist, Empirical):
        rows = rng.integers(0, dist.data.n, size=count)
        return dist.data.X[rows].copy()
    if isinstance(dist, ProductOfMarginals):
        rows = rng.integers(0, dist.data.n, size=(count, dist.d))
        return np.take_along_axis(dist.data.X, rows, axis=0)
    if isinstance(dist, UniformBox):
        lo = np.array([a for a, _ in dist.bounds])
        hi = np.array([b for _, b in dist.bounds])
        return lo + (hi - lo) * rng.random((count, dist.d))
    if isinstance(dist, Gaussian):
        Z = rng.standard_normal((count, dist.d))
        return dist.spec.mean + Z @ dist.spec.factor().T
    raise TypeError(f"unknown reference distribution {dist!r}")


def enumerate_support(dist: ReferenceDistribution) -> tuple[np.ndarray, np.ndarray]:
    """Exact ``(rows, weights)`` for finitely supported distributions.

    ProductOfMarginals is left out on purpose: its support is the full
    ``n**d`` grid, which removal enumerates per removed block instead.
    """
    if isinstance(dist, PointMass):
        return dist.point.reshape(1, -1).copy(), np.ones(1)
    if isinstance(dist, Empirical):
        n = dist.data.n
        return dist.data.X.copy(), np.full(n, 1.0 / n)
    raise ValueError(f"{type(dist).__name__} has no finite support to enumerate")
