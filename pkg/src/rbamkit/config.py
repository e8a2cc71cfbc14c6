"""JSON configuration loaders for removal families and methods.

Every loader raises :class:`ConfigError` on malformed input.  Datasets may be
given inline (``{"X": [[...]], "y": [...]}`` or a list of rows) or as a path
to a CSV file.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import numpy as np

from .coalition import Coalition, SetFamily
from .distributions import (
    Dataset,
    Empirical,
    Gaussian,
    GaussianSpec,
    PointMass,
    ProductOfMarginals,
    UniformBox,
    load_csv,
)
from .exprfn import FunctionModel
from .rbam import Cardinal, DerivativeForm, Explicit, Method, aggregation_preset
from .removal import (
    DEFAULT_MC_SAMPLES,
    Anchored,
    ConditionalGaussian,
    DatasetLoss,
    Identity,
    LocalLoss,
    Marginal,
    OLSLearner,
    ProductMarginals,
    Retraining,
    TrivialFamily,
    Uniform,
    Variance,
)


class ConfigError(ValueError):
    pass


def load_json_arg(text: str) -> Any:
    """Parse ``text`` as JSON, or read it from a file if it names one."""
    stripped = text.strip()
    if stripped.startswith("@"):
        stripped = stripped[1:]
    if stripped and stripped[0] not in "[{\"-0123456789tfn":
        try:
            stripped = Path(stripped).read_text(encoding="utf-8")
        except OSError as exc:
            raise ConfigError(f"cannot read {stripped!r}: {exc.strerror}") from None
    try:
        return json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc}") from None


def _get(doc: dict, key: str, kind: str):
    if key not in doc:
        raise ConfigError(f"{kind} config is missing {key!r}")
    return doc[key]


def load_dataset(spec: Any, has_label: bool | None = None) -> Dataset:
    try:
        if isinstance(spec, str):
            if has_label is None:
                with open(spec, encoding="utf-8") as fh:
                    header = fh.readline().strip().split(",")
                has_label = bool(header) and header[-1].strip() == "y"
            return load_csv(spec, has_label)
        if isinstance(spec, dict):
            return Dataset(np.asarray(_get(spec, "X", "dataset"), dtype=float),
                           None if spec.get("y") is None else np.asarray(spec["y"], dtype=float))
        if isinstance(spec, list):
            return Dataset(np.asarray(spec, dtype=float))
    except OSError as exc:
        raise ConfigError(f"cannot read dataset: {exc}") from None
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unsupported dataset specification {spec!r}")


def load_gaussian(doc: dict) -> GaussianSpec:
    try:
        return GaussianSpec(_get(doc, "mean", "gaussian"), _get(doc, "cov", "gaussian"))
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def load_reference(doc: dict):
    kind = _get(doc, "kind", "reference")
    if kind == "empirical":
        return Empirical(load_dataset(_get(doc, "data", kind)))
    if kind == "product_of_marginals":
        return ProductOfMarginals(load_dataset(_get(doc, "data", kind)))
    if kind == "uniform_box":
        return UniformBox(tuple(tuple(b) for b in _get(doc, "bounds", kind)))
    if kind == "gaussian":
        return Gaussian(load_gaussian(doc))
    if kind == "point_mass":
        return PointMass(_get(doc, "point", kind))
    raise ConfigError(f"unknown reference kind {kind!r}")


def load_removal(doc: dict, d: int, *, mc_samples: int | None = None, seed: int | None = None,
                 exact: bool | None = None):
    if not isinstance(doc, dict):
        raise ConfigError("removal config must be a JSON object")
    kind = _get(doc, "kind", "removal")
    m = mc_samples if mc_samples is not None else int(doc.get("mc_samples", DEFAULT_MC_SAMPLES))
    s = seed if seed is not None else int(doc.get("seed", 0))
    ex = exact if exact is not None else bool(doc.get("exact", False))
    try:
        if kind == "anchored":
            base = doc.get("baseline", [0.0] * d)
            if len(base) != d:
                raise ConfigError(f"baseline has {len(base)} entries, expected {d}")
            return Anchored(base)
        if kind == "marginal":
            if "reference" in doc:
                ref = load_reference(doc["reference"])
            else:
                ref = Empirical(load_dataset(_get(doc, "data", kind)))
            return Marginal(ref, m, s, ex)
        if kind == "product_marginals":
            return ProductMarginals(load_dataset(_get(doc, "data", kind)), m, s, ex)
        if kind == "uniform":
            return Uniform(tuple(tuple(b) for b in _get(doc, "bounds", kind)), m, s)
        if kind == "conditional_gaussian":
            return ConditionalGaussian(load_gaussian(doc.get("gaussian", doc)), m, s)
        if kind == "retraining":
            return Retraining(load_dataset(_get(doc, "data", kind)), OLSLearner(), doc.get("target", "labels"))
        if kind == "trivial":
            return TrivialFamily()
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown removal kind {kind!r}")


def load_behaviour(doc: dict | None, d: int):
    if doc is None:
        return Identity()
    kind = _get(doc, "kind", "behaviour")
    try:
        if kind == "identity":
            return Identity()
        if kind == "local_loss":
            labeler = FunctionModel.from_expression(_get(doc, "labeler", kind), d)
            return LocalLoss(doc.get("loss", "squared"), labeler)
        if kind == "dataset_loss":
            return DatasetLoss(doc.get("loss", "squared"), load_dataset(_get(doc, "data", kind), has_label=True))
        if kind == "variance":
            return Variance(load_reference(_get(doc, "reference", kind)), int(doc.get("mc_samples", DEFAULT_MC_SAMPLES)),
                            int(doc.get("seed", 0)), bool(doc.get("exact", False)))
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown behaviour kind {kind!r}")


def _pair_table(rows, d: int, kind: str) -> dict:
    out = {}
    try:
        for S, T, w in rows:
            out[(Coalition.parse(str(S), d), Coalition.parse(str(T), d))] = float(w)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"malformed {kind} coefficient table: {exc}") from None
    return out


def load_aggregation(doc: dict, d: int, order: int | None = None):
    if not isinstance(doc, dict):
        raise ConfigError("aggregation config must be a JSON object")
    kind = _get(doc, "kind", "aggregation")
    k = order if order is not None else doc.get("order")
    try:
        if kind == "preset":
            patches = doc.get("patches")
            fam = None if patches is None else SetFamily.of(d, patches)
            return aggregation_preset(_get(doc, "name", kind), d, order=k, patches=fam)
        if kind == "explicit":
            return Explicit(int(k if k is not None else 1), _pair_table(_get(doc, "coeffs", kind), d, kind),
                            name=doc.get("name", "explicit"))
        if kind == "derivative":
            return DerivativeForm(int(k if k is not None else 1), _pair_table(_get(doc, "coeffs", kind), d, kind),
                                  name=doc.get("name", "derivative"))
        if kind == "cardinal":
            table = {(int(s), int(t)): float(b) for s, t, b in _get(doc, "table", kind)}
            return Cardinal.from_table(int(k if k is not None else 1), table, name=doc.get("name", "cardinal"))
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    raise ConfigError(f"unknown aggregation kind {kind!r}")


def load_method(doc: dict, d: int, **removal_overrides) -> Method:
    if not isinstance(doc, dict):
        raise ConfigError("method config must be a JSON object")
    agg = load_aggregation(_get(doc, "aggregation", "method"), d, doc.get("order"))
    removal = load_removal(doc.get("removal", {"kind": "anchored"}), d, **removal_overrides)
    behaviour = load_behaviour(doc.get("behaviour"), d)
    return Method(behaviour, removal, agg, doc.get("order"))
