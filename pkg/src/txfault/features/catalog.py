"""Feature catalogs and per-record feature vectors.

A catalog is an ordered list of :class:`FeatureDef`, each naming a phase,
a window of the record ("full" or the first post-event "cycle"), an
operation from :mod:`txfault.features.ops` and its parameters.  Names
follow ``<phase>.<feature>.<window>[_<params>]`` and are a stable
contract: the same catalog id always yields the same names in the same
order.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import ops
from ..simulate import CYCLE_SAMPLES, PHASES, WaveformRecord

WINDOWS = ("full", "cycle")


@dataclass(frozen=True)
class FeatureDef:
    phase: str
    feature: str
    window: str = "full"
    params: tuple = ()

    @property
    def name(self) -> str:
        tag = self.window
        if self.params:
            tag += "_" + "_".join(_fmt(v) if k == "part" else f"{k}{_fmt(v)}"
                                  for k, v in self.params)
        return f"{self.phase}.{self.feature}.{tag}"

    def describe(self) -> dict:
        return {"name": self.name, "phase": self.phase, "feature": self.feature,
                "window": self.window, "params": dict(self.params)}


def _fmt(v) -> str:
    return f"{v:g}" if isinstance(v, float) else str(v)


@dataclass(frozen=True)
class FeatureVector:
    values: np.ndarray
    names: tuple[str, ...]
    catalog_id: str

    def __post_init__(self):
        if len(self.values) != len(self.names):
            raise ValueError("names and values differ in length")
        if len(set(self.names)) != len(self.names):
            raise ValueError("feature names are not unique")
        if not np.all(np.isfinite(self.values)):
            bad = [n for n, v in zip(self.names, self.values) if not np.isfinite(v)]
            raise ValueError(f"non-finite feature values: {bad}")

    def as_dict(self) -> dict[str, float]:
        return dict(zip(self.names, map(float, self.values)))


# (feature, params) -> how to evaluate it.  Multi-output operations are
# evaluated once per (op, op-params) and indexed by ``part``.
_SCALAR_OPS = {
    "abs_energy": lambda w, p: ops.abs_energy(w),
    "change_quantile": lambda w, p: ops.change_quantile(
        w, p["ql"], p["qh"], p.get("mode", "corridor_mean")),
    "sample_entropy": lambda w, p: ops.sample_entropy(w, p["m"], p["r"]),
    "approximate_entropy": lambda w, p: ops.approximate_entropy(w, p["m"], p["r"]),
    "binned_entropy": lambda w, p: ops.binned_entropy(w, p["bins"]),
}
_VECTOR_OPS = {
    "stats": (lambda w, p: ops.basic_stats(w), ()),
    "fft": (lambda w, p: ops.fft_coefficients(w, p["k"]), ("k",)),
    "ar": (lambda w, p: ops.ar_coefficients(w, p["k"]).coefficients, ("k",)),
    "dwt": (lambda w, p: ops.dwt_coefficients(w, p["levels"], p["n_approx"]),
            ("levels", "n_approx")),
}
# minimal window length each feature needs
_MIN_LEN = {
    "abs_energy": lambda p: 1,
    "change_quantile": lambda p: 2,
    "sample_entropy": lambda p: p["m"] + 2,
    "approximate_entropy": lambda p: p["m"] + 2,
    "binned_entropy": lambda p: 1,
    "fft": lambda p: 2 * p["k"],
    "ar": lambda p: 2 * p["k"] + 1,
    "dwt": lambda p: 2 ** p["levels"],
}

_CQ_CORRIDORS = ((0.0, 1.0), (0.0, 0.8), (0.2, 1.0), (0.2, 0.8), (0.1, 0.9),
                 (0.4, 0.6))
_CYCLE_STATS = ("min", "max", "mean", "median", "std", "skewness", "kurtosis",
                "q10", "q25", "q75", "q90", "mean_crossings", "n_peaks")


def _stat_defs(phase: str, window: str, names: Sequence[str]) -> list[FeatureDef]:
    return [FeatureDef(phase, name, window) for name in names]


def _per_phase_default(phase: str) -> list[FeatureDef]:
    defs = []
    defs += _stat_defs(phase, "full", ops.STAT_NAMES)
    defs.append(FeatureDef(phase, "abs_energy", "full"))
    for ql, qh in _CQ_CORRIDORS:
        defs.append(FeatureDef(phase, "change_quantile", "full",
                               (("ql", ql), ("qh", qh))))
    defs.append(FeatureDef(phase, "change_quantile", "full",
                           (("ql", 0.0), ("qh", 1.0), ("mode", "eq1_literal"))))
    defs.append(FeatureDef(phase, "sample_entropy", "full", (("m", 2), ("r", 0.2))))
    defs.append(FeatureDef(phase, "approximate_entropy", "full",
                           (("m", 2), ("r", 0.2))))
    defs.append(FeatureDef(phase, "binned_entropy", "full", (("bins", 10),)))
    defs += [FeatureDef(phase, "ar", "full", (("k", 4), ("part", f"coef{i}")))
             for i in range(1, 5)]
    defs += [FeatureDef(phase, "dwt", "full",
                        (("levels", 3), ("n_approx", 8), ("part", p)))
             for p in [f"detail{j}" for j in (1, 2, 3)] + [f"approx{j}" for j in range(8)]]

    defs += _stat_defs(phase, "cycle", _CYCLE_STATS)
    defs.append(FeatureDef(phase, "abs_energy", "cycle"))
    defs.append(FeatureDef(phase, "change_quantile", "cycle",
                           (("ql", 0.0), ("qh", 1.0))))
    defs.append(FeatureDef(phase, "sample_entropy", "cycle", (("m", 2), ("r", 0.2))))
    defs.append(FeatureDef(phase, "approximate_entropy", "cycle",
                           (("m", 2), ("r", 0.2))))
    defs.append(FeatureDef(phase, "binned_entropy", "cycle", (("bins", 10),)))
    defs += [FeatureDef(phase, "fft", "cycle", (("k", 10), ("part", p)))
             for p in [f"bin{j}" for j in range(10)] + ["h2ratio"]]
    return defs


def _op_of(d: FeatureDef) -> str:
    return "stats" if d.feature in ops.STAT_NAMES else d.feature


def _top3() -> list[FeatureDef]:
    cq = (("ql", 0.0), ("qh", 1.0))
    return [FeatureDef("c", "change_quantile", "full", cq),
            FeatureDef("a", "change_quantile", "full", cq),
            FeatureDef("b", "abs_energy", "full")]


def _sampen_cycle() -> list[FeatureDef]:
    return [FeatureDef(p, "sample_entropy", "cycle", (("m", 2), ("r", 0.2)))
            for p in PHASES]


CATALOGS = {
    "default": [d for p in PHASES for d in _per_phase_default(p)],
    "top3": _top3(),
    "sampen_cycle": _sampen_cycle(),
}


def get_catalog(catalog_id: str) -> list[FeatureDef]:
    try:
        return CATALOGS[catalog_id]
    except KeyError:
        raise ValueError(f"unknown catalog {catalog_id!r}; "
                         f"available: {sorted(CATALOGS)}") from None


def feature_names(catalog_id: str) -> list[str]:
    return [d.name for d in get_catalog(catalog_id)]


def catalog_descriptor(catalog_id: str, cycle_length: int = CYCLE_SAMPLES) -> dict:
    """JSON-ready description of a catalog: windows plus every feature."""
    return {
        "catalog_id": catalog_id,
        "windows": {
            "full": "entire record",
            "cycle": f"{cycle_length} samples starting at the event instant",
        },
        "features": [d.describe() for d in get_catalog(catalog_id)],
    }


def write_catalog_descriptor(catalog_id: str, path, **kwargs) -> None:
    with open(path, "w") as fh:
        json.dump(catalog_descriptor(catalog_id, **kwargs), fh, indent=1)


def _window_of(rec: WaveformRecord, phase: int, window: str,
               cycle_length: int) -> np.ndarray:
    if window == "full":
        return rec.samples[phase]
    return rec.cycle_window(cycle_length)[phase]


def _window_len(rec: WaveformRecord, window: str, cycle_length: int) -> int:
    if window == "full":
        return rec.n
    return min(cycle_length, max(rec.n - rec.event_index, 0))


def _check_lengths(rec: WaveformRecord, defs: Sequence[FeatureDef],
                   cycle_length: int) -> None:
    bad = []
    for d in defs:
        op = _op_of(d)
        params = dict(d.params)
        need = _MIN_LEN.get(op, lambda p: 1)(params)
        if d.window == "cycle":
            need = max(need, cycle_length)
        if _window_len(rec, d.window, cycle_length) < need:
            bad.append(d.name)
    if bad:
        raise ValueError(f"record too short for features: {', '.join(bad)}")


def evaluate_defs(rec: WaveformRecord, defs: Sequence[FeatureDef],
                  cycle_length: int = CYCLE_SAMPLES) -> np.ndarray:
    """Values of ``defs`` on one record, sharing multi-output computations."""
    _check_lengths(rec, defs, cycle_length)
    cache: dict = {}
    out = np.empty(len(defs))
    for i, d in enumerate(defs):
        op = _op_of(d)
        params = dict(d.params)
        phase = PHASES.index(d.phase)
        if op in _SCALAR_OPS:
            key = (phase, d.window, d.feature, d.params)
            if key not in cache:
                w = _window_of(rec, phase, d.window, cycle_length)
                cache[key] = _SCALAR_OPS[op](w, params)
            out[i] = cache[key]
            continue
        fn, arg_names = _VECTOR_OPS[op]
        op_params = {k: params[k] for k in arg_names}
        key = (phase, d.window, op, tuple(sorted(op_params.items())))
        if key not in cache:
            w = _window_of(rec, phase, d.window, cycle_length)
            cache[key] = fn(w, op_params)
        res = cache[key]
        if op == "stats":
            out[i] = res[d.feature]
        else:
            out[i] = res[_part_index(op, params["part"])]
    return out


def _part_index(op: str, part) -> int:
    if op == "ar":
        return int(part[4:]) - 1
    if op == "fft":
        return 10 if part == "h2ratio" else int(part[3:])
    if op == "dwt":
        if part.startswith("detail"):
            return int(part[6:]) - 1
        return 3 + int(part[6:])
    raise ValueError(op)


def extract_vector(rec: WaveformRecord, catalog: str = "default",
                   cycle_length: int = CYCLE_SAMPLES) -> FeatureVector:
    """Apply a catalog to a record and return the named feature vector."""
    defs = get_catalog(catalog)
    values = evaluate_defs(rec, defs, cycle_length)
    return FeatureVector(values, tuple(d.name for d in defs), catalog)


class FeatureExtractor(TransformerMixin, BaseEstimator):
    """Turn waveform records into a feature matrix.

    Parameters
    ----------
    catalog : str, default="default"
        Catalog id, one of ``CATALOGS``.
    cycle_length : int, default=167
        Length in samples of the post-event "cycle" window.

    Attributes
    ----------
    feature_names_out_ : ndarray of str
        Column names of the transformed matrix.
    """

    def __init__(self, catalog="default", cycle_length=CYCLE_SAMPLES):
        self.catalog = catalog
        self.cycle_length = cycle_length

    def fit(self, records=None, y=None):
        self.feature_names_out_ = np.array(feature_names(self.catalog), dtype=object)
        self.n_features_out_ = len(self.feature_names_out_)
        return self

    def transform(self, records) -> np.ndarray:
        check_is_fitted(self, "feature_names_out_")
        records = list(records)
        for rec in records:
            if not isinstance(rec, WaveformRecord):
                raise TypeError("FeatureExtractor expects WaveformRecord inputs, "
                                f"got {type(rec).__name__}")
        defs = get_catalog(self.catalog)
        out = np.empty((len(records), len(defs)))
        for i, rec in enumerate(records):
            out[i] = evaluate_defs(rec, defs, self.cycle_length)
        return out

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_out_")
        return self.feature_names_out_.copy()
