"""Run configuration and the pipeline stages behind the CLI verbs.

Every stage reads its inputs from and writes its outputs to the run's
output directory, so stages can be invoked separately.  Outputs other
than ``run_metadata.json`` (which records timings) are pure functions of
the configuration.
"""
from __future__ import annotations

import dataclasses
import json
import platform
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .balance import SmoteNearMiss
from .features import FeatureExtractor, write_catalog_descriptor
from .kde import class_curves, default_bandwidth, write_curves
from .scenarios import (MERGED_CLASSES, DatasetManifest, build_fault_grid,
                        build_inrush_grid)
from .simulate import CYCLE_SAMPLES, generate_dataset
from .storage import (ContainerWriter, FeatureMatrix, iter_container,
                      read_matrix, write_matrix)
from .trees import (DecisionTreeClassifier, GradientBoostingClassifier,
                    RandomForestClassifier, evaluate, rank_features,
                    save_model, stratified_split)

CLASSIFIERS = {
    "dt": DecisionTreeClassifier,
    "rf": RandomForestClassifier,
    "gb": GradientBoostingClassifier,
}

MANIFEST_FILE = "manifest.json"
DATASET_FILE = "dataset.txwf"
METADATA_FILE = "run_metadata.json"


class PipelineError(Exception):
    """A stage failed for a reason the user can act on."""


@dataclass
class RunConfig:
    master_seed: int = 0
    out_dir: str = "run"
    # grid overrides: {"fault": {...}, "inrush": {...}} with builder keywords
    include_inrush: bool = False
    grid: dict = field(default_factory=dict)
    manifest_path: str | None = None
    dataset_path: str | None = None
    # features
    catalog: str = "top3"
    features_path: str | None = None
    feature_columns: list | None = None
    window_length: int = CYCLE_SAMPLES
    # classification
    split: float = 0.8
    classifier: str = "gb"
    # per-kind hyperparameters, e.g. {"gb": {"n_estimators": 300}}
    classifier_params: dict = field(default_factory=lambda: {"gb": {"n_estimators": 100}})
    # detection
    balance: dict = field(default_factory=lambda: {"strategy": "smote", "ratio": 1.0,
                                                   "k_neighbors": 5})
    # ranking and density curves
    rank_estimators: int = 200
    kde_features: list | None = None
    kde_grid_size: int = 512
    kde_normalize: bool = True
    n_jobs: int = 1

    def __post_init__(self):
        if not 0.0 < self.split < 1.0:
            raise PipelineError(f"split must lie in (0, 1), got {self.split}")
        if self.classifier not in CLASSIFIERS:
            raise PipelineError(f"unknown classifier kind {self.classifier!r}; "
                                f"expected one of {sorted(CLASSIFIERS)}")
        if self.window_length < 1:
            raise PipelineError("window_length must be positive")
        bad = sorted(set(self.classifier_params) - set(CLASSIFIERS))
        if bad:
            raise PipelineError("classifier_params must be keyed by classifier kind, "
                                f"got {', '.join(bad)}")

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise PipelineError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                return cls.from_dict(json.load(fh))
        except OSError as exc:
            raise PipelineError(f"cannot read config {path}: {exc.strerror}") from exc

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    # -- resolved paths --
    @property
    def out(self) -> Path:
        return Path(self.out_dir)

    def manifest_file(self) -> Path:
        return Path(self.manifest_path) if self.manifest_path else self.out / MANIFEST_FILE

    def dataset_file(self) -> Path:
        return Path(self.dataset_path) if self.dataset_path else self.out / DATASET_FILE

    def features_file(self) -> Path:
        if self.features_path:
            return Path(self.features_path)
        return self.out / f"features_{self.catalog}.csv"


# -- helpers ------------------------------------------------------------------

def _ensure_out(cfg: RunConfig) -> Path:
    try:
        cfg.out.mkdir(parents=True, exist_ok=True)
        probe = cfg.out / ".write_probe"
        probe.touch()
        probe.unlink()
    except OSError as exc:
        raise PipelineError(f"output directory {cfg.out} is not writable: "
                            f"{exc.strerror}") from exc
    return cfg.out


def _require(path: Path, what: str) -> Path:
    if not path.exists():
        raise PipelineError(f"missing {what}: {path}")
    return path


def _dump(path: Path, obj) -> None:
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=1, sort_keys=True)
        fh.write("\n")


def record_metadata(cfg: RunConfig, verb: str, seconds: float, outputs: dict) -> None:
    """Merge this verb's entry into ``run_metadata.json``."""
    import scipy
    import sklearn

    path = cfg.out / METADATA_FILE
    meta = {}
    if path.exists():
        with open(path) as fh:
            meta = json.load(fh)
    meta["versions"] = {"txfault": __version__, "python": platform.python_version(),
                        "numpy": np.__version__, "scipy": scipy.__version__,
                        "scikit-learn": sklearn.__version__}
    meta.setdefault("runs", {})[verb] = {"config": cfg.to_dict(),
                                         "seconds": round(seconds, 3),
                                         "outputs": outputs}
    _dump(path, meta)


def _load_matrix(cfg: RunConfig) -> FeatureMatrix:
    fm = read_matrix(_require(cfg.features_file(), "feature matrix"))
    if cfg.feature_columns:
        try:
            X = fm.columns(cfg.feature_columns)
        except KeyError as exc:
            raise PipelineError(exc.args[0]) from exc
        fm = FeatureMatrix(X, cfg.feature_columns, fm.labels, fm.merged, fm.provenance)
    return fm


# -- stages -------------------------------------------------------------------

def cmd_generate(cfg: RunConfig) -> dict:
    """Build the scenario grid and synthesize every waveform."""
    _ensure_out(cfg)
    grid = dict(cfg.grid)
    unknown = sorted(set(grid) - {"fault", "inrush"})
    if unknown:
        raise PipelineError(f"unknown grid sections: {', '.join(unknown)}")
    try:
        manifest = build_fault_grid(cfg.master_seed, **grid.get("fault", {}))
        if cfg.include_inrush:
            manifest = manifest + build_inrush_grid(cfg.master_seed,
                                                    **grid.get("inrush", {}))
    except (TypeError, ValueError) as exc:
        raise PipelineError(f"bad grid override: {exc}") from exc
    mpath, dpath = cfg.manifest_file(), cfg.dataset_file()
    manifest.save(mpath)
    with ContainerWriter(dpath) as writer:
        generate_dataset(manifest, n_jobs=cfg.n_jobs, sink=writer)
    return {"records": len(manifest), "counts": manifest.counts,
            "manifest": str(mpath), "dataset": str(dpath)}


def cmd_extract(cfg: RunConfig) -> dict:
    """Apply the configured catalog to every record of the dataset."""
    out = _ensure_out(cfg)
    manifest = DatasetManifest.load(_require(cfg.manifest_file(), "manifest"))
    records = list(iter_container(_require(cfg.dataset_file(), "dataset")))
    if [r.spec for r in records] != list(manifest.specs):
        raise PipelineError("dataset records do not match the manifest")
    try:
        ext = FeatureExtractor(cfg.catalog, cfg.window_length).fit()
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    X = ext.transform(records)
    fm = FeatureMatrix(X, ext.get_feature_names_out(),
                       [r.spec.label for r in records],
                       [r.spec.merged_label or "" for r in records])
    write_matrix(fm, cfg.features_file())
    desc = out / f"catalog_{cfg.catalog}.json"
    write_catalog_descriptor(cfg.catalog, desc, cycle_length=cfg.window_length)
    return {"rows": X.shape[0], "columns": X.shape[1],
            "features": str(cfg.features_file()), "descriptor": str(desc)}


def _fault_rows(fm: FeatureMatrix) -> FeatureMatrix:
    rows = np.flatnonzero(fm.merged != "")
    if rows.size == 0:
        raise PipelineError("feature matrix holds no internal-fault rows")
    return fm.select(rows)


def cmd_rank(cfg: RunConfig) -> dict:
    """Order the catalog's features by forest importance on the 7 classes."""
    out = _ensure_out(cfg)
    fm = _fault_rows(_load_matrix(cfg))
    try:
        ranking = rank_features(fm.X, fm.merged.astype(str), fm.names,
                                random_state=cfg.master_seed,
                                n_estimators=cfg.rank_estimators, n_jobs=cfg.n_jobs)
    except ValueError as exc:
        raise PipelineError(str(exc)) from exc
    path = out / "ranking.csv"
    with open(path, "w") as fh:
        fh.write("rank,feature,importance\n")
        for i, (n, v) in enumerate(zip(ranking.names, ranking.importances), 1):
            fh.write(f"{i},{n},{v!r}\n")
    return {"ranking": str(path), "top3": ranking.top(3)}


def cmd_detect(cfg: RunConfig) -> dict:
    """Fault-versus-inrush detection with a balanced decision tree."""
    out = _ensure_out(cfg)
    fm = _load_matrix(cfg)
    y = np.where(fm.labels == "INRUSH", "INRUSH",
                 np.where(fm.merged != "", "FAULT", "OTHER"))
    keep = np.flatnonzero(y != "OTHER")
    X, y = fm.X[keep], y[keep]
    if np.unique(y).size < 2:
        raise PipelineError("detection needs both fault and inrush rows")
    tr, te = stratified_split(y, 1.0 - cfg.split, cfg.master_seed)
    try:
        sampler = SmoteNearMiss(random_state=cfg.master_seed, **cfg.balance)
        bal = sampler.balance(X[tr], y[tr])
    except (TypeError, ValueError) as exc:
        raise PipelineError(f"balancing failed: {exc}") from exc
    model = DecisionTreeClassifier(random_state=cfg.master_seed).fit(bal.X, bal.y)
    report = evaluate(model, X[te], y[te], labels=["FAULT", "INRUSH"])
    prov = {p: int(np.sum(bal.provenance == p))
            for p in ("original", "synthetic", "retained")}
    doc = {"accuracy": report.accuracy, "report": report.to_dict(),
           "train_counts_before": {c: int(np.sum(y[tr] == c)) for c in ("FAULT", "INRUSH")},
           "train_counts_after": bal.counts(), "provenance": prov,
           "k_reduced": bal.k_reduced, "features": list(fm.names)}
    _dump(out / "detection_report.json", doc)
    save_model(model, out / "detection_model.json")
    return {"accuracy": report.accuracy, "report": str(out / "detection_report.json")}


def cmd_classify(cfg: RunConfig) -> dict:
    """Train the configured classifier on the 7 merged fault classes."""
    out = _ensure_out(cfg)
    fm = _fault_rows(_load_matrix(cfg))
    y = fm.merged.astype(str)
    tr, te = stratified_split(y, 1.0 - cfg.split, cfg.master_seed)
    params = dict(cfg.classifier_params.get(cfg.classifier, {}))
    params.setdefault("random_state", cfg.master_seed)
    if cfg.classifier == "rf":
        params.setdefault("n_jobs", cfg.n_jobs)
    try:
        model = CLASSIFIERS[cfg.classifier](**params)
        model.fit(fm.X[tr], y[tr])
    except (TypeError, ValueError) as exc:
        raise PipelineError(f"classifier {cfg.classifier!r}: {exc}") from exc
    labels = [m.value for m in MERGED_CLASSES if m.value in set(y)]
    report = evaluate(model, fm.X[te], y[te], labels=labels)
    stem = f"classify_{cfg.classifier}"
    with open(out / f"{stem}_report.json", "w") as fh:
        fh.write(report.to_json() + "\n")
    with open(out / f"{stem}_report.txt", "w") as fh:
        fh.write(report.to_table() + "\n")
    save_model(model, out / f"{stem}_model.json")
    return {"accuracy": report.accuracy, "rows": len(report.rows),
            "report": str(out / f"{stem}_report.json"),
            "model": str(out / f"{stem}_model.json")}


def cmd_kde(cfg: RunConfig) -> dict:
    """Per-class density curves for the selected feature columns."""
    out = _ensure_out(cfg)
    fm = _fault_rows(read_matrix(_require(cfg.features_file(), "feature matrix")))
    names = list(cfg.kde_features or cfg.feature_columns or fm.names)
    try:
        cols = fm.columns(names)
    except KeyError as exc:
        raise PipelineError(exc.args[0]) from exc
    classes = [m.value for m in MERGED_CLASSES if m.value in set(fm.merged)]
    files, integrals = [], {}
    for j, name in enumerate(names):
        h = default_bandwidth(name)
        curves = class_curves(cols[:, j], fm.merged, h, classes,
                              cfg.kde_grid_size, cfg.kde_normalize)
        path = out / f"kde_{name}.csv"
        write_curves(path, curves, name)
        files.append(str(path))
        integrals[name] = {c.label: c.integral() for c in curves}
    _dump(out / "kde_summary.json",
          {"normalization": "min-max per feature" if cfg.kde_normalize else "none",
           "bandwidths": {n: default_bandwidth(n) for n in names},
           "integrals": integrals, "curves": len(names) * len(classes)})
    return {"curves": len(names) * len(classes), "files": files}


COMMANDS = {
    "generate": cmd_generate,
    "extract": cmd_extract,
    "rank": cmd_rank,
    "detect": cmd_detect,
    "classify": cmd_classify,
    "kde": cmd_kde,
}


def run(verb: str, cfg: RunConfig) -> dict:
    if verb not in COMMANDS:
        raise PipelineError(f"unknown command {verb!r}")
    start = time.perf_counter()
    result = COMMANDS[verb](cfg)
    record_metadata(cfg, verb, time.perf_counter() - start, result)
    return result
