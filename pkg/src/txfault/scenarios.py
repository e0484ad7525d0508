"""Labels, scenario parameter grids and dataset manifests.

Every simulated case is described by a :class:`ScenarioSpec`.  Grids are
pure functions of a master seed: each scenario gets its own 64-bit seed
derived from ``(master_seed, stream, ordinal)`` through
:class:`numpy.random.SeedSequence`, so any single case can be regenerated
without touching the others.
"""
from __future__ import annotations

import enum
import itertools
import json
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

SAMPLE_PERIOD = 1.0e-4
RUN_TIME = 0.12
EVENT_TIME = 0.05
FAULT_DURATION = 0.05
FREQUENCY = 60.0

INCEPTION_ANGLES = tuple(range(0, 360, 15))
FAULT_RESISTANCES = (1.0, 5.0, 10.0)
WINDING_PERCENTS = tuple(range(20, 90, 10))
SIDES = ("primary", "secondary")

SWITCHING_ANGLES = INCEPTION_ANGLES
RESIDUAL_FLUXES = (-80, -40, 0, 40, 80)
LOAD_STATES = ("load", "noload")
FLUX_PATTERNS = (0, 1, 2)

# stream tags keep fault / inrush / nofault seeds disjoint for one master seed
_STREAMS = {"fault": 0, "inrush": 1, "nofault": 2}


class FaultType(str, enum.Enum):
    AG = "AG"
    BG = "BG"
    CG = "CG"
    ABG = "ABG"
    ACG = "ACG"
    BCG = "BCG"
    AB = "AB"
    AC = "AC"
    BC = "BC"
    TPG = "TPG"
    TP = "TP"
    NOFAULT = "NOFAULT"

    @property
    def is_internal(self) -> bool:
        return self is not FaultType.NOFAULT

    @property
    def phases(self) -> tuple[int, ...]:
        """Indices (0=a, 1=b, 2=c) of the phases involved in the fault."""
        return _FAULT_PHASES[self]

    @property
    def grounded(self) -> bool:
        return self in (FaultType.AG, FaultType.BG, FaultType.CG,
                        FaultType.ABG, FaultType.ACG, FaultType.BCG,
                        FaultType.TPG)


INTERNAL_FAULTS = tuple(ft for ft in FaultType if ft.is_internal)

_FAULT_PHASES = {
    FaultType.AG: (0,), FaultType.BG: (1,), FaultType.CG: (2,),
    FaultType.ABG: (0, 1), FaultType.ACG: (0, 2), FaultType.BCG: (1, 2),
    FaultType.AB: (0, 1), FaultType.AC: (0, 2), FaultType.BC: (1, 2),
    FaultType.TPG: (0, 1, 2), FaultType.TP: (0, 1, 2),
    FaultType.NOFAULT: (),
}


class MergedClass(str, enum.Enum):
    AG = "AG"
    BG = "BG"
    CG = "CG"
    AB_ABG = "AB_ABG"
    BC_BCG = "BC_BCG"
    CA_CAG = "CA_CAG"
    TP_TPG = "TP_TPG"


MERGED_CLASSES = tuple(MergedClass)

_MERGE_MAP = {
    FaultType.AG: MergedClass.AG,
    FaultType.BG: MergedClass.BG,
    FaultType.CG: MergedClass.CG,
    FaultType.AB: MergedClass.AB_ABG,
    FaultType.ABG: MergedClass.AB_ABG,
    FaultType.BC: MergedClass.BC_BCG,
    FaultType.BCG: MergedClass.BC_BCG,
    FaultType.AC: MergedClass.CA_CAG,
    FaultType.ACG: MergedClass.CA_CAG,
    FaultType.TP: MergedClass.TP_TPG,
    FaultType.TPG: MergedClass.TP_TPG,
}


def merge_class(ft: FaultType | str) -> MergedClass:
    """Map one of the 11 internal fault types onto its merged class.

    Phase-phase faults are pooled with their grounded variant and the two
    three-phase faults are pooled together; single phase-ground faults are
    kept as they are.
    """
    ft = FaultType(ft)
    if not ft.is_internal:
        raise ValueError(f"{ft.value} is not an internal fault")
    return _MERGE_MAP[ft]


def derive_seed(master_seed: int, stream: str, ordinal: int) -> int:
    """Per-scenario seed from ``(master_seed, stream, ordinal)``.

    Uses ``SeedSequence(master_seed, spawn_key=(stream_tag, ordinal))`` and
    takes its first 64-bit state word; equivalent to spawning child
    ``ordinal`` of the stream without materialising the siblings.
    """
    ss = np.random.SeedSequence(int(master_seed),
                                spawn_key=(_STREAMS[stream], int(ordinal)))
    return int(ss.generate_state(1, np.uint64)[0])


@dataclass(frozen=True)
class ScenarioSpec:
    kind: str
    seed: int
    fault_type: FaultType | None = None
    inception_angle: float | None = None
    fault_resistance: float | None = None
    winding_percent: float | None = None
    side: str | None = None
    switching_angle: float | None = None
    residual_flux: float | None = None
    load_state: str | None = None
    flux_pattern: int | None = None

    _FAULT_FIELDS = ("fault_type", "inception_angle", "fault_resistance",
                     "winding_percent", "side")
    _INRUSH_FIELDS = ("switching_angle", "residual_flux", "load_state",
                      "flux_pattern")

    def __post_init__(self):
        if self.kind not in _STREAMS:
            raise ValueError(f"unknown scenario kind {self.kind!r}")
        if self.fault_type is not None:
            object.__setattr__(self, "fault_type", FaultType(self.fault_type))
        present = {f for f in self._FAULT_FIELDS + self._INRUSH_FIELDS
                   if getattr(self, f) is not None}
        if self.kind == "fault":
            expected = set(self._FAULT_FIELDS)
        elif self.kind == "inrush":
            expected = set(self._INRUSH_FIELDS)
        else:
            expected = set()
        if present != expected:
            raise ValueError(
                f"{self.kind} scenario needs fields {sorted(expected)}, "
                f"got {sorted(present)}")
        if self.kind == "fault":
            if not self.fault_type.is_internal:
                raise ValueError("fault scenarios need an internal fault type")
            if self.side not in SIDES:
                raise ValueError(f"side must be one of {SIDES}")
        if self.kind == "inrush":
            if self.load_state not in LOAD_STATES:
                raise ValueError(f"load_state must be one of {LOAD_STATES}")
            if self.flux_pattern not in FLUX_PATTERNS:
                raise ValueError(f"flux_pattern must be one of {FLUX_PATTERNS}")

    @property
    def label(self) -> str:
        """Fault type name, ``"INRUSH"`` or ``"NOFAULT"``."""
        if self.kind == "fault":
            return self.fault_type.value
        return self.kind.upper()

    @property
    def merged_label(self) -> str | None:
        if self.kind != "fault":
            return None
        return merge_class(self.fault_type).value

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        names = {"fault": self._FAULT_FIELDS,
                 "inrush": self._INRUSH_FIELDS}.get(self.kind, ())
        for name in names:
            value = getattr(self, name)
            d[name] = value.value if isinstance(value, FaultType) else value
        d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScenarioSpec":
        return cls(**d)


@dataclass(frozen=True)
class DatasetManifest:
    specs: tuple[ScenarioSpec, ...]
    master_seed: int
    sample_period: float = SAMPLE_PERIOD
    run_time: float = RUN_TIME
    grid: dict = field(default_factory=dict)
    event_time: float = EVENT_TIME

    def __len__(self) -> int:
        return len(self.specs)

    def __iter__(self):
        return iter(self.specs)

    @property
    def counts(self) -> dict[str, int]:
        c = Counter(s.label for s in self.specs)
        return {k: c[k] for k in sorted(c)}

    def merged_counts(self) -> dict[str, int]:
        c = Counter(s.merged_label for s in self.specs if s.kind == "fault")
        return {m.value: c[m.value] for m in MERGED_CLASSES if c[m.value]}

    def __add__(self, other: "DatasetManifest") -> "DatasetManifest":
        if (self.master_seed, self.sample_period, self.run_time,
                self.event_time) != (other.master_seed, other.sample_period,
                                     other.run_time, other.event_time):
            raise ValueError("cannot combine manifests with different settings")
        return DatasetManifest(self.specs + other.specs, self.master_seed,
                               self.sample_period, self.run_time,
                               {**self.grid, **other.grid}, self.event_time)

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "sample_period": self.sample_period,
            "run_time": self.run_time,
            "event_time": self.event_time,
            "grid": self.grid,
            "counts": self.counts,
            "specs": [s.to_dict() for s in self.specs],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=1, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "DatasetManifest":
        specs = tuple(ScenarioSpec.from_dict(s) for s in d["specs"])
        manifest = cls(specs, d["master_seed"], d["sample_period"],
                       d["run_time"], d.get("grid", {}),
                       d.get("event_time", EVENT_TIME))
        if "counts" in d and d["counts"] != manifest.counts:
            raise ValueError("manifest counts block does not match its specs")
        return manifest

    @classmethod
    def from_json(cls, text: str) -> "DatasetManifest":
        return cls.from_dict(json.loads(text))

    def save(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        with open(path) as fh:
            return cls.from_json(fh.read())


def _check_subset(values: Sequence, allowed: Sequence, name: str) -> tuple:
    values = tuple(values)
    bad = [v for v in values if v not in allowed]
    if bad:
        raise ValueError(f"{name} values {bad} are outside the grid {allowed}")
    return values


def build_fault_grid(master_seed: int = 0, *,
                     fault_types: Iterable[FaultType] = INTERNAL_FAULTS,
                     angles: Sequence[float] = INCEPTION_ANGLES,
                     resistances: Sequence[float] = FAULT_RESISTANCES,
                     windings: Sequence[float] = WINDING_PERCENTS,
                     sides: Sequence[str] = SIDES,
                     sample_period: float = SAMPLE_PERIOD,
                     run_time: float = RUN_TIME,
                     event_time: float = EVENT_TIME) -> DatasetManifest:
    """Cartesian grid of internal-fault scenarios.

    With the default factors this yields 24 angles x 3 resistances x 7
    winding percentages x 2 sides = 1008 cases per fault type and 11088
    overall. Passing subsets of the factor lists gives reduced grids.
    """
    fault_types = tuple(FaultType(f) for f in fault_types)
    angles = _check_subset(angles, INCEPTION_ANGLES, "angle")
    resistances = _check_subset(resistances, FAULT_RESISTANCES, "resistance")
    windings = _check_subset(windings, WINDING_PERCENTS, "winding")
    sides = _check_subset(sides, SIDES, "side")
    specs = []
    combos = itertools.product(fault_types, angles, resistances, windings, sides)
    for ordinal, (ft, ang, res, wp, side) in enumerate(combos):
        specs.append(ScenarioSpec(
            kind="fault", fault_type=ft, inception_angle=float(ang),
            fault_resistance=float(res), winding_percent=float(wp), side=side,
            seed=derive_seed(master_seed, "fault", ordinal)))
    grid = {"fault": {"fault_types": [f.value for f in fault_types],
                      "angles": list(angles), "resistances": list(resistances),
                      "windings": list(windings), "sides": list(sides)}}
    return DatasetManifest(tuple(specs), int(master_seed), sample_period,
                           run_time, grid, event_time)


def build_inrush_grid(master_seed: int = 0, *,
                      angles: Sequence[float] = SWITCHING_ANGLES,
                      fluxes: Sequence[float] = RESIDUAL_FLUXES,
                      load_states: Sequence[str] = LOAD_STATES,
                      flux_patterns: Sequence[int] = FLUX_PATTERNS,
                      sample_period: float = SAMPLE_PERIOD,
                      run_time: float = RUN_TIME,
                      event_time: float = EVENT_TIME) -> DatasetManifest:
    """Grid of magnetizing-inrush scenarios (720 with default factors).

    ``flux_pattern`` selects which phase (a, b or c) carries the signed
    residual flux; the other two carry half of it with opposite sign.
    """
    angles = _check_subset(angles, SWITCHING_ANGLES, "switching angle")
    fluxes = _check_subset(fluxes, RESIDUAL_FLUXES, "residual flux")
    load_states = _check_subset(load_states, LOAD_STATES, "load state")
    flux_patterns = _check_subset(flux_patterns, FLUX_PATTERNS, "flux pattern")
    specs = []
    combos = itertools.product(angles, fluxes, load_states, flux_patterns)
    for ordinal, (ang, flux, load, pattern) in enumerate(combos):
        specs.append(ScenarioSpec(
            kind="inrush", switching_angle=float(ang),
            residual_flux=float(flux), load_state=load, flux_pattern=pattern,
            seed=derive_seed(master_seed, "inrush", ordinal)))
    grid = {"inrush": {"angles": list(angles), "fluxes": list(fluxes),
                       "load_states": list(load_states),
                       "flux_patterns": list(flux_patterns)}}
    return DatasetManifest(tuple(specs), int(master_seed), sample_period,
                           run_time, grid, event_time)


def build_nofault_grid(master_seed: int = 0, n_cases: int = 24, *,
                       sample_period: float = SAMPLE_PERIOD,
                       run_time: float = RUN_TIME,
                       event_time: float = EVENT_TIME) -> DatasetManifest:
    specs = tuple(ScenarioSpec(kind="nofault",
                               seed=derive_seed(master_seed, "nofault", i))
                  for i in range(n_cases))
    return DatasetManifest(specs, int(master_seed), sample_period, run_time,
                           {"nofault": {"n_cases": n_cases}}, event_time)
