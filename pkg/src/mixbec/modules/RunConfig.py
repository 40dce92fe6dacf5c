#!/usr/bin/env python3
# RunConfig.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Run configuration and the particle-number sequence check.

A run is described by one JSON document (schema in docs/configuration.md).
`RunConfig.from_dict` merges the user document over DEFAULT_CONFIG (user
values win, nested sections are merged one level deep) and validates every
field, raising ConfigError with the offending key.
"""

import copy
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from .Errors import ConfigError, SequenceConditionError
from .Lattice import LatticeModel, PotentialSpec, make_orbital
from .Dynamics import PropagatorConfig
from .Logger import logger

COUPLING_TOLERANCE = 1e-12

DEFAULT_CONFIG: Dict[str, Any] = {
    "lattice": {"dimension": 1, "sites_per_axis": 4, "spacing": 1.0},
    "potentials": {
        "V1": {"kind": "gaussian", "strength": 1.0, "range": 1.0},
        "V2": {"kind": "gaussian", "strength": 1.0, "range": 1.0},
        "V12": {"kind": "gaussian", "strength": 1.0, "range": 1.0},
    },
    "couplings": {"c1": 0.5, "c2": 0.5},
    "sequences": [[2, 2], [4, 4], [6, 6], [8, 8], [10, 10]],
    "sequence_tolerance": 1.0,
    "orbitals": {
        "u": {"kind": "gaussian", "mode": [1], "width": 1.0},
        "v": {"kind": "gaussian", "mode": [0], "width": 0.8},
    },
    "time": {"t_final": 1.0, "dt": 1e-3, "stride": 10, "sample_times": [0.1, 0.25, 0.5, 1.0]},
    "fock": {"cutoffs": None, "cutoff_margin_scale": 1.0, "deficit_bound": 1e-6},
    "propagator": {
        "method": "auto", "krylov_dim": 30, "substep": 0.05, "dense_threshold": 2000,
        "tolerance": 1e-12, "retry_limit": 8, "max_sector_dim": 200000,
    },
    "output": {"directory": "results", "csv_name": "records.csv",
               "summary_name": "summary.json", "trajectory_name": "hartree.csv",
               "write_snapshots": False},
    "experiment": "exact",
    "normalization": "actual",
    "seed": 0,
    "threads": 1,
    "log_level": "INFO",
    "log_directory": None,
}


@dataclass(frozen=True)
class CouplingConstants:
    """c1, c2 >= 0 with c1 + c2 = 1: limiting species fractions."""
    c1: float
    c2: float

    def __post_init__(self):
        if self.c1 < 0 or self.c2 < 0:
            raise ConfigError(f"c1 and c2 must be nonnegative, got ({self.c1}, {self.c2})", key="couplings")
        if abs(self.c1 + self.c2 - 1.0) > COUPLING_TOLERANCE:
            raise ConfigError(f"c1 + c2 must equal 1, got {self.c1 + self.c2!r}", key="couplings")


@dataclass
class SequenceReport:
    """
    Outcome of validate_sequences.

    `ratio_bounds` holds the maxima over all pairs of (N1+N2)/N1, (N1+N2)/N2,
    N1/N2, N2/N1 and sqrt(N1 N2)/(N1+N2).
    """
    pairs: List[Tuple[int, int]]
    deviations: List[Tuple[float, float]]
    violations: List[Tuple[int, int]]
    ratio_bounds: Dict[str, float]

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {"pairs": [list(p) for p in self.pairs],
                "deviations": [list(d) for d in self.deviations],
                "violations": [list(p) for p in self.violations],
                "ratio_bounds": dict(self.ratio_bounds),
                "passed": self.passed}


def ratio_bounds(pairs: Sequence[Tuple[int, int]]) -> Dict[str, float]:
    """Maxima of the five particle-number ratios over all pairs."""
    n1 = np.array([p[0] for p in pairs], dtype=float)
    n2 = np.array([p[1] for p in pairs], dtype=float)
    total = n1 + n2
    return {
        "total_over_n1": float(np.max(total / n1)),
        "total_over_n2": float(np.max(total / n2)),
        "n1_over_n2": float(np.max(n1 / n2)),
        "n2_over_n1": float(np.max(n2 / n1)),
        "sqrt_product_over_total": float(np.max(np.sqrt(n1 * n2) / total)),
    }


def validate_sequences(pairs: Sequence[Sequence[int]], c1: float, c2: float, D: float,
                       raise_on_failure: bool = True) -> SequenceReport:
    """
    Check |N1/(N1+N2) - c1| <= D/N2 and |N2/(N1+N2) - c2| <= D/N1 for every pair.

    Raises:
        ConfigError: empty pair list, invalid couplings, D <= 0 or N < 1.
        SequenceConditionError: first violating pair (when raise_on_failure).
    """
    if not pairs:
        raise ConfigError("at least one (N1, N2) pair is required", key="sequences")
    CouplingConstants(c1, c2)
    if not D > 0:
        raise ConfigError(f"tolerance constant D must be positive, got {D}", key="sequence_tolerance")

    checked: List[Tuple[int, int]] = []
    deviations: List[Tuple[float, float]] = []
    violations: List[Tuple[int, int]] = []
    first_error: Optional[SequenceConditionError] = None
    for pair in pairs:
        if len(pair) != 2:
            raise ConfigError(f"pairs must have two entries, got {pair}", key="sequences")
        n1, n2 = _convert(int, pair[0], "sequences"), _convert(int, pair[1], "sequences")
        if n1 < 1 or n2 < 1 or n1 != pair[0] or n2 != pair[1]:
            raise ConfigError(f"particle numbers must be positive integers, got {pair}", key="sequences")
        dev1 = abs(n1 / (n1 + n2) - c1)
        dev2 = abs(n2 / (n1 + n2) - c2)
        checked.append((n1, n2))
        deviations.append((dev1, dev2))
        if dev1 > D / n2 or dev2 > D / n1:
            violations.append((n1, n2))
            logger.warning(f"Pair ({n1}, {n2}) violates the sequence condition (deviations {dev1:.4g}, {dev2:.4g})")
            if first_error is None:
                first_error = SequenceConditionError((n1, n2), dev1, dev2, D / n2, D / n1)

    report = SequenceReport(checked, deviations, violations, ratio_bounds(checked))
    if first_error is not None and raise_on_failure:
        raise first_error
    return report


def _convert(convert, value: Any, key: str):
    """convert(value), with type and value failures reported against `key`."""
    if isinstance(value, bool):
        raise ConfigError(f"expected a number, got {value!r}", key=key)
    try:
        return convert(value)
    except (TypeError, ValueError) as e:
        raise ConfigError(f"invalid value {value!r} ({e})", key=key) from e


def _section(data: Dict[str, Any], name: str) -> Dict[str, Any]:
    section = data.get(name)
    if not isinstance(section, dict):
        raise ConfigError(f"must be an object, got {section!r}", key=name)
    return section


def _pairs(raw: Any) -> List[Tuple[Any, Any]]:
    if not isinstance(raw, (list, tuple)):
        raise ConfigError(f"must be a list of [N1, N2] pairs, got {raw!r}", key="sequences")
    pairs = []
    for pair in raw:
        if not isinstance(pair, (list, tuple)):
            raise ConfigError(f"pairs must be [N1, N2] lists, got {pair!r}", key="sequences")
        pairs.append(tuple(pair))
    return pairs


def merge_config(user: Dict[str, Any]) -> Dict[str, Any]:
    """Defaults overlaid by the user dictionary, one nesting level deep."""
    merged = copy.deepcopy(DEFAULT_CONFIG)
    for key, value in user.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            section = merged[key]
            for sub_key, sub_value in value.items():
                if isinstance(sub_value, dict) and isinstance(section.get(sub_key), dict) and key != "potentials":
                    section[sub_key].update(sub_value)
                else:
                    section[sub_key] = sub_value
        else:
            merged[key] = copy.deepcopy(value)
    return merged


def coherent_cutoff(mean_number: float, margin_scale: float = 1.0) -> int:
    """Default Fock cutoff N + scale·(4√N + 4), rounded up."""
    return int(math.ceil(mean_number + margin_scale * (4.0 * math.sqrt(mean_number) + 4.0)))


@dataclass
class RunConfig:
    """Validated run configuration; build with RunConfig.from_dict."""
    dimension: int
    sites_per_axis: int
    spacing: float
    potentials: Dict[str, PotentialSpec]
    couplings: CouplingConstants
    sequences: List[Tuple[int, int]]
    sequence_tolerance: float
    orbitals: Dict[str, Dict[str, Any]]
    t_final: float
    dt: float
    stride: int
    sample_times: List[float]
    cutoffs: Optional[Tuple[int, int]]
    cutoff_margin_scale: float
    deficit_bound: float
    propagator: PropagatorConfig
    output: Dict[str, Any]
    experiment: str = "exact"
    normalization: str = "actual"
    seed: int = 0
    threads: int = 1
    log_level: str = "INFO"
    log_directory: Optional[str] = None
    raw: Dict[str, Any] = field(default_factory=dict, repr=False)

    @classmethod
    def from_dict(cls, user: Dict[str, Any]) -> "RunConfig":
        data = merge_config(user)
        lat = _section(data, "lattice")
        dimension = _convert(int, lat.get("dimension"), "lattice.dimension")
        sites = _convert(int, lat.get("sites_per_axis"), "lattice.sites_per_axis")
        spacing = _convert(float, lat.get("spacing"), "lattice.spacing")
        if dimension not in (1, 2, 3):
            raise ConfigError(f"must be 1, 2 or 3, got {dimension}", key="lattice.dimension")
        if sites < 1:
            raise ConfigError(f"must be positive, got {sites}", key="lattice.sites_per_axis")
        if not spacing > 0:
            raise ConfigError(f"must be positive, got {spacing}", key="lattice.spacing")

        potentials = {}
        for name in ("V1", "V2", "V12"):
            spec = _section(data, "potentials").get(name)
            if not isinstance(spec, dict):
                raise ConfigError("missing potential section", key=f"potentials.{name}")
            try:
                potentials[name] = PotentialSpec.from_dict(spec)
            except (TypeError, ValueError) as e:
                raise ConfigError(str(e), key=f"potentials.{name}") from e

        cpl = _section(data, "couplings")
        couplings = CouplingConstants(_convert(float, cpl.get("c1"), "couplings.c1"),
                                      _convert(float, cpl.get("c2"), "couplings.c2"))
        sequences = _pairs(data["sequences"])
        tolerance = _convert(float, data["sequence_tolerance"], "sequence_tolerance")
        validate_sequences(sequences, couplings.c1, couplings.c2, tolerance, raise_on_failure=False)

        tm = _section(data, "time")
        dt = _convert(float, tm.get("dt"), "time.dt")
        if not dt > 0:
            raise ConfigError(f"must be positive, got {dt}", key="time.dt")
        raw_samples = tm.get("sample_times") or []
        if not isinstance(raw_samples, (list, tuple)):
            raise ConfigError(f"must be a list of times, got {raw_samples!r}", key="time.sample_times")
        sample_times = sorted(_convert(float, t, "time.sample_times") for t in raw_samples)
        if tm.get("t_final") is not None:
            t_final = _convert(float, tm["t_final"], "time.t_final")
        else:
            t_final = max(sample_times, default=0.0)
        if t_final < 0:
            raise ConfigError(f"must be nonnegative, got {t_final}", key="time.t_final")
        if any(t < 0 or t > t_final + 1e-12 for t in sample_times):
            raise ConfigError("sample times must lie in [0, t_final]", key="time.sample_times")
        stride = _convert(int, tm.get("stride", 1), "time.stride")
        if stride < 1:
            raise ConfigError(f"must be at least 1, got {stride}", key="time.stride")

        fock = _section(data, "fock")
        scale = _convert(float, fock.get("cutoff_margin_scale", 1.0), "fock.cutoff_margin_scale")
        deficit_bound = _convert(float, fock.get("deficit_bound"), "fock.deficit_bound")
        cutoffs = None
        if fock.get("cutoffs") is not None:
            raw = fock["cutoffs"]
            if not isinstance(raw, (list, tuple)) or len(raw) != 2:
                raise ConfigError(f"must be a pair [M1, M2], got {raw!r}", key="fock.cutoffs")
            m1, m2 = (_convert(int, c, "fock.cutoffs") for c in raw)
            need1 = max(coherent_cutoff(p[0], scale) for p in sequences)
            need2 = max(coherent_cutoff(p[1], scale) for p in sequences)
            if m1 < need1 or m2 < need2:
                raise ConfigError(f"cutoffs ({m1}, {m2}) below required ({need1}, {need2})", key="fock.cutoffs")
            cutoffs = (m1, m2)

        experiment = data["experiment"]
        if experiment not in ("exact", "coherent"):
            raise ConfigError(f"must be 'exact' or 'coherent', got {experiment!r}", key="experiment")
        normalization = data["normalization"]
        if normalization not in ("actual", "exact_n"):
            raise ConfigError(f"must be 'actual' or 'exact_n', got {normalization!r}", key="normalization")
        threads = _convert(int, data["threads"], "threads")
        if threads < 1:
            raise ConfigError(f"must be at least 1, got {threads}", key="threads")
        seed = _convert(int, data["seed"], "seed")

        prop = _section(data, "propagator")
        try:
            propagator = PropagatorConfig(
                method=prop.get("method"),
                krylov_dim=_convert(int, prop.get("krylov_dim"), "propagator.krylov_dim"),
                substep=_convert(float, prop.get("substep"), "propagator.substep"),
                dense_threshold=_convert(int, prop.get("dense_threshold"), "propagator.dense_threshold"),
                tolerance=_convert(float, prop.get("tolerance"), "propagator.tolerance"),
                retry_limit=_convert(int, prop.get("retry_limit"), "propagator.retry_limit"),
                max_sector_dim=_convert(int, prop.get("max_sector_dim"), "propagator.max_sector_dim"),
            )
        except ConfigError:
            raise
        except ValueError as e:
            raise ConfigError(str(e), key="propagator") from e

        orbitals = data["orbitals"]
        if not isinstance(orbitals, dict) or any(not isinstance(orbitals.get(n, {}), dict) for n in ("u", "v")):
            raise ConfigError("must map 'u' and 'v' to orbital sections", key="orbitals")

        config = cls(
            dimension=dimension, sites_per_axis=sites, spacing=spacing, potentials=potentials,
            couplings=couplings, sequences=sequences, sequence_tolerance=tolerance,
            orbitals=orbitals, t_final=t_final, dt=dt, stride=stride, sample_times=sample_times,
            cutoffs=cutoffs, cutoff_margin_scale=scale, deficit_bound=deficit_bound,
            propagator=propagator, output=_section(data, "output"), experiment=experiment,
            normalization=normalization, seed=seed, threads=threads, log_level=str(data["log_level"]),
            log_directory=data.get("log_directory"), raw=data,
        )
        logger.debug(f"Configuration loaded: {len(sequences)} pairs, samples {sample_times}")
        return config

    def validate(self) -> SequenceReport:
        """Strict check used before any experiment runs."""
        return validate_sequences(self.sequences, self.couplings.c1, self.couplings.c2, self.sequence_tolerance)

    def build_lattice(self) -> LatticeModel:
        return LatticeModel(self.dimension, self.sites_per_axis, self.spacing,
                            self.potentials["V1"], self.potentials["V2"], self.potentials["V12"])

    def build_orbitals(self, lattice: LatticeModel) -> Tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        result = []
        for name in ("u", "v"):
            spec = dict(self.orbitals.get(name, {}))
            kind = spec.pop("kind", "gaussian")
            try:
                result.append(make_orbital(lattice, kind, rng=rng, **spec))
            except ConfigError as e:
                suffix = (e.key or "orbitals")[len("orbitals"):]
                raise ConfigError(e.reason, key=f"orbitals.{name}{suffix}") from e
            except (TypeError, ValueError) as e:
                raise ConfigError(str(e), key=f"orbitals.{name}") from e
        return result[0], result[1]

    def cutoffs_for(self, n1: float, n2: float) -> Tuple[int, int]:
        if self.cutoffs is not None:
            return self.cutoffs
        return (coherent_cutoff(n1, self.cutoff_margin_scale), coherent_cutoff(n2, self.cutoff_margin_scale))

    def to_dict(self) -> Dict[str, Any]:
        """Echo of the effective configuration (defaults merged in)."""
        return copy.deepcopy(self.raw)
