#!/usr/bin/env python3
# Harness.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
End-to-end experiments: Hartree orbit + many-body runs over (N1, N2) pairs,
trace distances against the Hartree projector, rate fits and reports.

Two pipelines:
- fixed sector: ψ = u^{⊗N1} ⊗ v^{⊗N2}, one sector propagated exactly.
- coherent:     ψ = W(√N1 u, √N2 v)ω truncated at the Fock cutoffs,
                every sector propagated, fluctuation moments and bound terms
                recorded alongside the distance.
"""

import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from prettytable import PrettyTable
import scipy

from .Dynamics import (FluctuationMoments, HamiltonianCache, assemble_sector_hamiltonian, fluctuation_moments,
                       propagate_coherent, propagate_sector)
from .Errors import SectorTooLargeError
from .FileHandler import FileHandler
from .FockSpace import TruncatedFockState, coherent_state, product_state
from .Hartree import HartreeState, energy, hartree_orbit, mass
from .Lattice import LatticeModel
from .Logger import logger
from .ReducedDensity import (BoundBreakdown, condensate_fractions, hartree_projector, part1_bound_terms,
                             reduced_density_fock, reduced_density_sector, trace_distance)
from .RunConfig import RunConfig

TIME_MATCH = 1e-9

# One mass_drift column: the larger of the two species' |h^d Σ|u|² - 1| at that time.
# wall_time stays off the CSV so reruns are byte-identical; emit_report logs it at DEBUG.
CSV_COLUMNS = ("experiment", "N1", "N2", "t", "trace_distance", "p_sum", "m10", "m01", "m11",
               "mass_drift", "energy_drift", "truncation_deficit")


@dataclass
class ConvergenceRecord:
    """One (pair, sample time) measurement."""
    experiment: str
    N1: float
    N2: float
    t: float
    trace_distance: float
    p_sum: float
    m10: float
    m01: float
    m11: float
    mass_drift: float  # max over both species
    energy_drift: float
    truncation_deficit: float
    wall_time: float = 0.0
    bounds: Optional[BoundBreakdown] = field(default=None, repr=False)
    truncation_slack: float = 0.0
    condensate_fractions: Tuple[float, float] = (1.0, 1.0)
    flagged: bool = False

    def row(self) -> Tuple[Any, ...]:
        return tuple(getattr(self, name) for name in CSV_COLUMNS)

    def sort_key(self) -> Tuple[str, float, float, float]:
        return (self.experiment, self.N1, self.N2, self.t)

    @property
    def bound_satisfied(self) -> bool:
        """distance <= Σp_j + truncation slack."""
        return self.trace_distance <= self.p_sum + self.truncation_slack + 1e-12


@dataclass
class RateFit:
    """Least-squares fit of log(distance) against log(N) at one time."""
    t: float
    slope: float = float("nan")
    intercept: float = float("nan")
    residual: float = float("nan")
    points: List[Tuple[float, float]] = field(default_factory=list)
    reason: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.reason is None

    def to_dict(self) -> Dict[str, Any]:
        return {"t": self.t, "slope": self.slope, "intercept": self.intercept, "residual": self.residual,
                "points": [list(p) for p in self.points], "ok": self.ok, "reason": self.reason}


@dataclass
class EnvelopeCheck:
    """distance <= slack·C e^{γt}(1/√N1 + 1/√N2), (C, γ) calibrated at the smallest N."""
    C: float
    gamma: float
    calibration: Tuple[float, float]
    violations: List[Tuple[float, float, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_dict(self) -> Dict[str, Any]:
        return {"C": self.C, "gamma": self.gamma, "calibration": list(self.calibration),
                "violations": [list(v) for v in self.violations], "passed": self.passed}


def _rate(n1: float, n2: float) -> float:
    return 1.0 / math.sqrt(n1) + 1.0 / math.sqrt(n2)


class ExperimentContext:
    """Lattice, orbitals and Hartree orbit shared by every pair of one run."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.lattice: LatticeModel = config.build_lattice()
        self.u, self.v = config.build_orbitals(self.lattice)
        self.times = sorted(set(config.sample_times)) or [0.0]
        initial = HartreeState(self.u, self.v, 0.0)
        self.orbit = hartree_orbit(initial, self.lattice, config.couplings, self.times, config.dt)
        couplings = config.couplings
        e0 = energy(initial, self.lattice, couplings)
        self.mass_drift = [max(abs(m - 1.0) for m in mass(s, self.lattice)) for s in self.orbit]
        self.energy_drift = [abs(energy(s, self.lattice, couplings) - e0) for s in self.orbit]
        logger.info(f"Hartree orbit ready on {self.lattice} at t = {self.times}")


def _sector_record(ctx: ExperimentContext, k: int, N1: int, N2: int, state, wall: float) -> ConvergenceRecord:
    h_d = ctx.lattice.cell_volume
    orbit = ctx.orbit[k]
    gamma = reduced_density_sector(state, h_d)
    distance = trace_distance(gamma, hartree_projector(orbit.u, orbit.v, h_d))
    fock = TruncatedFockState.from_sector(state)
    moments = fluctuation_moments(fock, orbit.u, orbit.v, N1, N2, h_d)
    bounds = part1_bound_terms(moments, N1, N2, distance)
    return ConvergenceRecord("exact", N1, N2, orbit.t, distance, bounds.total, moments.m10, moments.m01,
                             moments.m11, ctx.mass_drift[k], ctx.energy_drift[k], 0.0, wall, bounds,
                             condensate_fractions=condensate_fractions(gamma))


def run_fixed_sector_pair(ctx: ExperimentContext, N1: int, N2: int) -> List[ConvergenceRecord]:
    """Product state u^{⊗N1} ⊗ v^{⊗N2} propagated through every sample time."""
    config = ctx.config
    start = time.perf_counter()
    try:
        H = assemble_sector_hamiltonian(ctx.lattice, N1, N2, N1, N2, config.propagator.max_sector_dim)
    except SectorTooLargeError as e:
        logger.warning(f"Skipping pair ({N1}, {N2}): {e}")
        return []
    state = product_state(ctx.u, ctx.v, N1, N2, ctx.lattice.cell_volume)
    records = []
    for k, t in enumerate(ctx.times):
        state = propagate_sector(state, H, max(t - state.t, 0.0), config.propagator)
        records.append(_sector_record(ctx, k, N1, N2, state, time.perf_counter() - start))
    logger.info(f"Pair ({N1}, {N2}): sector dim {H.dimension}, final distance {records[-1].trace_distance:.4e}")
    return records


def run_fixed_sector_experiment(config: RunConfig, threads: Optional[int] = None) -> List[ConvergenceRecord]:
    """
    For every (N1, N2): evolve the product state exactly and compare its γ with
    the Hartree projector at each sample time. Pairs run in parallel.

    Args:
        config: Validated run configuration
        threads: Overrides config.threads for the pair pool

    Returns:
        List[ConvergenceRecord]: One record per (pair, sample time), sorted; pairs whose
        sector exceeds the size limit are skipped with a warning

    Raises:
        SequenceConditionError: a pair violates the sequence condition.
    """
    config.validate()
    ctx = ExperimentContext(config)
    threads = threads or config.threads
    pairs = [(int(a), int(b)) for a, b in config.sequences]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            chunks = list(pool.map(lambda p: run_fixed_sector_pair(ctx, *p), pairs))
    else:
        chunks = [run_fixed_sector_pair(ctx, *p) for p in pairs]
    records = [r for chunk in chunks for r in chunk]
    return sorted(records, key=ConvergenceRecord.sort_key)


def run_coherent_pair(ctx: ExperimentContext, N1: float, N2: float, threads: int = 1) -> List[ConvergenceRecord]:
    """Truncated coherent state W(√N1 u, √N2 v)ω propagated through every sample time."""
    config = ctx.config
    h_d = ctx.lattice.cell_volume
    cutoffs = config.cutoffs_for(N1, N2)
    start = time.perf_counter()
    state = coherent_state(math.sqrt(N1) * ctx.u, math.sqrt(N2) * ctx.v, cutoffs, h_d, config.deficit_bound)
    if state.deficit_warning:
        logger.warning(f"Coherent run ({N1}, {N2}) flagged: deficit {state.deficit:.3e} with cutoffs {cutoffs}")
    cache = HamiltonianCache(ctx.lattice, N1, N2, config.propagator.max_sector_dim)
    slack = 10.0 * max(state.deficit, 0.0) * (cutoffs[0] + 1) * (cutoffs[1] + 1)

    records = []
    for k, t in enumerate(ctx.times):
        state = propagate_coherent(state, ctx.lattice, N1, N2, max(t - state.t, 0.0), config.propagator,
                                   threads, cache)
        orbit = ctx.orbit[k]
        gamma = reduced_density_fock(state, h_d, config.normalization, (N1, N2))
        distance = trace_distance(gamma, hartree_projector(orbit.u, orbit.v, h_d))
        moments: FluctuationMoments = fluctuation_moments(state, orbit.u, orbit.v, N1, N2, h_d)
        bounds = part1_bound_terms(moments, N1, N2, distance)
        record = ConvergenceRecord("coherent", N1, N2, orbit.t, distance, bounds.total, moments.m10,
                                   moments.m01, moments.m11, ctx.mass_drift[k], ctx.energy_drift[k],
                                   state.deficit, time.perf_counter() - start, bounds, slack,
                                   condensate_fractions(gamma), state.deficit_warning)
        if not record.bound_satisfied:
            logger.warning(f"Bound chain violated at N=({N1}, {N2}), t={orbit.t}: "
                           f"distance {distance:.4e} > p_sum {bounds.total:.4e} + slack {slack:.1e}")
        records.append(record)
    logger.info(f"Coherent pair ({N1}, {N2}): {len(cache)} sectors, cutoffs {cutoffs}, "
                f"final distance {records[-1].trace_distance:.4e}")
    return records


def run_coherent_experiment(config: RunConfig, threads: Optional[int] = None) -> List[ConvergenceRecord]:
    """
    Coherent-state runs for every pair; sectors of one pair run in parallel.

    Args:
        config: Validated run configuration (cutoffs and deficit bound from its fock section)
        threads: Overrides config.threads for the sector pool

    Returns:
        List[ConvergenceRecord]: Sorted records carrying moments, bound terms and truncation slack
    """
    config.validate()
    ctx = ExperimentContext(config)
    threads = threads or config.threads
    records = []
    for n1, n2 in config.sequences:
        records.extend(run_coherent_pair(ctx, n1, n2, threads))
    return sorted(records, key=ConvergenceRecord.sort_key)


def records_at(records: Sequence[ConvergenceRecord], t: float) -> List[ConvergenceRecord]:
    return [r for r in records if abs(r.t - t) < TIME_MATCH]


def fit_rate(records: Sequence[ConvergenceRecord], t: float) -> RateFit:
    """
    OLS of log(distance) on log(N) over the records at time t with N1 = N2 = N.
    Degenerate input (fewer than two distinct N, a zero distance) gives a
    RateFit with `reason` set instead of numbers.

    Args:
        records: Records of one run, any mix of times
        t: Sample time to fit at

    Returns:
        RateFit: slope, intercept and RMS residual of the log-log fit
    """
    points = sorted((r.N1, r.trace_distance) for r in records_at(records, t) if r.N1 == r.N2)
    fit = RateFit(t, points=[(float(n), float(d)) for n, d in points])
    if len({n for n, _ in points}) < 2:
        fit.reason = "need at least two distinct N"
        return fit
    if any(not d > 0 for _, d in points):
        fit.reason = "distances must be positive"
        return fit
    x = np.log([n for n, _ in points])
    y = np.log([d for _, d in points])
    slope, intercept = np.polyfit(x, y, 1)
    fit.slope, fit.intercept = float(slope), float(intercept)
    fit.residual = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return fit


def envelope_check(records: Sequence[ConvergenceRecord], slack: float = 2.0) -> EnvelopeCheck:
    """
    Calibrate C, γ >= 0 on the smallest-N records (log-linear fit over t, then
    C raised so every calibration point lies on or under the curve), then check
    every larger pair against slack·C e^{γt}(1/√N1 + 1/√N2).

    Args:
        records: Records over several sample times
        slack: Factor applied to the calibrated envelope

    Returns:
        EnvelopeCheck: C, γ, the calibration pair and every (N1, t, distance) above the envelope
    """
    if not records:
        return EnvelopeCheck(0.0, 0.0, (0.0, 0.0))
    smallest = min((r.N1, r.N2) for r in records)
    base = [r for r in records if (r.N1, r.N2) == smallest and r.trace_distance > 0]
    gamma = 0.0
    if len({r.t for r in base}) >= 2:
        t = np.array([r.t for r in base])
        y = np.log([r.trace_distance / _rate(r.N1, r.N2) for r in base])
        gamma = max(float(np.polyfit(t, y, 1)[0]), 0.0)
    C = max((r.trace_distance / (_rate(r.N1, r.N2) * math.exp(gamma * r.t)) for r in base), default=0.0)
    check = EnvelopeCheck(C, gamma, smallest)
    for r in records:
        if (r.N1, r.N2) == smallest:
            continue
        bound = slack * C * math.exp(gamma * r.t) * _rate(r.N1, r.N2)
        if r.trace_distance > bound + 1e-12:
            check.violations.append((r.N1, r.t, r.trace_distance))
    return check


def is_strictly_decreasing(records: Sequence[ConvergenceRecord], t: float) -> bool:
    distances = [d for _, d in sorted((r.N1, r.trace_distance) for r in records_at(records, t))]
    return all(b < a for a, b in zip(distances, distances[1:]))


def fluctuation_growth_ratio(records: Sequence[ConvergenceRecord], t: float) -> float:
    """max m10 / min m10 across the pairs at time t (1 when all vanish)."""
    values = [r.m10 for r in records_at(records, t)]
    if not values:
        return float("nan")
    low, high = min(values), max(values)
    if high <= 1e-12:
        return 1.0
    return high / low if low > 0 else float("inf")


def summary_table(records: Sequence[ConvergenceRecord]) -> PrettyTable:
    table = PrettyTable(["experiment", "N1", "N2", "t", "distance", "p_sum", "m10", "deficit"])
    for r in records:
        table.add_row([r.experiment, r.N1, r.N2, f"{r.t:g}", f"{r.trace_distance:.4e}", f"{r.p_sum:.4e}",
                       f"{r.m10:.4e}", f"{r.truncation_deficit:.1e}"])
    table.align = "r"
    return table


def build_checks(records: Sequence[ConvergenceRecord]) -> Dict[str, Any]:
    """Acceptance-style checks over a record set, keyed by sample time."""
    times = sorted({r.t for r in records})
    checks: Dict[str, Any] = {
        "envelope": envelope_check(records).to_dict(),
        "strictly_decreasing": {repr(t): is_strictly_decreasing(records, t) for t in times},
        "bound_chain": all(r.bound_satisfied for r in records if r.experiment == "coherent"),
        "flagged_runs": sorted({(r.N1, r.N2) for r in records if r.flagged}),
    }
    if any(r.experiment == "coherent" for r in records):
        checks["fluctuation_growth_ratio"] = {repr(t): fluctuation_growth_ratio(records, t) for t in times}
    return checks


def emit_report(records: Sequence[ConvergenceRecord], fits: Sequence[RateFit], destination: str,
                config: Optional[RunConfig] = None, csv_name: str = "records.csv",
                summary_name: str = "summary.json", file_handler: Optional[FileHandler] = None) -> Dict[str, str]:
    """
    Write `records.csv` (CSV_COLUMNS, records sorted) and `summary.json`
    (fits, checks, config echo, versions, seed). Both are byte-identical for
    identical inputs; wall times go to the log only.

    Returns:
        Dict[str, str]: Paths written, keyed "csv" and "summary"

    Raises:
        ReportIOError: the destination cannot be written.
    """
    from .. import __version__

    handler = file_handler or FileHandler()
    handler.ensure_directory(destination)
    ordered = sorted(records, key=ConvergenceRecord.sort_key)
    csv_path = f"{destination}/{csv_name}"
    summary_path = f"{destination}/{summary_name}"
    handler.write_csv(csv_path, CSV_COLUMNS, (r.row() for r in ordered))

    summary = {
        "runs": len({(r.experiment, r.N1, r.N2) for r in ordered}),
        "records": len(ordered),
        "fits": [f.to_dict() for f in fits],
        "checks": build_checks(ordered),
        "versions": {"mixbec": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        "seed": None if config is None else config.seed,
        "config": None if config is None else config.to_dict(),
    }
    handler.write_json(summary_path, summary)
    for r in ordered:
        logger.debug(f"wall time N=({r.N1}, {r.N2}) t={r.t}: {r.wall_time:.3f}s")
    logger.info(f"Report written to {csv_path} and {summary_path}")
    return {"csv": csv_path, "summary": summary_path}
