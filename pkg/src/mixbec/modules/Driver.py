#!/usr/bin/env python3
# Driver.py
# Author: John Akujobi
# Date: 2026-10-19
# Version: 1.0
"""
Command-line driver for mixbec.

    mixbec <hartree|exact|coherent|converge|validate> --config run.json [--out DIR]
           [--seed N] [--threads N] [--quiet] [--log-dir DIR]

Exit codes: 0 success, 2 invalid configuration, 3 numerical failure,
4 I/O failure, 1 anything unexpected.
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence

from prettytable import PrettyTable

from .Errors import MixbecError
from .FileHandler import FileHandler
from .Harness import (ConvergenceRecord, RateFit, emit_report, fit_rate, run_coherent_experiment,
                      run_fixed_sector_experiment, summary_table)
from .Hartree import HartreeState, HartreeTrajectory, evolve, write_trajectory
from .Logger import Logger, logger
from .RunConfig import RunConfig

COMMANDS = ("hartree", "exact", "coherent", "converge", "validate")


class ExperimentDriver:
    """
    Loads one configuration and runs a single CLI command against it.

    Args:
        config_path: JSON run configuration; None runs the defaults.
        out_dir: overrides `output.directory`.
        seed: overrides `seed`.
        threads: overrides `threads`.
        log: logger instance to use (the shared one by default).
    """

    def __init__(self, config_path: Optional[str] = None, out_dir: Optional[str] = None,
                 seed: Optional[int] = None, threads: Optional[int] = None, log: Optional[Logger] = None):
        self.logger = log if log is not None else logger
        self.file_handler = FileHandler()
        user: Dict[str, Any] = {}
        if config_path is not None:
            user = self.file_handler.read_json(config_path)
            self.logger.info(f"Configuration read from {config_path}")
        overrides: Dict[str, Any] = {}
        if out_dir is not None:
            overrides.setdefault("output", dict(user.get("output", {})))["directory"] = out_dir
        if seed is not None:
            overrides["seed"] = seed
        if threads is not None:
            overrides["threads"] = threads
        self.config = RunConfig.from_dict({**user, **overrides})
        self.records: List[ConvergenceRecord] = []
        self.fits: List[RateFit] = []

    @property
    def out_dir(self) -> str:
        return str(self.config.output["directory"])

    def _output_path(self, key: str) -> str:
        return str(Path(self.out_dir) / self.config.output[key])

    def run_validate(self) -> None:
        """Configuration and sequence checks only; prints the per-pair deviations."""
        report = self.config.validate()
        table = PrettyTable(["N1", "N2", "|N1/N - c1|", "|N2/N - c2|"])
        for (n1, n2), (d1, d2) in zip(report.pairs, report.deviations):
            table.add_row([n1, n2, f"{d1:.3e}", f"{d2:.3e}"])
        print(table)
        bounds = PrettyTable(["ratio", "bound"])
        for name, value in sorted(report.ratio_bounds.items()):
            bounds.add_row([name, f"{value:.6g}"])
        print(bounds)
        self.logger.info(f"Configuration valid: {len(report.pairs)} pairs")

    def run_hartree(self) -> HartreeTrajectory:
        """Integrate the Hartree system to t_final and write the trajectory CSV."""
        config = self.config
        lattice = config.build_lattice()
        u, v = config.build_orbitals(lattice)
        trajectory = evolve(HartreeState(u, v, 0.0), lattice, config.couplings, config.t_final, config.dt,
                            config.stride)
        self.file_handler.ensure_directory(self.out_dir)
        snapshot = self._output_path("trajectory_name") + ".bin" if config.output.get("write_snapshots") else None
        write_trajectory(trajectory, self._output_path("trajectory_name"), self.file_handler, snapshot)
        self.logger.info(f"Hartree run: {len(trajectory.states)} samples, mass drift "
                         f"{trajectory.max_mass_drift():.2e}, energy drift {trajectory.max_energy_drift():.2e}")
        return trajectory

    def run_exact(self) -> List[ConvergenceRecord]:
        self.records = run_fixed_sector_experiment(self.config)
        return self._finish()

    def run_coherent(self) -> List[ConvergenceRecord]:
        self.records = run_coherent_experiment(self.config)
        return self._finish()

    def run_converge(self) -> List[ConvergenceRecord]:
        """Sweep the configured experiment, then fit the rate at every sample time."""
        if self.config.experiment == "coherent":
            return self.run_coherent()
        return self.run_exact()

    def _finish(self) -> List[ConvergenceRecord]:
        times = sorted({r.t for r in self.records})
        self.fits = [fit_rate(self.records, t) for t in times]
        for fit in self.fits:
            if fit.ok:
                self.logger.info(f"t = {fit.t:g}: slope {fit.slope:.3f} (residual {fit.residual:.2e})")
            else:
                self.logger.info(f"t = {fit.t:g}: no fit ({fit.reason})")
        emit_report(self.records, self.fits, self.out_dir, self.config, self.config.output["csv_name"],
                    self.config.output["summary_name"], self.file_handler)
        print(summary_table(self.records))
        return self.records

    def run(self, command: str) -> None:
        if command not in COMMANDS:
            raise ValueError(f"unknown command '{command}'")
        getattr(self, f"run_{command}")()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mixbec",
                                     description="Mean-field convergence experiments for two-species Bose mixtures")
    parser.add_argument("command", choices=COMMANDS, help="what to run")
    parser.add_argument("-c", "--config", help="JSON run configuration (defaults used when omitted)")
    parser.add_argument("-o", "--out", help="output directory, overrides output.directory")
    parser.add_argument("--seed", type=int, help="random seed, overrides seed")
    parser.add_argument("--threads", type=int, help="worker threads, overrides threads")
    parser.add_argument("-q", "--quiet", action="store_true", help="console output at WARNING and above")
    parser.add_argument("--log-dir", help="also write a log file into this directory")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.quiet:
        logger.set_level(logging.WARNING, "console")
    if args.log_dir:
        logger.attach_file(args.log_dir)
    try:
        driver = ExperimentDriver(args.config, args.out, args.seed, args.threads)
        if not args.quiet:
            logger.set_level(getattr(logging, driver.config.log_level.upper(), logging.INFO), "console")
        if driver.config.log_directory and not args.log_dir:
            logger.attach_file(driver.config.log_directory)
        driver.run(args.command)
    except MixbecError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return e.exit_code
    except Exception as e:
        logger.exception(f"Unexpected failure: {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
