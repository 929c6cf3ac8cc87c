"""End-to-end runs: config in, moment fields and effort reports out."""

import os

from .config import build_from_config, parse_config
from .interface import run_method
from .output import write_outputs


def run_config(cfg, config_dir=None, overrides=None):
    """Run one configured sweep and write its outputs.

    overrides maps option names (method, workers, out_dir) to replacement
    values; None entries are ignored. Returns (problem, grid, result, paths).
    """
    problem, grid, options = build_from_config(cfg, config_dir)
    if overrides:
        for key, val in overrides.items():
            if val is not None:
                options[key] = val
    result = run_method(problem, grid,
                        method=options["method"],
                        tol=options["tol"],
                        max_iter=options["max_iter"],
                        workers=options["workers"],
                        basis_cap_mb=options["basis_cap_mb"])
    paths = write_outputs(options["out_dir"], cfg, problem, grid, result,
                          timing_in_csv=options["timing_in_csv"])
    return problem, grid, result, paths


def run_file(path, overrides=None):
    """Parse a config file, run it, and write outputs next to out_dir."""
    cfg = parse_config(path)
    config_dir = os.path.dirname(os.path.abspath(path))
    return run_config(cfg, config_dir=config_dir, overrides=overrides)
