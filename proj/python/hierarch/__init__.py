"""Turing machines, prenex arithmetic, moving markers and group homology."""

from ._hierarch import (
    HierarchError,
    __version__,
    amalgam,
    betti_one,
    bounded_eval,
    brute_force_min_n,
    busy_beaver,
    canonical_form,
    census,
    classify,
    cli,
    pair,
    presentation,
    run_machine,
    run_markers,
    run_oracle_machine,
    smith_normal_form,
    staged_betti,
    suspension,
    unpair,
)

__all__ = [
    "HierarchError",
    "__version__",
    "amalgam",
    "betti_one",
    "bounded_eval",
    "brute_force_min_n",
    "busy_beaver",
    "canonical_form",
    "census",
    "classify",
    "cli",
    "pair",
    "presentation",
    "run_machine",
    "run_markers",
    "run_oracle_machine",
    "smith_normal_form",
    "staged_betti",
    "suspension",
    "unpair",
]
