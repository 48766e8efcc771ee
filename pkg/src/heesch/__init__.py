"""Heesch numbers of polyominoes, polyhexes and polyiamonds via SAT."""
from .cnf import Budget, CnfFormula, SolveSession, SolveStatus, solve
from .encoder import HOLE_FREE, HOLES_ALLOWED, Witness, build_formula, corona_transforms
from .engine import (DEFAULT_CUTOFF, EngineOptions, HeeschResult, Status, compute_h_c,
                     compute_h_h, find_holes, heesch_numbers, validate_witness)
from .lattice import IDENTITY, GridKind, Transform
from .polyform import Shape, enumerate_free, parse_shape, place

__version__ = "0.1.0"

__all__ = [
    "Budget", "CnfFormula", "SolveSession", "SolveStatus", "solve",
    "HOLE_FREE", "HOLES_ALLOWED", "Witness", "build_formula", "corona_transforms",
    "DEFAULT_CUTOFF", "EngineOptions", "HeeschResult", "Status", "compute_h_c", "compute_h_h",
    "find_holes", "heesch_numbers", "validate_witness",
    "IDENTITY", "GridKind", "Transform", "Shape", "enumerate_free", "parse_shape", "place",
]
