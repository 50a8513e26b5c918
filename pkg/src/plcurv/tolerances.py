"""Numerical tolerances shared by every module."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    geometric: float = 1e-9
    orthonormality: float = 1e-10
    degeneracy: float = 1e-10
    pairing_zero: float = 1e-12
    dedup: float = 1e-9
    # slacks below ``tight`` count as exactly zero; slacks in (tight, geometric]
    # cannot be decided safely and raise NearDegenerate
    tight: float = 1e-11


TOL = Tolerances()
