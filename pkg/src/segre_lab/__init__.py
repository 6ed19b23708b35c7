"""Exact invariants of finite point sets on Segre varieties.

Defect, dependency classes, concision and tensor rank of point sets in
multiprojective spaces over prime fields and the rationals, generators for
families of dependent sets, and an enumeration harness that checks
classification statements over small fields.
"""

from __future__ import annotations

__version__ = "0.1.0"

from .dependence import analyze, classify, defect, is_equally_dependent, tensor_rank
from .exact_linalg import FieldSpec, ScalarMatrix
from .multiproj import MultiprojectiveSpace, PointSet, concision_hull, segre_embed, width

__all__ = [
    "FieldSpec",
    "MultiprojectiveSpace",
    "PointSet",
    "ScalarMatrix",
    "analyze",
    "classify",
    "concision_hull",
    "defect",
    "is_equally_dependent",
    "segre_embed",
    "tensor_rank",
    "width",
]
