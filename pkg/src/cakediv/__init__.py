"""Exact proportional cake cutting with unequal entitlements.

Exact numbers live in :mod:`cakediv.exact`, servings and measures in
:mod:`cakediv.kitchen`, records in :mod:`cakediv.records`, entitlement
indices and bounds in :mod:`cakediv.indices`, the deficiency test in
:mod:`cakediv.deficiency`, the deficiency-keeping adversary in
:mod:`cakediv.adversary`, mediators in :mod:`cakediv.protocols` and the games
in :mod:`cakediv.arena`.
"""

from .exact import Scalar
from .indices import EntitlementProfile, compute_indices
from .kitchen import KitchenMeasure, Query, Serving
from .records import PartitionRecord

__version__ = "0.1.0"

__all__ = ["EntitlementProfile", "KitchenMeasure", "PartitionRecord", "Query", "Scalar",
           "Serving", "compute_indices"]
