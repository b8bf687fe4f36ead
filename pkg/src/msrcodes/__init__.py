"""Explicit MSR array codes: encode, erasure decode and bandwidth-optimal
single-node repair for two constructions (variant A, optimal access with
ell = s^(n/s); variant B with ell = s^(n/(s+1)))."""

from .construction import CodeParams, CodeProfile
from .gf import FieldContext

__all__ = ["CodeParams", "CodeProfile", "FieldContext"]
__version__ = "0.1.0"
