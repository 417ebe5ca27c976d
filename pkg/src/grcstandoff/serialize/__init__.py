"""Standoff serialization: verbose PAULA XML and compact LAULA XML."""

from .laula import read_laula, write_laula
from .paula import read_paula, write_paula

__all__ = ["read_paula", "write_paula", "read_laula", "write_laula"]
