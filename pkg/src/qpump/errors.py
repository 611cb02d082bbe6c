"""Exception types shared across the package.

Each error names the violated precondition or invariant.  The CLI maps
these onto distinct exit codes, so library code should raise the most
specific class that applies.
"""

from __future__ import annotations


class PumpError(Exception):
    """Base class for all package-specific errors."""


class NonUnitary(PumpError):
    """A scattering matrix failed a unitarity (or Hermitization) check."""


class StencilOutOfDomain(PumpError):
    """A finite-difference stencil would need data below the band bottom E = 0."""


class ZeroTemperature(PumpError):
    """Operation requires T > 0 (entropy and thermal-noise currents)."""


class PhaseUnwrapFailure(PumpError):
    """Adjacent phase samples differ by >= pi; continuation is ambiguous."""


class GridTooCoarse(PumpError):
    """Discrete samples are too sparse for a reliable geometric quantity."""


class NonPulseCycle(PumpError):
    """Operation requires a pulse cycle (scatterer settles outside a window)."""


class EnergyAtBandEdge(PumpError):
    """Energy coincides with a potential plateau; local wavenumber vanishes."""


class MaxEventsExceeded(PumpError):
    """An internal iteration cap was exceeded."""


class RegionTouchesDiscontinuity(PumpError):
    """A phase-space region straddles a scattering-map discontinuity."""


class SchemaError(PumpError):
    """A run configuration failed validation.

    `path` locates the offending entry, e.g. ``model.delta``.
    """

    def __init__(self, message: str, path: str = ""):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
