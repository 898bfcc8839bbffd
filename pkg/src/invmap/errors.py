# Copyright 2026 Harald Schilly <info@arjoma.at>, ARJOMA FlexCo.
# SPDX-License-Identifier: Apache-2.0

"""Exception types raised by invmap."""


class InvmapError(ValueError):
    """Base class for all domain errors."""


class MapSpecError(InvmapError):
    """Malformed map spec, map file or config file."""


class OutOfDomain(InvmapError):
    """A point lies outside the map domain beyond the tolerance."""


class UnknownEntry(InvmapError):
    """Gallery lookup for a name that is not in the catalog."""


class RefinementFloor(InvmapError):
    """Boundary tracing hit the source step floor with image gaps above h_loop."""


class TooCloseToBoundary(InvmapError):
    """Query point lies within w_mask of the loop image."""


class NonIntegerWinding(InvmapError):
    """Angle sum is not within 0.1 of an integer multiple of 2*pi."""


class EmptyWindow(InvmapError):
    """The loop image collapsed to a point."""


class TooManyUndefined(InvmapError):
    """More than the allowed fraction of cells was masked out of a quadrature."""


class NoPreimage(InvmapError):
    """No source sample maps into any probed ball.

    ``probe`` carries the all-zero result so callers can still report it.
    """

    def __init__(self, message: str, probe: object = None) -> None:
        super().__init__(message)
        self.probe = probe
