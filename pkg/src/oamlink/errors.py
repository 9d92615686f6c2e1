"""Exception hierarchy.

Every error raised on purpose by the package derives from ``OamLinkError``.
``ConfigError`` marks bad user input, ``NumericalError`` marks a broken
numerical precondition (sampling, band limit, degenerate link, ...); the CLI
maps the two families to distinct exit codes.
"""

from __future__ import annotations


class OamLinkError(Exception):
    """Base class for package errors."""


class ConfigError(OamLinkError, ValueError):
    """Invalid scenario configuration.

    Parameters
    ----------
    key : str
        Dotted ``section.option`` name of the offending entry.
    message : str
        Human readable reason.
    """

    def __init__(self, key: str, message: str):
        self.key = key
        super().__init__(f"{key}: {message}")


class NumericalError(OamLinkError, ValueError):
    """A numerical contract of an operation was violated."""


class DomainError(NumericalError):
    """Argument outside the supported domain."""


class DegenerateRingError(NumericalError):
    """Mode 0 has no ring radius; it is a single center element."""


class AliasingError(NumericalError):
    """OAM mode cannot be represented by the number of ring elements."""


class NoRealPeakError(NumericalError):
    """Pattern maximum lies outside the visible region."""


class UndersamplingError(NumericalError):
    """Sampling pitch too coarse for the requested quantity."""


class GeometryError(NumericalError):
    """Grids or probe positions are inconsistent."""


class PropagationError(NumericalError):
    """Angular-spectrum band limit would discard too much energy."""


class UndefinedChargeError(NumericalError):
    """Field amplitude too small on the loop to define a winding number."""


class DegenerateLinkError(NumericalError):
    """Coupling matrix has a vanishing intended-path entry."""
