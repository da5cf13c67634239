"""Exception hierarchy shared by the library, the service and the CLI.

Two families matter for exit codes and HTTP mapping: configuration/parse
problems (user error, CLI exit 2) and numeric failures at run time
(CLI exit 1).
"""


class ConfigError(ValueError):
    """Bad user input: units, profile specs, config files, invalid combinations."""


class NumericsError(RuntimeError):
    """A computation could not be carried out at the requested fidelity."""


class NonNormalizableProfileError(NumericsError):
    """Spectral profile has zero or divergent energy."""


class GridCoverageError(NumericsError):
    """Frequency grid does not contain the biphoton spectrum (boundary leak)."""


class ResolutionCapError(NumericsError):
    """Required grid resolution exceeds the per-axis sample cap."""


class ShiftSupportError(NumericsError):
    """Requested delay exceeds half the temporal window of the grid."""
