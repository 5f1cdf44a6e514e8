"""Error types raised across bridgeopt.

Every error the command line can report carries an ``exit_code`` and a
``detail`` message, so the entry point can translate it without knowing
where it came from.
"""

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_IO = 3
EXIT_INCOMPLETE = 4


class BridgeOptError(Exception):
    """Base class for errors that map onto a process exit code."""

    exit_code = 1

    def __init__(self, detail, exit_code=None):
        super().__init__(detail)
        self.detail = detail
        if exit_code is not None:
            self.exit_code = exit_code


class ConfigError(BridgeOptError):
    """A flag, config file entry or table value is out of range."""

    exit_code = EXIT_CONFIG


class IoError(BridgeOptError):
    """A file could not be read or written."""

    exit_code = EXIT_IO


class IncompleteData(BridgeOptError):
    """An experiment directory is missing run logs or best genomes."""

    exit_code = EXIT_INCOMPLETE


class InvalidGenome(BridgeOptError):
    """A genome file has the wrong length or out-of-domain genes."""

    exit_code = EXIT_CONFIG


class DomainError(ValueError):
    """Fitness inputs outside their mathematical domain (evaluator bug)."""


class DimensionMismatch(ValueError):
    """Candidate and fitness arrays disagree in length or dimension."""


class EmptySample(ValueError):
    """A statistical test received an empty sample."""


class InvalidGeometry(RuntimeError):
    """Decode produced anchorages out of order (decode-rule bug)."""


class AnalysisSingular(RuntimeError):
    """The constrained stiffness matrix could not be factorized."""
