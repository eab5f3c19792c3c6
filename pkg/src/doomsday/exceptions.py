"""Exception hierarchy. Each class carries the CLI exit code for its stage."""


class DoomsdayError(Exception):
    exit_code = 1


class ConfigError(DoomsdayError, ValueError):
    exit_code = 3


class GraphError(DoomsdayError, ValueError):
    exit_code = 4


class RuleSetError(DoomsdayError, ValueError):
    exit_code = 5


class ScenarioSpaceError(DoomsdayError, ValueError):
    exit_code = 6


class EmptyBinError(DoomsdayError):
    """No scenario survived binning; loosen epsilon."""

    exit_code = 7


class AttackError(DoomsdayError, ValueError):
    exit_code = 8


class CouplingError(AttackError):
    exit_code = 8


class MetricError(DoomsdayError, ValueError):
    exit_code = 9
