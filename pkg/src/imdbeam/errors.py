"""Exception types shared across the simulator modules."""


class GridRangeError(ValueError):
    """A frequency index falls outside what the grid can represent."""


class GridMismatchError(ValueError):
    """Operands live on different frequency grids or sweep grids."""


class AliasingError(ValueError):
    """Sampling too slow for the highest representable line."""


class LeakageError(ValueError):
    """Waveform does not span an integer number of fundamental periods."""


class MissingLineError(LookupError):
    """Requested line is absent from every antenna spectrum."""


class DegenerateFrequencyPlanError(ValueError):
    """Tone plan puts a distortion product at zero frequency."""


class ConfigError(ValueError):
    """Scenario configuration rejected; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")
