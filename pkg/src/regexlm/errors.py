"""Exception hierarchy shared across the engine."""


class EngineError(Exception):
    """Base class for all errors raised by this package."""


class ResourceLimitError(EngineError):
    """A construction exceeded its configured state or edge cap."""

    def __init__(self, what: str, limit: int) -> None:
        super().__init__(f"{what} exceeded configured cap of {limit}")
        self.what = what
        self.limit = limit
