"""Exception types shared across the package."""


class RewevalError(Exception):
    """Base class for all reweval errors."""


class EmptySnapshotError(RewevalError):
    """No interaction event qualifies for the requested snapshot time."""


class UnknownUserError(RewevalError):
    """The user is not present in the snapshot."""


class UnknownItemError(RewevalError):
    """The item is not present in the snapshot."""


class ItemNotInProfileError(RewevalError):
    """The item is not part of the given user profile."""


class SupportMismatchError(RewevalError):
    """Some target-support items have zero current marginal probability.

    Carries the offending item identifiers in ``items`` (sorted).
    """

    def __init__(self, items):
        self.items = tuple(sorted(items))
        super().__init__(
            "target support items with zero current marginal: "
            + ", ".join(self.items)
        )


class NoProgressError(RewevalError):
    """The optimizer could not find a decreasing step on its first iteration."""


class InfeasibleConfigError(RewevalError):
    """A generator configuration cannot be satisfied."""


class DataFileError(RewevalError):
    """A data file is missing or malformed; names the file and line."""

    def __init__(self, path, message, line=None):
        self.path = str(path)
        self.line = line
        where = self.path if line is None else f"{self.path}, line {line}"
        super().__init__(f"{where}: {message}")
