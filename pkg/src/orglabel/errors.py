"""Exception types shared across the pipeline."""


class OrgLabelError(Exception):
    """Base class for errors raised by this package."""


class DataFormatError(OrgLabelError):
    """An input file is unreadable or violates its declared format."""


class TrainingDivergedError(OrgLabelError):
    """Training produced a non-finite loss and was aborted."""
