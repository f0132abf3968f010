"""Exception types shared across the package."""


class CrossModalError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CrossModalError):
    """A file does not conform to its declared format."""


class AlignmentError(CrossModalError):
    """Table rows and embedding vectors do not line up."""


class SchemaError(CrossModalError):
    """Column schema is inconsistent with itself or the data."""


class UnknownColumn(CrossModalError):
    """A referenced column does not exist in the dataset."""


class UnknownRowId(CrossModalError):
    """A referenced row id does not exist in the dataset."""


class DegenerateColumn(CrossModalError):
    """A column eligible for corruption has fewer than two distinct values."""


class NoCandidateValue(CrossModalError):
    """The corruption quota cannot be met under the active constraints."""


class DegenerateTarget(CrossModalError):
    """The target column is unusable as a label (non-categorical or < 2 classes)."""


class TooFewRows(CrossModalError):
    """Not enough rows for the requested cross-validation layout."""


class ClassMismatch(CrossModalError):
    """Observed label values are not covered by the provided class set."""


class RowCountMismatch(CrossModalError):
    """An external probability file has a different number of rows than the table."""


class EmptyClass(CrossModalError):
    """A class in the index has no labeled members."""


class DegenerateJoint(CrossModalError):
    """Every row fell below its class thresholds; the joint has no counts."""


class EmptyDirtySet(CrossModalError):
    """Valuation requires at least one potentially dirty tuple."""


class EmptyCleanSet(CrossModalError):
    """Valuation requires at least one clean validation point."""


class TooLarge(CrossModalError):
    """Exhaustive subset enumeration is limited to small inputs."""
