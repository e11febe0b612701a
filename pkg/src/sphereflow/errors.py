"""Exception types shared across the toolkit.

The CLI maps these onto exit codes: OSError -> 2, ShapeError/FormatError -> 3,
EmptyInputError -> 4.
"""


class ShapeError(ValueError):
    """Array dimensions violate a contract (e.g. equirect width != 2*height)."""


class FormatError(ValueError):
    """A file is malformed: bad magic, truncated payload, bogus header."""


class EmptyInputError(ValueError):
    """An operation received an empty corpus, mask, or dataset."""
