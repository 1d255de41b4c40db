"""Exception hierarchy shared across the toolkit.

ValidationError maps to CLI exit code 1, DataIntegrityError (and its
subclasses) to exit code 2.
"""


class ValidationError(Exception):
    """Bad input: malformed config, missing file, out-of-range field."""


class DataIntegrityError(Exception):
    """Input parsed but contradicts an invariant (e.g. burns exceed mints)."""


class DecodeError(DataIntegrityError):
    """An on-chain record could not be decoded; carries provenance."""

    def __init__(self, message: str, tx_hash: str = "", log_index: int | None = None):
        detail = message
        if tx_hash:
            detail += f" (tx {tx_hash}"
            if log_index is not None:
                detail += f", log {log_index}"
            detail += ")"
        super().__init__(detail)
        self.tx_hash = tx_hash
        self.log_index = log_index
