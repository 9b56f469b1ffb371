"""Exception types shared across the package."""


class NotFound(KeyError):
    """Unknown parameter set or artifact."""


class RangeError(ValueError):
    """Index, digit, or step count outside its permitted range."""


class FormatError(ValueError):
    """Malformed serialized data (signatures, corpus files, stage artifacts)."""


class TooLarge(ValueError):
    """Exhaustive enumeration requested beyond the supported scale."""


class EmptyReport(LookupError):
    """No compromised instance available to rank."""


class NotCompromised(Exception):
    """A WOTS+ observation group does not expose a usable instance.

    ``reason`` is one of ``"single-observation"``, ``"no-collision"``,
    ``"corrupt-group"``, ``"no-reference"``.
    """

    def __init__(self, reason, detail=""):
        super().__init__(f"{reason}: {detail}" if detail else reason)
        self.reason = reason
        self.detail = detail


class BudgetExceeded(RuntimeError):
    """A randomized search used up its attempt budget without success."""

    def __init__(self, attempts, expected=None):
        msg = f"no success after {attempts} attempts"
        if expected is not None:
            msg += f" (expected ~{expected:.1f})"
        super().__init__(msg)
        self.attempts = attempts
        self.expected = expected
