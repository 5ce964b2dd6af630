"""Exception types shared by every module."""


class InputError(ValueError):
    """Malformed or invariant-violating input (CLI exit code 2)."""


class EmptyDomainError(InputError):
    """An operation needs more points than the space has."""


class GenerationError(InputError):
    """Generator parameters cannot produce a valid instance."""


class InconsistencyError(RuntimeError):
    """Two routes that must agree did not, or a witness failed its own check.

    Always a bug; the CLI maps it to exit code 3.
    """
