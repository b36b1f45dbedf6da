"""Exception hierarchy shared by the whole toolkit.

The CLI maps these onto exit codes: ValidationError -> 1, everything else
(format/engine/OS failures) -> 2.
"""


class HarnessError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(HarnessError):
    """Bad arguments, mismatched shapes/manifests, violated invariants."""


class UnsupportedFormatError(HarnessError):
    """File layout outside the supported PNG subset."""


class EngineError(HarnessError):
    """An external SR engine misbehaved (exit code, timeout, bad outputs)."""
