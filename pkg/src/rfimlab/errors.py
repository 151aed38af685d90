"""Error taxonomy shared across modules (drives the CLI exit codes)."""


class ConfigError(ValueError):
    """Bad configuration or command usage (exit code 1)."""


class DomainError(ValueError):
    """Arguments outside an operation's stated domain (exit code 1)."""


class SizeCapError(ValueError):
    """An enumeration or exactness cap was exceeded (exit code 1)."""


class PreconditionError(ValueError):
    """Structured input violates a documented precondition (exit code 1)."""


class OnCurveError(DomainError):
    """A probe point sits on the curve being queried (exit code 1)."""


class ValidationViolation(RuntimeError):
    """An invariant or validator failed on real data (exit code 2)."""
