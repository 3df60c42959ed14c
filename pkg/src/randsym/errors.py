"""Exception types shared across the package."""


class DimensionError(ValueError):
    """Shapes of matrices or vectors do not line up."""


class ContractViolation(ValueError):
    """A classifier was called outside the regime where its notion is defined."""


class GuardError(ValueError):
    """An exhaustive computation would exceed its enumeration guard."""


class CapabilityError(RuntimeError):
    """The exact route cannot handle this input; use Monte Carlo instead."""
