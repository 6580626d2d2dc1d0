"""Exception types shared across the package."""


class InvariantError(RuntimeError):
    """An internal contract was violated (symmetry, PSD, trace, determinism)."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or produced non-finite output."""
