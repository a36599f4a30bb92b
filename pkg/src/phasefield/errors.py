"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A configuration invariant was violated.

    ``invariant`` names the violated rule so callers (and the CLI) can
    report it verbatim.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"[{invariant}] {message}")
        self.invariant = invariant


class DegenerateFieldError(ArithmeticError):
    """The weighted interface integral vanished; the interface is gone."""


class ProfileSolveError(RuntimeError):
    """The boundary-value solve for a correction profile failed."""
