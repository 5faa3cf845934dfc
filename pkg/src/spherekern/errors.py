"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class KernelStructureError(ValueError):
    """A coefficient tensor violates a structural requirement (symmetry,
    shape, or the block-diagonal form a certification route needs)."""


class KernelSpecError(ValueError):
    """A kernel spec document is malformed.  The message names the field."""

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"kernel spec field '{field}': {message}")


class DivergenceError(ValueError):
    """A coefficient series required by an operation is not summable."""


class SingularGramError(RuntimeError):
    """The Gram matrix is numerically singular.

    Carries the near-null eigenvector, which is itself a degeneracy
    witness candidate for the kernel.
    """

    def __init__(self, message, null_vector=None, min_eigenvalue=None):
        super().__init__(message)
        self.null_vector = null_vector
        self.min_eigenvalue = min_eigenvalue


class ConvergenceError(RuntimeError):
    """An iterative procedure failed to reach its target tolerance."""
