class DomainError(ValueError):
    """An input lies outside the admissible domain of an operation.

    The CLI maps this to exit code 1; argument/usage problems exit 2.
    """
