class DomainError(ValueError):
    """argument outside the domain of an operation"""


class NumericError(ArithmeticError):
    """
    numerical evaluation failed (iteration cap, quadrature failure, result out of range)
    diagnostics holds whatever partial information the failing routine had
    """

    def __init__(self, message: str, **diagnostics):
        self.diagnostics = diagnostics
        if diagnostics:
            message = f"{message} " + " ".join(f"{k}={v}" for k, v in diagnostics.items())
        super().__init__(message)


def require(condition: bool, message: str):
    if not condition:
        raise DomainError(message)
