"""Exception hierarchy shared by every xiflow module."""


class XiFlowError(Exception):
    """Base class of all errors raised by xiflow."""


class DomainError(XiFlowError, ValueError):
    """An argument lies outside the region where an operation is defined."""


class PoleError(DomainError):
    """Evaluation requested at a pole (Gamma at 0, -1, ..., zeta at 1)."""


class SingularityError(DomainError):
    """A formula divides by a zero of xi or by q - rho_n."""


class DegenerateZeroError(DomainError):
    """xi'(rho) vanishes to working precision, so no finite period exists."""


class ConvergenceError(XiFlowError, RuntimeError):
    """An iterative method did not reach its tolerance."""


class StepSizeUnderflow(ConvergenceError):
    """The adaptive integrator needed a step below its minimum step."""


class SeparatrixSingularity(ConvergenceError):
    """A Newton-flow trajectory reached the set where xi' vanishes."""


class NoReturnError(ConvergenceError):
    """No return to the Poincare section was found in the allotted time."""


class FormatError(XiFlowError, ValueError):
    """A catalogue file is malformed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
