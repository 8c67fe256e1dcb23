"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid interferometer configuration or gain specification."""


class SingularEvaluationError(ArithmeticError):
    """A transfer function was evaluated on a pole, branch point or resonance."""

    def __init__(self, message, s=None):
        super().__init__(message)
        self.s = s


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved_rtol=None, params=None):
        super().__init__(message)
        self.achieved_rtol = achieved_rtol
        self.params = params


class IndeterminateVerdictError(RuntimeError):
    """The Nyquist contour could not be resolved around the critical point."""


class IllPosedFitError(ArithmeticError):
    """Rank-deficient least-squares system inside vector fitting."""

    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class InfeasibleSeedError(ValueError):
    """The initial filter for an optimization run violates a stability check."""

    def __init__(self, message, breakdown=None):
        super().__init__(message)
        self.breakdown = breakdown
