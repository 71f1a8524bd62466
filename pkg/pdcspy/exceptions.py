class ValidationError(ValueError):
    pass


class GridMismatch(ValidationError):
    pass


class NotHermitian(ValidationError):
    pass


class ConfigError(ValidationError):
    pass


class NumericalError(Exception):
    pass


class BlowUpError(NumericalError):
    def __init__(self, time: float, norm: float):
        super().__init__(f"field norm {norm:.6g} exceeded the blow-up bound at t={time:.6g}")
        self.time = time
        self.norm = norm


class SingularSystemError(NumericalError):
    def __init__(self, omega: float, reason: str = "singular resolvent"):
        super().__init__(f"{reason} at omega={omega!r}")
        self.omega = omega


class NotAFixedPoint(NumericalError):
    pass


class PumpOverlapError(NumericalError):
    pass


class ConvergenceError(NumericalError):
    pass


class DegeneracyWarning(UserWarning):
    pass
