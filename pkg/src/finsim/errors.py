"""Exception hierarchy shared by the simulation modules and the CLI."""


class FinsimError(Exception):
    """Base class for all errors raised by finsim."""


class ConfigError(FinsimError, ValueError):
    """Invalid configuration: parse failure, unknown key or violated invariant."""


class SimulationError(FinsimError):
    """Numerical failure during a simulation (non-finite state, bad grid, ...)."""

    def __init__(self, message, time=None):
        if time is not None:
            message = f"{message} (t={time:.9g} s)"
        super().__init__(message)
        self.time = time


class UnreachableConfiguration(SimulationError):
    """The wheel angles admit no collinear rod/reel configuration."""

    def __init__(self, theta1, theta2, ratio, time=None):
        super().__init__(
            f"unreachable configuration: theta1={theta1:.9g} rad, theta2={theta2:.9g} rad, "
            f"C/sqrt(A^2+B^2)={ratio:.9g}",
            time,
        )
        self.theta1 = theta1
        self.theta2 = theta2
        self.ratio = ratio


class TransmissionSingularity(SimulationError):
    """The rod is (nearly) parallel to the reel crank, so the reel rate is undefined."""


class OutputError(FinsimError, OSError):
    """Writing results failed; the message names the path."""
