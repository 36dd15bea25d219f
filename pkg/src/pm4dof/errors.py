"""Exception hierarchy shared by the kinematics, control and simulation code."""


class KinematicsError(Exception):
    pass


class DegeneratePose(KinematicsError):
    """Central limb length is zero (platform origin at the base origin)."""


class UnreachablePose(KinematicsError):
    """An external leg collapses to (near) zero length."""


class UJointSingular(KinematicsError):
    """Leg direction aligned with the first U-joint axis; azimuth undefined."""


class NonConvergence(KinematicsError):
    def __init__(self, message, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class SingularJacobian(NonConvergence):
    """Newton step aborted because the Jacobian condition estimate blew up."""


class UnreachableReference(Exception):
    def __init__(self, message, tick, time):
        super().__init__(message)
        self.tick = tick
        self.time = time


class DegenerateSignal(ValueError):
    pass


class EmptyLog(ValueError):
    pass


class ConfigError(ValueError):
    pass
