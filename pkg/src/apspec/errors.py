"""Exception and warning types shared across the package."""


class ApspecError(Exception):
    """Base class for all errors raised by apspec."""


class UnknownSystem(ApspecError):
    pass


class InvalidParameter(ApspecError):
    pass


class GroupMismatch(ApspecError):
    """A group element is not valid for the system or grid it is used with."""


class OutOfHorizon(GroupMismatch):
    """A shift would leave the finite backing data of a sampled point."""


class SampleFailure(ApspecError):
    pass


class UnsupportedMethod(ApspecError):
    pass


class EmptyFamily(ApspecError):
    pass


class DomainMismatch(ApspecError):
    pass


class NonRealProfile(ApspecError):
    pass


class MissingZero(ApspecError):
    pass


class WindowTooSmall(ApspecError):
    pass


class UnsupportedGroup(ApspecError):
    pass


class InvalidWindow(ApspecError):
    pass


class SupportOutOfWindow(ApspecError):
    pass


class ConfigInvalid(ApspecError):
    def __init__(self, message, path=()):
        self.path = tuple(path)
        where = "/".join(str(p) for p in self.path) or "<root>"
        super().__init__(f"{where}: {message}")


class SchemaMismatch(ApspecError):
    pass


class SchemaSectionMismatch(ApspecError):
    def __init__(self, sections):
        self.sections = list(sections)
        super().__init__("report sections differ: " + ", ".join(self.sections))


class ApspecWarning(UserWarning):
    pass


class NonSeparatingFamily(ApspecWarning):
    pass


class ParameterWarning(ApspecWarning):
    """Flagged but accepted parameter, e.g. a rational rotation number."""


class PrecisionWarning(ApspecWarning):
    """Monte Carlo standard error above the configured threshold."""


class AliasingWarning(ApspecWarning):
    pass


class PositivityWarning(ApspecWarning):
    pass
