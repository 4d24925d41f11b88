"""Exception hierarchy. Everything subclasses ``ValueError`` so callers that
only care about bad input can catch one thing."""


class EventVLCError(ValueError):
    pass


class InvalidSignalError(EventVLCError):
    pass


class InvalidRoIError(EventVLCError):
    pass


class InvalidStreamError(EventVLCError):
    pass


class InvalidPacketError(EventVLCError):
    pass


class NoSignalError(EventVLCError):
    pass


class UndefinedCorrelationError(EventVLCError):
    pass


class NoDetectionError(EventVLCError):
    pass


class ConfigError(EventVLCError):
    pass
