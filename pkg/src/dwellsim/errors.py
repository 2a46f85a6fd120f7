"""Exception hierarchy shared by every dwellsim subsystem."""


class DwellSimError(Exception):
    """Base class; the CLI maps these to exit code 2."""


class EmptyInputError(DwellSimError, ValueError):
    pass


class SchemaError(DwellSimError, ValueError):
    """Backend payload does not follow the output schema for its kind."""


class EchoMismatchError(SchemaError):
    """Backend echoed a raw string that differs from the one requested."""


class BackendError(DwellSimError):
    pass


class BackendTransportError(BackendError):
    """Retryable failure talking to a backend (network, timeout, 5xx)."""


class DivisionDomainError(DwellSimError, ZeroDivisionError):
    pass


class DomainError(DwellSimError, ValueError):
    pass


class OrderViolationError(DwellSimError, ValueError):
    def __init__(self, message: str, ids: list[str] | None = None):
        super().__init__(message)
        self.ids = list(ids or [])


class InvalidStateError(DwellSimError, ValueError):
    pass


class EmptyTrainingSetError(DwellSimError, ValueError):
    pass


class ConfigError(DwellSimError, ValueError):
    pass


class UnknownContainerError(DwellSimError, LookupError):
    pass


class LengthMismatchError(DwellSimError, ValueError):
    pass


class YardFullError(DwellSimError):
    pass


class InvariantBreachError(DwellSimError, AssertionError):
    pass
