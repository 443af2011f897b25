"""Exception hierarchy shared by all polybound modules."""


class PolyboundError(ValueError):
    """Base class for every contract error raised by this package."""


class SystemDefinitionError(PolyboundError):
    """A recurrence system is malformed (syntax, unknown name, cycle, ...)."""

    def __init__(self, message, lineno=None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class CertificateError(PolyboundError):
    """A certificate is malformed or does not match its system."""


class VerificationFailed(PolyboundError):
    """A candidate certificate was built but the exact verifier rejected it."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class BracketError(PolyboundError):
    """The search bracket does not straddle the critical bound."""


class CertificationFailed(PolyboundError):
    """Bisection succeeded but no exact certificate could be produced."""


class MaskError(PolyboundError):
    """A neighborhood mask file is malformed or lacks a required type."""


class EnumerationCapError(PolyboundError):
    """Requested enumeration size exceeds the supported cap."""
