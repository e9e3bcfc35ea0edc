"""Exception types and the falsy verification verdict."""


class A2EError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedParameter(A2EError, ValueError):
    pass


class MalformedInput(A2EError, ValueError):
    """An encoding or structure that cannot be parsed or has wrong dimensions."""


class DecryptionError(A2EError):
    pass


class ShareError(A2EError, ValueError):
    pass


class CredentialError(A2EError, ValueError):
    pass


class TraceError(A2EError):
    pass


class ProtocolError(A2EError):
    """A protocol participant refused a message."""


class Rejected:
    """Falsy result of a verification that did not accept.

    ``malformed`` separates structurally broken input from a well-formed
    object that simply fails the cryptographic check.
    """

    __slots__ = ("reason", "malformed")

    def __init__(self, reason, malformed=False):
        self.reason = reason
        self.malformed = malformed

    def __bool__(self):
        return False

    def __repr__(self):
        kind = "malformed" if self.malformed else "rejected"
        return f"<{kind}: {self.reason}>"


class IssuanceAborted(ProtocolError):
    pass


class AuthRejected(ProtocolError):
    def __init__(self, reason, by=None):
        super().__init__(reason if by is None else f"{by}: {reason}")
        self.reason = reason
        self.by = by
