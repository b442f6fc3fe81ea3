"""Exception types shared across the package.

Argument validation failures raise plain ValueError; the classes here mark
protocol-level failures a caller may want to handle distinctly.
"""


class ProxyShareError(Exception):
    """Base class for protocol failures."""


class ShareSetMismatch(ProxyShareError):
    """The collected decryption shares do not line up with the recipient keys."""

    def __init__(self, message: str, missing: tuple[str, ...] = ()):
        super().__init__(message)
        self.missing = missing


class DecodeFailure(ProxyShareError):
    """A recovered value does not decode to well-formed plaintext.

    Raised when decryption completes algebraically but the result fails a
    structural check (out of message range, bad authentication tag). This is
    how stale or corrupted shares surface to the caller.
    """


class CorruptWrappedKey(ProxyShareError):
    """Unwrapping a distributed key produced a value outside the scalar range."""


class InfeasibleQuorum(ProxyShareError):
    """No member subset can cover all keys under the given configuration."""
