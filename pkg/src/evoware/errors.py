"""Exception hierarchy shared across the runtime."""


class EvowareError(Exception):
    """Base class for all runtime errors."""


class ConfigError(EvowareError):
    """Invalid or contradictory runtime configuration."""


class BackendUnavailable(EvowareError):
    """Live language-model backend could not be reached after retries."""


class ScriptExhausted(EvowareError):
    """Replay script has no remaining entry matching the request."""


class RootMissing(EvowareError):
    """The managed root directory does not exist."""


class PathEscape(EvowareError):
    """A proposed artifact path would escape the managed root."""


class WriteFailure(EvowareError):
    """An artifact could not be written or its dependencies installed."""


class UnknownPath(EvowareError):
    """Requested path has no functionality record."""


class CloneFailure(EvowareError):
    """A validation workspace clone could not be created."""


class LengthMismatch(EvowareError):
    """Result rows being compared have different lengths."""


class IncompleteMatrix(EvowareError):
    """The execution matrix could not be fully populated."""


class MalformedSuite(EvowareError):
    """Proposed test suite could not be parsed into valid inputs."""


class MalformedCandidate(EvowareError):
    """Candidate response lacked a parseable program or metadata block."""


class MalformedDecision(EvowareError):
    """Leader response lacked a parseable decision block."""
