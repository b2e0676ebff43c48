class RumorNetError(Exception):
    """Base class for contract violations raised by this package."""


class MissingNodeError(RumorNetError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class InvalidEdgeError(RumorNetError, ValueError):
    pass


class FormatError(RumorNetError, ValueError):
    pass


class EmptyInputError(RumorNetError, ValueError):
    pass


class InputError(RumorNetError, ValueError):
    pass


class RangeError(RumorNetError, ValueError):
    pass


class ConfigError(RumorNetError, ValueError):
    pass


class MissingPostError(RumorNetError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class ProviderError(RumorNetError, RuntimeError):
    """A verifier call failed; carries the post id so the post can be retried."""

    def __init__(self, message, post_id=None):
        super().__init__(message)
        self.post_id = post_id
