"""Exception hierarchy shared by all modules."""


class EnskogError(Exception):
    """Base class for every error raised by this package."""


class InvalidDirectionError(EnskogError, ValueError):
    pass


class DegenerateGeometryError(EnskogError, ValueError):
    pass


class InvalidConfigurationError(EnskogError, ValueError):
    pass


class InvalidArgumentError(EnskogError, ValueError):
    pass


class InvalidTreeError(EnskogError, ValueError):
    pass


class InvalidNodesError(EnskogError, ValueError):
    pass


class CapExceededError(EnskogError, ValueError):
    pass


class ResolutionError(EnskogError, ValueError):
    pass


class SamplerError(EnskogError, RuntimeError):
    pass


class RefinementError(EnskogError, RuntimeError):
    """No interval partition with the required properties was found."""


class EventCascadeError(EnskogError, RuntimeError):
    pass


class PathologyError(EnskogError, RuntimeError):
    """A measure-zero configuration (grazing, simultaneous or boundary contact).

    ``kind`` is one of ``"grazing"``, ``"simultaneous"``, ``"boundary"``.
    """

    def __init__(self, kind, message, *, time=None, pair=None, context=None):
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.time = time
        self.pair = pair
        self.context = context

    def as_dict(self):
        return {
            "kind": self.kind,
            "message": str(self),
            "time": self.time,
            "pair": list(self.pair) if self.pair is not None else None,
            "context": self.context,
        }
