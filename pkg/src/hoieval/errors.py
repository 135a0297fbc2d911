"""Exception types raised across the toolkit."""


class EvalError(Exception):
    """Base class for all toolkit errors."""


class DegenerateConfiguration(EvalError):
    pass


class ZeroVariance(DegenerateConfiguration):
    pass


class BehindCamera(EvalError):
    pass


class EmptyMesh(EvalError):
    pass


class EmptyCloud(EvalError):
    pass


class EmptyInput(EvalError):
    pass


class EmptyMask(EvalError):
    pass


class ZeroExtent(EvalError):
    pass


class AllZero(EvalError):
    pass


class CountMismatch(EvalError):
    pass


class MixedTracks(EvalError):
    pass


class NoCurveData(EvalError):
    pass


class ParseError(EvalError):
    """Malformed input file. ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class FrameError(EvalError):
    """A per-frame failure, tagged with the frame it came from."""

    def __init__(self, frame_id, cause):
        self.frame_id = frame_id
        self.cause = cause
        super().__init__(f"frame {frame_id}: {type(cause).__name__}: {cause}")
