"""Exception hierarchy. The CLI maps each class to its own exit code."""


class GraphCVError(Exception):
    pass


class InfeasibleError(GraphCVError, ValueError):
    """Parameters admit no valid object (e.g. odd n*d for a regular graph)."""


class NumericalError(GraphCVError, ArithmeticError):
    """A numerical routine failed or produced an unusable result."""


class DecompositionError(NumericalError):
    pass


class IngestError(GraphCVError, ValueError):
    """Malformed input file. Carries the offending path and line when known."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}"
            if line is not None:
                where += f":{line}"
            where += ": "
        super().__init__(where + message)
