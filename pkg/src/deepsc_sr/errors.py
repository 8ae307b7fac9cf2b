"""Exception types shared across the package."""


class InputError(ValueError):
    """Rejected input: malformed files, unsupported characters, bad shapes."""


class ShapeError(InputError):
    """Operands of an op have incompatible shapes."""

    def __init__(self, op, *shapes):
        self.op = op
        self.shapes = shapes
        joined = ", ".join(str(tuple(s)) for s in shapes)
        super().__init__(f"{op}: incompatible shapes {joined}")


class NumericalError(ArithmeticError):
    """A NaN/Inf appeared, or a degenerate value made a result undefined."""
