"""Exception types raised by jumporder."""


class DimensionMismatch(ValueError):
    """Operand dimensions do not fit the declared spaces."""


class InvalidState(ValueError):
    """A ket or density operator violates its invariants."""


class InvalidBasis(ValueError):
    """A measurement basis is not orthonormal or has duplicate labels."""


class ImpossibleOutcome(ValueError):
    """A selective measurement was asked for an outcome of (near) zero probability."""

    def __init__(self, label, probability):
        self.label = label
        self.probability = probability
        super().__init__(f"outcome {label!r} has probability {probability:.3g}")


class ImpossibleCondition(ValueError):
    """Conditioning on an outcome that (almost) never occurs."""

    def __init__(self, label, probability):
        self.label = label
        self.probability = probability
        super().__init__(
            f"cannot condition on outcome {label!r}: probability {probability:.3g}"
        )


class NotSpacelike(ValueError):
    """Events are timelike or lightlike separated, so their time order is absolute."""


class DegenerateParams(ValueError):
    """Hardy-state angles sit on (or outside) the boundary of the open interval."""


class NoConditionEvents(ValueError):
    """A count table holds no events of the conditioning outcome."""


class ClosedFormMismatch(ArithmeticError):
    """The general pipeline and a closed-form evaluation disagree."""
