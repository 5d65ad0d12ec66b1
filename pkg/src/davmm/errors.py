"""Exception hierarchy. Every error records the operation that raised it."""


class DaError(Exception):
    """Base class; ``module`` and ``op`` identify where the error came from."""

    module = "davmm"

    def __init__(self, message, op=None):
        super().__init__(message)
        self.op = op

    def to_dict(self):
        return {
            "error": type(self).__name__,
            "message": str(self),
            "module": self.module,
            "op": self.op,
        }


class ValidationError(DaError, ValueError):
    pass


class TableOverflowError(DaError, OverflowError):
    """A subset sum does not fit the bank's entry width."""

    module = "tables"

    def __init__(self, message, address, column, op="build_table"):
        super().__init__(message, op=op)
        self.address = address
        self.column = column


class WidthOverflowError(DaError, OverflowError):
    """An adder stage or the accumulator exceeded its declared width."""

    module = "engine"

    def __init__(self, message, cycle, stage, op="execute_vmm"):
        super().__init__(message, op=op)
        self.cycle = cycle
        self.stage = stage


class CalibrationError(DaError):
    """Calibrated cost requested for a shape with no published number."""

    module = "costmodel"
