"""Exception hierarchy shared by all simulator layers."""


class SimulationError(Exception):
    """Base class for every error raised by the simulator."""


# -- register bookkeeping ----------------------------------------------------

class DuplicateNameError(SimulationError):
    """A register name is already in use by an active register."""


class WidthOutOfRangeError(SimulationError):
    """Register width outside the supported 1..64 qubit range."""


class NotActiveError(SimulationError):
    """Operation referenced a register that is not active."""


class NonZeroContentError(SimulationError):
    """Register removal would discard nonzero (entangled) content."""


class RegisterCapacityError(SimulationError):
    """No free branch slot left for a new register."""


class TooManyQubitsError(SimulationError):
    """Dense export requested for a state wider than the export guard."""


# -- gate application --------------------------------------------------------

class InvalidTargetError(SimulationError):
    """Gate target (or a control) does not address a valid qubit."""


class NonUnitPhaseError(SimulationError):
    """Phase factor is not of unit modulus."""


class NotUnitaryError(SimulationError):
    """2x2 matrix fails the unitarity check."""


class EvenMultiplierError(SimulationError):
    """Modular multiplication constant must be odd to be invertible."""


class AliasedRegistersError(SimulationError):
    """Two-register arithmetic needs distinct source and destination."""


class UnnormalizedStateError(SimulationError):
    """Measurement requires a normalized state."""


# -- QRAM --------------------------------------------------------------------

class WidthMismatchError(SimulationError):
    """Register width differs from the QRAM address/word width."""


class MemoryParseError(SimulationError):
    """QRAM memory file is malformed."""


class EntryOutOfRangeError(SimulationError):
    """QRAM memory entry does not fit in the declared word width."""


# -- QASM frontend -----------------------------------------------------------

class QasmError(SimulationError):
    """Base class for QASM parse/lowering problems."""

    def __init__(self, message, line=0, col=0):
        super().__init__(f"line {line}, col {col}: {message}" if line else message)
        self.line = line
        self.col = col


class QasmSyntaxError(QasmError):
    pass


class UnsupportedGateError(QasmError):
    def __init__(self, name, line=0, col=0):
        super().__init__(f"unsupported gate or statement '{name}'", line, col)
        self.gate = name


class UndeclaredRegisterError(QasmError):
    def __init__(self, name, line=0, col=0):
        super().__init__(f"undeclared register '{name}'", line, col)
        self.register = name


class MidCircuitOperationError(SimulationError):
    """A qubit was operated on after being measured (no classical control)."""


# -- execution engine --------------------------------------------------------

class TimingTooNoisyError(SimulationError):
    """Timing spread too large for a meaningful speedup report."""


# -- linear-system solver ----------------------------------------------------

class BadDimensionError(SimulationError):
    """Problem size outside the supported range."""


class ZeroColumnError(SimulationError):
    """Matrix column with zero norm cannot be encoded."""


class TargetNotZeroError(SimulationError):
    """State preparation target register must start in |0>."""


class AncillaNotZeroError(SimulationError):
    """Block-encoding ancillas must start in |0>."""


class ZeroProjectionError(SimulationError):
    """Projection onto the ancilla-zero subspace has (near) zero norm."""
