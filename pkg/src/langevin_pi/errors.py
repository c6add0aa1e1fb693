"""Exception hierarchy.

Every error carries a short machine-readable ``code`` used by the CLI to
print ``CODE: message`` lines.
"""


class LangevinPIError(Exception):
    code = "E_GENERIC"


class InvalidInputError(LangevinPIError, ValueError):
    code = "E_INVALID_INPUT"


class ShapeError(LangevinPIError, ValueError):
    code = "E_SHAPE"


class InfeasibleParametersError(LangevinPIError, ValueError):
    code = "E_INFEASIBLE"


class InvalidReferenceError(LangevinPIError, ValueError):
    code = "E_INVALID_REFERENCE"


class ScoreRangeError(LangevinPIError, ValueError):
    code = "E_SIGMA_RANGE"


class TrainingDivergedError(LangevinPIError, RuntimeError):
    code = "E_DIVERGED"

    def __init__(self, iteration, loss):
        super().__init__(f"loss became non-finite ({loss}) at iteration {iteration}")
        self.iteration = iteration
        self.loss = loss


class NumericalFailureError(LangevinPIError, RuntimeError):
    code = "E_NUMERICAL"

    def __init__(self, level, step, coil, trace=None):
        super().__init__(
            f"non-finite score at level {level}, step {step}, coil {coil}")
        self.level = level
        self.step = step
        self.coil = coil
        self.trace = trace


class CheckpointError(LangevinPIError, ValueError):
    code = "E_CHECKPOINT"


class CheckpointMagicError(CheckpointError):
    code = "E_CHECKPOINT_MAGIC"


class CheckpointVersionError(CheckpointError):
    code = "E_CHECKPOINT_VERSION"


class CheckpointTruncatedError(CheckpointError):
    code = "E_CHECKPOINT_TRUNCATED"


class FileFormatError(LangevinPIError, ValueError):
    code = "E_FORMAT"


class ConfigError(LangevinPIError, ValueError):
    code = "E_CONFIG"
