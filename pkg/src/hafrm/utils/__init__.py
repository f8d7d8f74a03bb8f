from .exceptions import (
    HafrmError,
    ContractError,
    ShapeError,
    ConfigError,
    DataError,
    RecordParseError,
    RecordSchemaError,
    RecordValidationError,
    SequenceLengthError,
    CheckpointError,
    JudgeError,
    NumericError,
)

__all__ = [
    "HafrmError",
    "ContractError",
    "ShapeError",
    "ConfigError",
    "DataError",
    "RecordParseError",
    "RecordSchemaError",
    "RecordValidationError",
    "SequenceLengthError",
    "CheckpointError",
    "JudgeError",
    "NumericError",
]
