"""Custom exceptions for reward model training and evaluation"""

from typing import Optional, Dict, Any, List


class HafrmError(Exception):
    """Base exception for all hafrm errors"""

    exit_code: int = 2

    def __init__(
        self,
        message: str,
        code: Optional[str] = None,
        details: Optional[Dict[str, Any]] = None
    ):
        super().__init__(message)
        self.message = message
        self.code = code or "HAFRM_ERROR"
        self.details = details or {}

    def __str__(self) -> str:
        return f"[{self.code}] {self.message}"


class ContractError(HafrmError):
    """A precondition of an operation was violated"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None, code: str = "CONTRACT_VIOLATION"):
        super().__init__(message, code, details)


class ShapeError(ContractError):
    """Tensor dimensions do not agree"""

    def __init__(self, message: str, *shapes: tuple):
        super().__init__(message, {"shapes": [list(s) for s in shapes]}, code="SHAPE_MISMATCH")
        self.shapes = shapes


class ConfigError(HafrmError):
    """Invalid or inconsistent configuration"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "CONFIG_ERROR", details)


class DataError(HafrmError):
    """Problem with preference data"""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None, code: str = "DATA_ERROR"):
        super().__init__(message, code, details)


class RecordParseError(DataError):
    """A JSONL line could not be parsed"""

    def __init__(self, message: str, line_number: int):
        super().__init__(message, {"line": line_number}, code="PARSE_ERROR")
        self.line_number = line_number


class RecordSchemaError(DataError):
    """A record is missing a required key or has a wrong type"""

    def __init__(self, message: str, line_number: Optional[int] = None, missing: Optional[List[str]] = None):
        super().__init__(message, {"line": line_number, "missing": missing or []}, code="SCHEMA_ERROR")
        self.line_number = line_number
        self.missing = missing or []


class RecordValidationError(DataError):
    """A record violates a PreferenceRecord invariant"""

    def __init__(self, message: str, record_ids: Optional[List[str]] = None):
        super().__init__(message, {"ids": record_ids or []}, code="VALIDATION_ERROR")
        self.record_ids = record_ids or []


class SequenceLengthError(HafrmError):
    """An encoded sequence does not fit the model's context"""

    def __init__(self, message: str, length: int, max_len: int):
        super().__init__(message, "LENGTH_ERROR", {"length": length, "max_seq_len": max_len})
        self.length = length
        self.max_len = max_len


class CheckpointError(HafrmError):
    """Checkpoint cannot be read or has the wrong format version"""

    def __init__(self, message: str, path: Optional[str] = None):
        super().__init__(message, "CHECKPOINT_ERROR", {"path": path})
        self.path = path


class JudgeError(HafrmError):
    """Judge output is missing or not a valid ranking"""

    def __init__(self, message: str, prompt_id: Optional[str] = None):
        super().__init__(message, "JUDGE_ERROR", {"prompt_id": prompt_id})
        self.prompt_id = prompt_id


class NumericError(HafrmError):
    """Non-finite values encountered during computation"""

    exit_code = 3

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message, "NUMERIC_ERROR", details)
