"""Preference records and their JSONL format"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Set, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..utils.exceptions import RecordParseError, RecordSchemaError, RecordValidationError

logger = logging.getLogger(__name__)

REQUIRED_KEYS = ("prompt", "chosen", "rejected")
OPTIONAL_KEYS = ("id", "source")


class PreferenceRecord(BaseModel):
    """One (prompt, chosen, rejected) triple; ``chosen`` is the preferred response"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    id: str = Field(min_length=1)
    prompt: str = Field(min_length=1)
    chosen: str = Field(min_length=1)
    rejected: str = Field(min_length=1)
    source: str = "default"

    @model_validator(mode="after")
    def responses_differ(self) -> "PreferenceRecord":
        if self.chosen == self.rejected:
            raise ValueError("chosen and rejected responses are identical")
        return self

    @property
    def triple(self) -> Tuple[str, str, str]:
        return (self.prompt, self.chosen, self.rejected)


def make_record(**fields) -> PreferenceRecord:
    """Build a record, reporting invariant violations as ``RecordValidationError``."""
    try:
        return PreferenceRecord(**fields)
    except ValidationError as e:
        record_id = str(fields.get("id", "?"))
        reasons = "; ".join(err["msg"] for err in e.errors())
        raise RecordValidationError(f"record {record_id} is invalid: {reasons}", [record_id])


def load_jsonl(path: Union[str, Path], source: Optional[str] = None) -> List[PreferenceRecord]:
    """Load and validate records in file order.

    Records without ``id`` get ``<file stem>:<line number>``; records without
    ``source`` get ``source`` or the file stem. Exact duplicate triples are
    dropped with a warning.

    Raises:
        RecordParseError: A line is not valid JSON
        RecordSchemaError: A required key is missing or not a string
        RecordValidationError: A record breaks an invariant or reuses an id
    """
    path = Path(path)
    default_source = source or path.stem
    records: List[PreferenceRecord] = []
    seen_triples: Set[Tuple[str, str, str]] = set()
    seen_ids: Set[str] = set()
    dropped = 0

    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise RecordParseError(f"{path}:{line_number}: invalid JSON ({e.msg})", line_number)
            if not isinstance(obj, dict):
                raise RecordSchemaError(f"{path}:{line_number}: expected a JSON object", line_number)

            missing = [k for k in REQUIRED_KEYS if k not in obj]
            if missing:
                raise RecordSchemaError(f"{path}:{line_number}: missing key(s) {missing}", line_number, missing)
            for key in REQUIRED_KEYS + OPTIONAL_KEYS:
                if key in obj and not isinstance(obj[key], str):
                    raise RecordSchemaError(f"{path}:{line_number}: {key!r} must be a string", line_number)

            record_id = obj.get("id") or f"{path.stem}:{line_number}"
            try:
                record = make_record(
                    id=record_id,
                    prompt=obj["prompt"],
                    chosen=obj["chosen"],
                    rejected=obj["rejected"],
                    source=obj.get("source") or default_source,
                )
            except RecordValidationError as e:
                raise RecordValidationError(f"{path}:{line_number}: {e.message}", e.record_ids)

            if record.triple in seen_triples:
                dropped += 1
                continue
            if record.id in seen_ids:
                raise RecordValidationError(f"{path}:{line_number}: duplicate id {record.id!r}", [record.id])
            seen_triples.add(record.triple)
            seen_ids.add(record.id)
            records.append(record)

    if dropped:
        logger.warning(f"{path}: dropped {dropped} duplicate record(s)")
    logger.debug(f"loaded {len(records)} record(s) from {path}")
    return records


def write_jsonl(records: Iterable[PreferenceRecord], path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record.model_dump(), ensure_ascii=False) + "\n")
    return path


@dataclass(frozen=True)
class PromptRecord:
    id: str
    prompt: str
    source: str


def load_prompts(path: Union[str, Path], source: Optional[str] = None) -> List[PromptRecord]:
    """Prompts from a JSONL file; any object with a non-empty ``prompt`` qualifies.

    Preference files work as prompt files (their responses are ignored).
    Repeated prompts are kept once, in first-seen order.
    """
    path = Path(path)
    default_source = source or path.stem
    prompts: List[PromptRecord] = []
    seen: Set[str] = set()
    with open(path, "r", encoding="utf-8") as f:
        for line_number, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as e:
                raise RecordParseError(f"{path}:{line_number}: invalid JSON ({e.msg})", line_number)
            if not isinstance(obj, dict):
                raise RecordSchemaError(f"{path}:{line_number}: expected a JSON object", line_number)
            prompt = obj.get("prompt")
            if not isinstance(prompt, str) or not prompt:
                raise RecordSchemaError(f"{path}:{line_number}: 'prompt' must be a non-empty string", line_number, ["prompt"])
            if prompt in seen:
                continue
            seen.add(prompt)
            prompts.append(
                PromptRecord(
                    id=str(obj.get("id") or f"{path.stem}:{line_number}"),
                    prompt=prompt,
                    source=str(obj.get("source") or default_source),
                )
            )
    logger.debug(f"loaded {len(prompts)} prompt(s) from {path}")
    return prompts
