import csv
import io
from pathlib import Path
from typing import List, Sequence, Union

import orjson

from src.model.TranscriptModel import CSV_COLUMNS, JSON_OPTIONS, GameTranscript, SummaryTable

FORMATS = ("json", "csv")


def _cell(value) -> str:
  if value is None:
    return ""
  if isinstance(value, float):
    return f"{value:.6f}"
  return str(value)


def summary_csv(tables: Sequence[SummaryTable]) -> str:
  buf = io.StringIO()
  writer = csv.writer(buf, lineterminator="\n")
  writer.writerow([f"{name} ({unit})" for name, unit in CSV_COLUMNS])
  for table in tables:
    for row in table.rows:
      data = row.model_dump()
      data["seed"] = table.seed
      writer.writerow([_cell(data[name]) for name, _ in CSV_COLUMNS])
  return buf.getvalue()


def summary_json(tables: Sequence[SummaryTable]) -> bytes:
  return orjson.dumps([t.model_dump(mode="json") for t in tables], option=JSON_OPTIONS)


def transcripts_json(transcripts: Sequence[GameTranscript]) -> bytes:
  return orjson.dumps([t.model_dump(mode="json") for t in transcripts], option=JSON_OPTIONS)


def write_summary(tables: List[SummaryTable], path: Union[str, Path], fmt: str) -> Path:
  path = Path(path)
  path.parent.mkdir(parents=True, exist_ok=True)
  if fmt == "csv":
    path.write_text(summary_csv(tables), encoding="utf-8")
  else:
    path.write_bytes(summary_json(tables))
  return path
