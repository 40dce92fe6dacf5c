# FileHandler.py
# Version: 3.0
# Author: John Akujobi
# Date: 2026-10-19

"""
/********************************************************************
***  FILE  : FileHandler.py                                       ***
*********************************************************************
***  DESCRIPTION :                                                ***
***  All file traffic of mixbec goes through FileHandler: reading ***
***  JSON run configurations, writing CSV tables, JSON summaries  ***
***  and binary field snapshots. Every failure is re-raised as    ***
***  ReportIOError carrying the offending path.                   ***
***                                                               ***
***  - read_json(path)            -> dict                         ***
***  - write_json(path, data)     canonical, sorted keys          ***
***  - write_csv(path, header, rows)                              ***
***  - write_snapshot(path, fields, header)                       ***
***  - read_snapshot(path)        -> (array, header dict)         ***
***  - ensure_directory(path) / file_exists(path)                 ***
********************************************************************/
"""

import csv
import io
import json
import os
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Tuple

import numpy as np

from .Errors import ReportIOError
from .Logger import logger


def format_float(value: Any) -> str:
    """Render numbers with full round-trip precision so reruns compare byte for byte."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


class FileHandler:
    """
    Thin, logged wrapper around the file operations the experiments need.
    """

    def __init__(self):
        self.logger = logger

    def ensure_directory(self, directory: str) -> Path:
        try:
            path = Path(directory)
            path.mkdir(parents=True, exist_ok=True)
            return path
        except OSError as e:
            raise ReportIOError(str(directory), f"cannot create directory ({e})") from e

    def file_exists(self, file_name: str) -> bool:
        return os.path.isfile(file_name)

    def read_json(self, file_name: str) -> Dict[str, Any]:
        """
        Load a JSON document that must contain an object at the top level.

        Raises:
          ReportIOError: the file is missing, unreadable or not valid JSON.
        """
        try:
            with open(file_name, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ReportIOError(file_name, "file not found") from e
        except json.JSONDecodeError as e:
            raise ReportIOError(file_name, f"invalid JSON ({e.msg} at line {e.lineno})") from e
        except OSError as e:
            raise ReportIOError(file_name, str(e)) from e
        if not isinstance(data, dict):
            raise ReportIOError(file_name, "top-level JSON value must be an object")
        self.logger.debug(f"Read JSON from {file_name}")
        return data

    def write_json(self, file_name: str, data: Dict[str, Any]) -> None:
        text = json.dumps(data, indent=2, sort_keys=True, default=_json_default) + "\n"
        self.write_string_to_file(file_name, text)

    def write_csv(self, file_name: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
        """
        Write a header line followed by one line per row.

        Returns:
          int: number of data rows written.
        """
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(list(header))
        count = 0
        for row in rows:
            writer.writerow([format_float(value) for value in row])
            count += 1
        self.write_string_to_file(file_name, buffer.getvalue())
        self.logger.debug(f"Wrote {count} rows to {file_name}")
        return count

    def write_string_to_file(self, file_name: str, content: str) -> None:
        try:
            parent = os.path.dirname(file_name)
            if parent:
                self.ensure_directory(parent)
            with open(file_name, "w", encoding="utf-8", newline="") as f:
                f.write(content)
        except ReportIOError:
            raise
        except OSError as e:
            raise ReportIOError(file_name, str(e)) from e

    def write_snapshot(self, file_name: str, fields: np.ndarray, header: Dict[str, Any]) -> None:
        """
        Write complex fields as little-endian complex64 records.

        The raw data goes to `file_name`; a sidecar `file_name + '.hdr'` holds
        `key = value` lines (shape, dtype and whatever the caller adds).
        """
        data = np.ascontiguousarray(fields, dtype="<c8")
        lines = [f"dtype = <c8", f"shape = {' '.join(str(n) for n in data.shape)}"]
        lines += [f"{key} = {format_float(value)}" for key, value in sorted(header.items())]
        try:
            parent = os.path.dirname(file_name)
            if parent:
                self.ensure_directory(parent)
            data.tofile(file_name)
        except OSError as e:
            raise ReportIOError(file_name, str(e)) from e
        self.write_string_to_file(file_name + ".hdr", "\n".join(lines) + "\n")

    def read_snapshot(self, file_name: str) -> Tuple[np.ndarray, Dict[str, str]]:
        header: Dict[str, str] = {}
        try:
            with open(file_name + ".hdr", "r", encoding="utf-8") as f:
                for line in f:
                    if "=" in line:
                        key, value = line.split("=", 1)
                        header[key.strip()] = value.strip()
            data = np.fromfile(file_name, dtype="<c8")
        except OSError as e:
            raise ReportIOError(file_name, str(e)) from e
        shape: List[int] = [int(n) for n in header.get("shape", str(data.size)).split()]
        return data.reshape(shape), header


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
