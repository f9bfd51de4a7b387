"""Run configuration files and delimited output helpers.

Every command writes its fully resolved configuration next to its outputs
as ``config.<command>.json`` so a run can be reproduced from the directory
alone.  Values merge as: built-in defaults, then a ``--config`` JSON file,
then explicitly passed command-line flags.
"""

from __future__ import annotations

import json
import os
from typing import Iterable, Sequence

from .modelio import dumps_document

CSV_FLOAT_FORMAT = "%.9g"


def load_config_file(path: str) -> dict:
    with open(path, "r") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: config file must hold a JSON object")
    return doc


def merge_config(defaults: dict, file_values: dict, explicit: dict) -> dict:
    """defaults < config file < explicitly passed flags."""
    merged = dict(defaults)
    for key, value in file_values.items():
        if key not in merged:
            raise ValueError(f"unknown config key {key!r}")
        merged[key] = value
    merged.update(explicit)
    return merged


def write_resolved_config(run_dir: str, command: str, values: dict) -> str:
    os.makedirs(run_dir, exist_ok=True)
    path = os.path.join(run_dir, f"config.{command}.json")
    doc = {"command": command, **{k: values[k] for k in sorted(values)}}
    with open(path, "w") as fh:
        fh.write(dumps_document(doc) + "\n")
    return path


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return CSV_FLOAT_FORMAT % value
    return str(value)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence]) -> str:
    """Comma-separated output, header row, floats at 9 significant digits."""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_format_cell(v) for v in row) + "\n")
    return path


def read_csv(path: str) -> tuple[list[str], list[list[str]]]:
    with open(path, "r") as fh:
        lines = [ln.rstrip("\n") for ln in fh if ln.strip()]
    if not lines:
        raise ValueError(f"{path}: empty csv")
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]
