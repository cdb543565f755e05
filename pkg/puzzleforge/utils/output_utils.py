"""
Output and reporting utilities for puzzleforge.
Handles deterministic CSV/JSON writing, summary tables, output directories and the per-directory
run manifest.

Every number is written with 17 significant digits and JSON keys are sorted, so two runs with the
same configuration produce byte-identical files; only the manifest's wall time differs.
"""
import csv
import enum
import hashlib
import json
import math
import os
import re
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Mapping, Optional, Sequence

import numpy as np
from tabulate import tabulate

from puzzleforge import __version__
from puzzleforge.constants import FAILED_TO, FLOAT_FORMAT, MANIFEST_WRITTEN, PRECISION_MODE, WRITTEN_TO
from puzzleforge.utils.logging import contextual_log
from puzzleforge.utils.rich_console import rich_error, rich_panel, rich_success

MANIFEST_NAME = "manifest.json"


def format_float(value: float) -> str:
    if math.isnan(value):
        return "NaN"
    if math.isinf(value):
        return "Infinity" if value > 0 else "-Infinity"
    return format(value, FLOAT_FORMAT)


def _plain(value: Any) -> Any:
    """Coerce numpy scalars, enums and tuples into plain JSON-able Python values."""
    if isinstance(value, enum.Enum):
        return _plain(value.value)
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return [_plain(v) for v in value.tolist()]
    if isinstance(value, Mapping):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    return value


def _encode(value: Any, indent: int, level: int) -> str:
    pad = " " * (indent * (level + 1))
    close = " " * (indent * level)
    if value is None or isinstance(value, (bool, str)):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        text = format_float(value)
        if re.fullmatch(r"-?\d+", text):
            text += ".0"
        return text
    if isinstance(value, dict):
        if not value:
            return "{}"
        items = [f"{pad}{json.dumps(k, ensure_ascii=False)}: {_encode(value[k], indent, level + 1)}" for k in sorted(value)]
        return "{\n" + ",\n".join(items) + "\n" + close + "}"
    if isinstance(value, list):
        if not value:
            return "[]"
        items = [f"{pad}{_encode(v, indent, level + 1)}" for v in value]
        return "[\n" + ",\n".join(items) + "\n" + close + "]"
    raise TypeError(f"cannot serialise {type(value).__name__}")


def dumps(content: Any, indent: int = 2) -> str:
    """JSON text with sorted keys and 17-significant-digit floats."""
    return _encode(_plain(content), indent, 0) + "\n"


def csv_cell(value: Any) -> Any:
    value = _plain(value)
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, (list, dict)):
        return dumps(value, indent=0).replace("\n", "")
    return value


def sha256_file(path: str) -> str:
    digest = hashlib.sha256()
    with open(path, 'rb') as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            digest.update(block)
    return digest.hexdigest()


def ensure_output_dir(output_dir: str) -> None:
    os.makedirs(output_dir, exist_ok=True)


def make_output_filename(command: str, params: Sequence, output_dir: str = 'output', ext: str = 'csv') -> str:
    """
    Build a deterministic output path from the command and ordered (name, value) pairs.
    Floats are rendered compactly with '.' spelled 'p' so names stay shell friendly, e.g.
    make_output_filename('puzzle', [('a', -2.0), ('order', 1)]) -> output/puzzle_a--2p0_order-1.csv
    """
    def sanitize(val):
        return re.sub(r'[^\w\-]', '', str(val).replace(' ', '_'))

    def prettify(v):
        if isinstance(v, float):
            v = repr(v).replace('.', 'p').replace('+', '')
        return sanitize(v)

    param_str = '_'.join(f"{sanitize(k)}-{prettify(v)}" for k, v in params if v is not None)
    parts = [command] + ([param_str] if param_str else [])
    return os.path.join(output_dir, '_'.join(parts) + f'.{ext}')


def write_csv(filename: str, rows: Iterable[Mapping[str, Any]], fieldnames: Optional[Sequence[str]] = None,
              context=None, item_name: str = 'Table') -> str:
    ctx = context or {}
    rows = list(rows)
    if fieldnames is None:
        fieldnames = list(rows[0].keys()) if rows else []
    try:
        with open(filename, 'w', newline='', encoding='utf-8') as f:
            writer = csv.DictWriter(f, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
            writer.writeheader()
            for row in rows:
                writer.writerow({k: csv_cell(v) for k, v in row.items()})
    except OSError as e:
        rich_error(FAILED_TO.format(action=f'write {item_name.lower()}', error=e))
        contextual_log('error', f"🧩 [Output] Failed to write {item_name.lower()}: {e}", operation="output_write", output_file=filename, status="error", error_type=type(e).__name__, extra=ctx)
        raise
    contextual_log('info', f"🧩 [Output] {item_name} written: {filename}", operation="output_write", output_file=filename, status="success", params={"rows": len(rows)}, extra=ctx)
    return filename


def write_json(filename: str, content: Any, context=None, item_name: str = 'Report') -> str:
    ctx = context or {}
    try:
        with open(filename, 'w', newline='\n', encoding='utf-8') as f:
            f.write(dumps(content))
    except OSError as e:
        rich_error(FAILED_TO.format(action=f'write {item_name.lower()}', error=e))
        contextual_log('error', f"🧩 [Output] Failed to write {item_name.lower()}: {e}", operation="output_write", output_file=filename, status="error", error_type=type(e).__name__, extra=ctx)
        raise
    contextual_log('info', f"🧩 [Output] {item_name} written: {filename}", operation="output_write", output_file=filename, status="success", extra=ctx)
    return filename


def summary_table(rows: Sequence[Sequence[Any]], headers: Sequence[str], title: Optional[str] = None) -> str:
    """Render a github-format table inside a rich panel and return the table text."""
    text = tabulate([[csv_cell(v) for v in row] for row in rows], headers=list(headers), tablefmt="github")
    rich_panel(text, title=title, style="table")
    return text


@dataclass
class RunManifest:
    command: str
    config: Dict[str, Any]
    tool_version: str = __version__
    precision_mode: str = PRECISION_MODE
    wall_time_s: float = 0.0
    input_hashes: Dict[str, str] = field(default_factory=dict)
    outputs: List[Dict[str, str]] = field(default_factory=list)

    def to_dict(self, include_wall_time: bool = True) -> Dict[str, Any]:
        payload = {
            "command": self.command,
            "config": self.config,
            "tool_version": self.tool_version,
            "precision_mode": self.precision_mode,
            "input_hashes": self.input_hashes,
            "outputs": self.outputs,
        }
        if include_wall_time:
            payload["wall_time_s"] = self.wall_time_s
        return payload


class OutputSet:
    """
    Files written by one command run into one directory. finalize() writes the manifest that
    names every file with its sha256.
    """

    def __init__(self, output_dir: str, command: str, context=None):
        self.output_dir = output_dir
        self.command = command
        self.context = context or {}
        self.files: List[str] = []
        self.started = time.perf_counter()
        ensure_output_dir(output_dir)

    def path(self, params: Sequence, ext: str) -> str:
        return make_output_filename(self.command, params, self.output_dir, ext)

    def csv(self, params: Sequence, rows, fieldnames=None, item_name: str = 'Table') -> str:
        filename = write_csv(self.path(params, 'csv'), rows, fieldnames, self.context, item_name)
        self.files.append(filename)
        rich_success(WRITTEN_TO.format(item=item_name, filename=filename))
        return filename

    def json(self, params: Sequence, content, item_name: str = 'Report') -> str:
        filename = write_json(self.path(params, 'json'), content, self.context, item_name)
        self.files.append(filename)
        rich_success(WRITTEN_TO.format(item=item_name, filename=filename))
        return filename

    def finalize(self, config: Dict[str, Any], config_path: Optional[str] = None) -> RunManifest:
        manifest = RunManifest(command=self.command, config=config)
        if config_path:
            manifest.input_hashes[os.path.basename(config_path)] = sha256_file(config_path)
        for filename in sorted(set(self.files)):
            manifest.outputs.append({"file": os.path.basename(filename), "sha256": sha256_file(filename)})
        manifest.wall_time_s = round(time.perf_counter() - self.started, 6)
        target = os.path.join(self.output_dir, MANIFEST_NAME)
        with open(target, 'w', newline='\n', encoding='utf-8') as f:
            f.write(dumps(manifest.to_dict()))
        rich_success(MANIFEST_WRITTEN.format(filename=target))
        contextual_log('info', f"🧩 [Output] Manifest written: {target}", operation="manifest_write", output_file=target, status="success", params={"files": len(manifest.outputs)}, extra=self.context)
        return manifest


def load_manifest(output_dir: str) -> Dict[str, Any]:
    with open(os.path.join(output_dir, MANIFEST_NAME), encoding='utf-8') as f:
        return json.load(f)
