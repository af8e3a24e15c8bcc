"""Config parsing, CSV/JSON writers and run manifests.

Config files are flat ``key = value`` text (``#`` starts a comment); values
are parsed as int, float, comma-separated number lists, or left as strings.
A file whose first non-blank character is ``{`` is read as JSON instead.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import CodewordError


class ConfigError(CodewordError):
    pass


def _parse_scalar(text: str):
    for conv in (int, float):
        try:
            return conv(text)
        except ValueError:
            pass
    low = text.lower()
    if low in ("true", "yes", "on"):
        return True
    if low in ("false", "no", "off"):
        return False
    return text


def parse_value(text: str):
    text = text.strip()
    if "," in text:
        return [_parse_scalar(part.strip()) for part in text.split(",") if part.strip()]
    return _parse_scalar(text)


def parse_config_text(text: str) -> dict[str, Any]:
    if text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON config: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError("JSON config must be an object")
        return data
    out: dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise ConfigError(f"line {lineno}: empty key")
        if key in out:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        out[key] = parse_value(value)
    return out


def load_config(path: str | os.PathLike) -> dict[str, Any]:
    return parse_config_text(Path(path).read_text(encoding="utf-8"))


def fmt(x) -> str:
    """Full-precision text for CSV cells (17 significant digits for floats)."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, float):
        return format(x, ".17g")
    return str(x)


def atomic_write_text(path: str | os.PathLike, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path: str | os.PathLike, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(x) for x in row])
    return atomic_write_text(path, buf.getvalue())


def write_json(path: str | os.PathLike, obj) -> Path:
    return atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True, allow_nan=True) + "\n")


def write_manifest(out_dir: str | os.PathLike, command: str, config: dict, seed, outputs: Sequence[Path],
                   duration: float, threads: int, version: str) -> Path:
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "version": version,
        "threads": threads,
        "outputs": [str(p) for p in outputs],
        "duration_s": duration,
    }
    return write_json(Path(out_dir) / "manifest.json", manifest)


def read_manifest(path: str | os.PathLike) -> dict:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid manifest {path}: {exc}") from None
    if not isinstance(data, dict) or "command" not in data or "config" not in data:
        raise ConfigError(f"{path} is not a run manifest")
    return data
