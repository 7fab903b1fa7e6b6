"""Flat-file formats: signal/spectrum CSV, mask index lists, report CSV/JSON."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from pathlib import Path
from typing import Iterable, Union

import numpy as np

PathLike = Union[str, os.PathLike]


class FormatError(ValueError):
    """Malformed input file; the message names the offending line."""


def fmt(value: float) -> str:
    """17 significant digits, round-trip safe."""
    value = float(value)
    if math.isnan(value):
        return "nan"
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return format(value, ".17g")


def complex_csv(index_name: str, values: np.ndarray) -> str:
    values = np.asarray(values, dtype=complex)
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([index_name, "re", "im"])
    for i, v in enumerate(values):
        writer.writerow([i, fmt(v.real), fmt(v.imag)])
    return buf.getvalue()


def _write_complex(path: PathLike, index_name: str, values: np.ndarray) -> None:
    Path(path).write_text(complex_csv(index_name, values))


def _read_complex(path: PathLike, index_name: str) -> tuple[np.ndarray, np.ndarray]:
    """Rows of ``index,re,im``; returns ``(indices, values)`` in file order."""
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].strip():
        raise FormatError(f"{path}: line 1: empty file, expected header '{index_name},re,im'")
    header = [h.strip() for h in lines[0].split(",")]
    if header != [index_name, "re", "im"]:
        raise FormatError(f"{path}: line 1: expected header '{index_name},re,im', got {lines[0]!r}")
    idx, vals = [], []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 3:
            raise FormatError(f"{path}: line {lineno}: expected 3 fields, got {len(parts)}")
        try:
            i = int(parts[0])
            v = complex(float(parts[1]), float(parts[2]))
        except ValueError:
            raise FormatError(f"{path}: line {lineno}: cannot parse {line!r}") from None
        if not (np.isfinite(v.real) and np.isfinite(v.imag)):
            raise FormatError(f"{path}: line {lineno}: non-finite value")
        idx.append(i)
        vals.append(v)
    if not idx:
        raise FormatError(f"{path}: line 2: no data rows")
    idx = np.asarray(idx, dtype=np.int64)
    if np.unique(idx).size != idx.size or idx.min() < 0:
        raise FormatError(f"{path}: {index_name} column must hold distinct non-negative integers")
    return idx, np.asarray(vals, dtype=complex)


def write_signal(path: PathLike, signal: np.ndarray) -> None:
    _write_complex(path, "n", signal)


def read_signal_rows(path: PathLike) -> tuple[np.ndarray, np.ndarray]:
    """Sample indices and values as listed; rows may cover only part of the signal."""
    return _read_complex(path, "n")


def read_signal(path: PathLike) -> np.ndarray:
    """A complete signal; every ``n`` in ``0..N-1`` must appear exactly once."""
    idx, vals = _read_complex(path, "n")
    if not np.array_equal(np.sort(idx), np.arange(idx.size)):
        raise FormatError(f"{path}: sample indices must be 0..{idx.size - 1}")
    out = np.empty(idx.size, dtype=complex)
    out[idx] = vals
    return out


def write_spectrum(path: PathLike, spectrum: np.ndarray) -> None:
    _write_complex(path, "k", spectrum)


def read_spectrum(path: PathLike) -> np.ndarray:
    idx, vals = _read_complex(path, "k")
    if not np.array_equal(np.sort(idx), np.arange(idx.size)):
        raise FormatError(f"{path}: frequency indices must be 0..{idx.size - 1}")
    out = np.empty(idx.size, dtype=complex)
    out[idx] = vals
    return out


def parse_index_list(text: str) -> list[int]:
    """Integers separated by commas and/or whitespace."""
    tokens = text.replace(",", " ").split()
    try:
        return [int(t) for t in tokens]
    except ValueError as exc:
        raise FormatError(f"bad index list: {exc}") from None


def read_index_file(path: PathLike) -> list[int]:
    out = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        line = line.split("#", 1)[0]
        try:
            out.extend(parse_index_list(line))
        except FormatError:
            raise FormatError(f"{path}: line {lineno}: cannot parse {line!r}") from None
    return out


def write_index_file(path: PathLike, indices: Iterable[int]) -> None:
    Path(path).write_text("\n".join(str(int(i)) for i in indices) + "\n")


def json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _clean(obj):
    # JSON has no inf/nan; encode them as strings so the payload stays valid
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else fmt(v)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def dumps_json(payload) -> str:
    return json.dumps(_clean(payload), indent=2, sort_keys=True, default=json_default)


def atomic_write(path: PathLike, text: str) -> None:
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)
