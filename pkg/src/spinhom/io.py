"""Field CSV and JSON artifacts.

Numbers are written with 17 significant digits, which round-trips every
double exactly.  Lines starting with ``#`` carry metadata and are skipped
by every reader.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .lattice import LatticeDomain, SpinField


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(canonical_json(cfg).encode()).hexdigest()


def dump_json(obj, path=None) -> str:
    text = json.dumps(obj, sort_keys=True, indent=2) + "\n"
    if path is not None:
        Path(path).write_text(text)
    return text


def _comment_lines(meta: dict | None) -> str:
    if not meta:
        return ""
    return "".join(f"# {k}={meta[k]}\n" for k in meta)


def write_csv(header, rows, path=None, meta: dict | None = None) -> str:
    buf = io.StringIO()
    buf.write(_comment_lines(meta))
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    text = buf.getvalue()
    if path is not None:
        Path(path).write_text(text)
    return text


def read_csv(path) -> tuple[list[str], list[list[str]], dict]:
    """Return (header, rows, metadata) of a CSV with optional ``# key=value`` lines."""
    meta, lines = {}, []
    with Path(path).open(newline="") as fh:
        for line in fh:
            if line.startswith("#"):
                key, _, val = line[1:].strip().partition("=")
                meta[key.strip()] = val.strip()
            elif line.strip():
                lines.append(line)
    rows = list(csv.reader(lines))
    if not rows:
        raise ConfigError(f"field: {path} has no header")
    return rows[0], rows[1:], meta


def write_field(f: SpinField, path=None, meta: dict | None = None) -> str:
    m, N = f.domain.m, f.N
    header = [f"i{j + 1}" for j in range(m)] + [f"v{j + 1}" for j in range(N)]
    idx = f.domain.indices()
    rows = ([*map(int, i)] + [float(v) for v in u] for i, u in zip(idx, f.values))
    return write_csv(header, rows, path, meta)


def read_field(path, epsilon: float = 1.0) -> SpinField:
    """Read a field CSV; nodes must fill an integer box (any row order)."""
    header, rows, _ = read_csv(path)
    m = sum(1 for h in header if h.startswith("i"))
    N = len(header) - m
    expected = [f"i{j + 1}" for j in range(m)] + [f"v{j + 1}" for j in range(N)]
    if header != expected or m < 1:
        raise ConfigError(f"field: bad header {header} in {path}")
    if not rows:
        raise ConfigError(f"field: {path} has no nodes")
    try:
        idx = np.array([[int(c) for c in r[:m]] for r in rows], dtype=np.int64)
        vals = np.array([[float(c) for c in r[m:]] for r in rows], dtype=float)
    except (ValueError, IndexError) as exc:
        raise ConfigError(f"field: malformed row in {path}: {exc}") from None
    lo = idx.min(axis=0)
    shape = idx.max(axis=0) - lo + 1
    domain = LatticeDomain.from_index_box(tuple(int(c) for c in lo), tuple(int(c) for c in shape), epsilon)
    if domain.n_nodes != len(rows):
        raise ConfigError(f"field: {path} does not cover its index box")
    order = np.ravel_multi_index(tuple((idx - lo).T), tuple(shape))
    if len(np.unique(order)) != len(order):
        raise ConfigError(f"field: duplicate nodes in {path}")
    values = np.empty_like(vals)
    values[order] = vals
    try:
        return SpinField(domain, values)
    except ValueError as exc:
        raise ConfigError(f"field: {exc}") from None
