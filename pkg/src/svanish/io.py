"""Versioned JSON documents and CSV tables.

Floats are written with Python's shortest round-trip ``repr`` so identical
inputs always produce byte-identical files.
"""
import contextlib
import csv
import hashlib
import json
import sys
from pathlib import Path

from .errors import SchemaError


def check_schema(doc, expected):
    """Accept ``doc`` when its ``schema`` tag names ``expected`` at the same major version."""
    if not isinstance(doc, dict):
        raise SchemaError("document must be a JSON object", field="schema")
    tag = doc.get("schema")
    if not isinstance(tag, str) or "/" not in tag:
        raise SchemaError(f"missing or malformed schema tag {tag!r}", field="schema")
    name, _, version = tag.partition("/")
    want_name, _, want_version = expected.partition("/")
    if name != want_name:
        raise SchemaError(f"expected a {want_name} document, got {name}", field="schema")
    if version.split(".")[0] != want_version.split(".")[0]:
        raise SchemaError(f"unsupported {name} version {version} (reader handles {want_version})", field="schema")


def dumps(doc):
    return json.dumps(doc, indent=2, sort_keys=False) + "\n"


@contextlib.contextmanager
def _open_out(path):
    if path in (None, "-"):
        yield sys.stdout
    else:
        with open(path, "w", newline="") as fh:
            yield fh


def write_json(path, doc):
    """Write ``doc`` to ``path``; ``-`` or ``None`` means stdout."""
    with _open_out(path) as fh:
        fh.write(dumps(doc))


def read_json(path):
    try:
        return json.loads(Path(path).read_text())
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})", field="<document>") from exc


def fmt(value):
    """Shortest round-trip text for a number."""
    if isinstance(value, (int,)) and not isinstance(value, bool):
        return str(value)
    return repr(float(value))


def write_csv(path, header, rows):
    with _open_out(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def structure_hash(structure):
    """SHA-256 of the canonical structure document."""
    text = json.dumps(structure.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()


def load_structure(path):
    from .multilayer import LayeredStructure

    return LayeredStructure.from_dict(read_json(path))


def save_structure(path, structure):
    write_json(path, structure.to_dict())
