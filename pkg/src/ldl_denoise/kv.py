"""Tiny ``key = value`` text format used by manifests and configs.

One pair per line, ``#`` starts a comment, blank lines ignored. Values are
kept as strings; callers convert. Keys are unique; a repeated key is a
parse error so silent overrides cannot hide typos.
"""

from __future__ import annotations

from .errors import ParseError


def parse_kv(text, source="<string>"):
    pairs = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ParseError(f"{source}:{lineno}: empty key")
        if key in pairs:
            raise ParseError(f"{source}:{lineno}: duplicate key {key!r}")
        pairs[key] = value.strip()
    return pairs


def read_kv(path):
    try:
        text = open(path, "r", encoding="utf-8").read()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    return parse_kv(text, source=str(path))


def format_kv(pairs):
    return "".join(f"{key} = {value}\n" for key, value in pairs.items())


def write_kv(path, pairs):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_kv(pairs))
