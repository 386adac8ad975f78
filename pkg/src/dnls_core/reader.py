"""Reader layer: splits a key-value document into entries and converts atoms."""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import ConfigError


_KEY_RE = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*(\.[A-Za-z_][A-Za-z0-9_]*)*$")
_SECTION_RE = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_.]*)\]$")
_INT_RE = re.compile(r"^[+-]?\d+$")
_FLOAT_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_SPECIAL_FLOATS = {"inf": float("inf"), "+inf": float("inf"), "-inf": float("-inf")}
_TRUE = {"true", "yes", "on"}
_FALSE = {"false", "no", "off"}


@dataclass
class ConfigEntry:
    key: str
    raw: str  # literal brackets already removed
    line: int | None  # None for command-line overrides


# ---------------------------------------------------------------------------
# Literal handling
# ---------------------------------------------------------------------------

def unwrap_literal(atom: str) -> str:
    """Remove [...] brackets; ``\\]`` inside the literal stands for ``]``."""
    if len(atom) >= 2 and atom.startswith("[") and atom.endswith("]"):
        return atom[1:-1].replace(r"\]", "]")
    return atom


def wrap_literal(text: str) -> str:
    """Inverse of :func:`unwrap_literal` for values that need protecting."""
    if text == "" or any(c in text for c in "#[] ") or text != text.strip():
        return "[" + text.replace("]", r"\]") + "]"
    return text


def atom_to_value(s: str):
    """Convert an unwrapped atom to int, float, bool or str."""
    low = s.strip().lower()
    if _INT_RE.match(low):
        return int(low)
    if _FLOAT_RE.match(low):
        return float(low)
    if low in _SPECIAL_FLOATS:
        return _SPECIAL_FLOATS[low]
    if low in _TRUE:
        return True
    if low in _FALSE:
        return False
    return s.strip()


def split_list(s: str) -> list[str]:
    """Comma-separated atoms; empty text is the empty list."""
    if not s.strip():
        return []
    return [part.strip() for part in s.split(",")]


# ---------------------------------------------------------------------------
# Line reading
# ---------------------------------------------------------------------------

def _strip_comment(text: str) -> str:
    depth = 0
    escaped = False
    for i, c in enumerate(text):
        if escaped:
            escaped = False
        elif c == "\\":
            escaped = True
        elif c == "[":
            depth += 1
        elif c == "]" and depth:
            depth -= 1
        elif c == "#" and depth == 0:
            return text[:i]
    return text


def read_entries(text: str, first_line: int = 1) -> list[ConfigEntry]:
    """Read ``key = value`` lines; ``[section]`` lines prefix the keys that follow."""
    entries: list[ConfigEntry] = []
    section = ""
    for offset, raw_line in enumerate(text.splitlines()):
        lineno = first_line + offset
        line = _strip_comment(raw_line).strip()
        if not line:
            continue
        m = _SECTION_RE.match(line)
        if m:
            section = m.group(1) + "."
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", line=lineno)
        key, _, value = line.partition("=")
        key = section + key.strip()
        if not _KEY_RE.match(key):
            raise ConfigError("malformed key", key=key, line=lineno)
        value = value.strip()
        if value.startswith("[") and not value.endswith("]"):
            raise ConfigError("unterminated bracket literal", key=key, line=lineno)
        entries.append(ConfigEntry(key=key, raw=unwrap_literal(value), line=lineno))
    return entries
