"""Tests for the Reader layer."""

import pytest

from dnls_core.errors import ConfigError
from dnls_core.reader import (
    atom_to_value,
    read_entries,
    split_list,
    unwrap_literal,
    wrap_literal,
)


# ---------------------------------------------------------------------------
# unwrap_literal / wrap_literal
# ---------------------------------------------------------------------------

def test_unwrap_literal_brackets():
    assert unwrap_literal("[runs/out dir]") == "runs/out dir"

def test_unwrap_literal_plain():
    assert unwrap_literal("hello") == "hello"

def test_unwrap_literal_escape():
    assert unwrap_literal(r"[a\]b]") == "a]b"

def test_wrap_literal_plain_text_unchanged():
    assert wrap_literal("runs") == "runs"

def test_wrap_literal_protects_spaces_and_comments():
    assert wrap_literal("a b") == "[a b]"
    assert wrap_literal("x#1") == "[x#1]"
    assert wrap_literal("") == "[]"

def test_wrap_literal_escapes_bracket():
    assert unwrap_literal(wrap_literal("a]b")) == "a]b"


# ---------------------------------------------------------------------------
# atom_to_value
# ---------------------------------------------------------------------------

def test_atom_to_value_int():
    assert atom_to_value("36") == 36
    assert isinstance(atom_to_value("36"), int)

def test_atom_to_value_float():
    assert atom_to_value("3.14") == 3.14
    assert atom_to_value("1e-8") == 1e-8
    assert atom_to_value(".5") == 0.5

def test_atom_to_value_negative():
    assert atom_to_value("-5") == -5

def test_atom_to_value_infinity():
    assert atom_to_value("inf") == float("inf")
    assert atom_to_value("-inf") == float("-inf")

def test_atom_to_value_bool():
    assert atom_to_value("true") is True
    assert atom_to_value("Off") is False

def test_atom_to_value_text():
    assert atom_to_value("gaussian") == "gaussian"


# ---------------------------------------------------------------------------
# split_list
# ---------------------------------------------------------------------------

def test_split_list():
    assert split_list("1, 2.5 ,3") == ["1", "2.5", "3"]

def test_split_list_empty():
    assert split_list("  ") == []


# ---------------------------------------------------------------------------
# read_entries
# ---------------------------------------------------------------------------

def test_read_entries_keys_and_lines():
    entries = read_entries("model.gamma = 0.01\n\ngrid.L = 500\n")
    assert [(e.key, e.raw, e.line) for e in entries] == [
        ("model.gamma", "0.01", 1),
        ("grid.L", "500", 3),
    ]

def test_read_entries_comments():
    entries = read_entries("# header\ngrid.L = 20  # half-length\n")
    assert len(entries) == 1
    assert entries[0].raw == "20"

def test_read_entries_hash_inside_literal():
    entries = read_entries("output.dir = [runs #2]\n")
    assert entries[0].raw == "runs #2"

def test_read_entries_sections_prefix_keys():
    entries = read_entries("[driver]\nkind = algebraic\nGamma = 1.5\n[grid]\nL = 400\n")
    assert [e.key for e in entries] == ["driver.kind", "driver.Gamma", "grid.L"]

def test_read_entries_first_line_offset():
    entries = read_entries("grid.L = 1\n", first_line=10)
    assert entries[0].line == 10

def test_read_entries_missing_equals():
    with pytest.raises(ConfigError) as info:
        read_entries("grid.L = 1\ngrid.N\n")
    assert info.value.line == 2

def test_read_entries_malformed_key():
    with pytest.raises(ConfigError) as info:
        read_entries("grid..L = 1\n")
    assert info.value.key == "grid..L"
    assert info.value.line == 1

def test_read_entries_unterminated_literal():
    with pytest.raises(ConfigError):
        read_entries("output.dir = [runs\n")
