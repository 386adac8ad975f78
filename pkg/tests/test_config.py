"""Tests for experiment configuration: defaults, presets, overrides, canonical text."""

import math

import pytest

from dnls_core import config_hash, format_config, parse_config
from dnls_core.config import default_grid_degree, snapshot_schedule
from dnls_core.errors import ConfigError
from dnls_core.presets import preset_names, preset_text
from dnls_core.specs import (
    AlgebraicDriver,
    AlgebraicIC,
    GaussianDriver,
    GaussianWeight,
    LinearAbs,
    ManufacturedDriver,
    ManufacturedIC,
    SechIC,
    SechMMS,
)


# ---------------------------------------------------------------------------
# Defaults
# ---------------------------------------------------------------------------

def test_defaults():
    c = parse_config()
    assert c.model.gamma == 0.01
    assert isinstance(c.model.driver, GaussianDriver)
    assert c.model.driver.Theta == pytest.approx(math.pi / 4)
    assert isinstance(c.ic, AlgebraicIC)
    assert c.grid.L == 500.0
    assert c.grid.N == 1536
    assert c.integrator.backend == "explicit"
    assert math.isinf(c.integrator.dt_max)
    assert c.space_weight == LinearAbs(x0=100.0)
    assert c.time_weight.kappa == 2.0
    assert c.time_weight.gamma == 0.01
    assert c.preset is None

@pytest.mark.parametrize("L,N", [(500.0, 1536), (400.0, 1280), (20.0, 256), (250.0, 768)])
def test_default_grid_degree(L, N):
    assert default_grid_degree(L) == N

def test_get_resolved_value():
    c = parse_config("grid.L = 400\n")
    assert c.get("grid.N") == 1280
    with pytest.raises(ConfigError):
        c.get("grid.M")


# ---------------------------------------------------------------------------
# Snapshot schedule
# ---------------------------------------------------------------------------

def test_snapshot_schedule_dense_then_sparse():
    times = snapshot_schedule(0.0, 8.0)
    assert times[0] == 0.0 and times[-1] == 8.0
    assert times[:3] == (0.0, 0.02, 0.04)
    assert 1.74 in times
    assert times[-5:] == (6.0, 6.5, 7.0, 7.5, 8.0)
    assert len(times) == 301 + 4

def test_snapshot_schedule_short_run():
    assert snapshot_schedule(0.0, 0.1) == (0.0, 0.02, 0.04, 0.06, 0.08, 0.1)

def test_snapshot_schedule_keeps_off_grid_end():
    assert snapshot_schedule(0.0, 0.05)[-1] == 0.05

def test_snapshot_schedule_rejects_bad_range():
    with pytest.raises(ConfigError):
        snapshot_schedule(1.0, 1.0)
    with pytest.raises(ConfigError):
        snapshot_schedule(0.0, 1.0, dt_event=0.0)

def test_explicit_snapshot_times_replace_schedule():
    c = parse_config("integrator.snapshot_times = [0, 0.5, 2]\n")
    assert c.integrator.snapshot_times == (0.0, 0.5, 2.0)


# ---------------------------------------------------------------------------
# Documents and errors
# ---------------------------------------------------------------------------

def test_document_sections():
    c = parse_config("[driver]\nkind = algebraic\nGamma = 1.5\nomega = 0.2\n")
    assert c.model.driver == AlgebraicDriver(Gamma=1.5, delta_x=100.0, delta_t=0.5, omega=0.2)

def test_unknown_key_reports_line():
    with pytest.raises(ConfigError) as info:
        parse_config("grid.L = 20\ngrid.M = 3\n")
    assert info.value.key == "grid.M"
    assert info.value.line == 2
    assert str(info.value).startswith("line 2: grid.M:")

def test_bad_number():
    with pytest.raises(ConfigError) as info:
        parse_config("model.gamma = lots\n")
    assert info.value.key == "model.gamma"

def test_bad_enum():
    with pytest.raises(ConfigError):
        parse_config("driver.kind = sawtooth\n")

def test_bad_integer():
    with pytest.raises(ConfigError):
        parse_config("integrator.max_steps = 2.5\n")

def test_bad_bool():
    with pytest.raises(ConfigError):
        parse_config("output.plots = maybe\n")

def test_bad_grid():
    with pytest.raises(ConfigError):
        parse_config("grid.L = 0\n")
    with pytest.raises(ConfigError):
        parse_config("grid.N = 1\n")
    with pytest.raises(ConfigError):
        parse_config("grid.N = 2.5\n")

def test_smallest_grid_degree():
    assert parse_config("grid.N = 2\n").grid.N == 2

def test_invalid_model_parameter_becomes_config_error():
    with pytest.raises(ConfigError) as info:
        parse_config("model.gamma = -1\n")
    assert info.value.key == "model"

def test_bad_analysis_window():
    with pytest.raises(ConfigError) as info:
        parse_config("analysis.prw_t_lo = 5\nanalysis.prw_t_hi = 4\n")
    assert info.value.key == "analysis.prw_t_lo"

def test_unknown_fit_family():
    with pytest.raises(ConfigError):
        parse_config("analysis.fit_families = linear, cubic\n")

def test_file_ic_needs_path():
    with pytest.raises(ConfigError) as info:
        parse_config("ic.kind = file\n")
    assert info.value.key == "ic.path"

def test_auto_keys():
    c = parse_config("grid.N = auto\nintegrator.dt_max = 0.01\n")
    assert c.grid.N == 1536
    assert c.integrator.dt_max == 0.01


# ---------------------------------------------------------------------------
# Presets and overrides
# ---------------------------------------------------------------------------

def test_preset_names():
    assert {"gaussian-driver", "algebraic-driver", "undamped", "mms-gaussian", "mms-sech"} <= set(preset_names())

@pytest.mark.parametrize("alias, name", [
    ("fig1", "gaussian-driver"),
    ("fig1-sech", "gaussian-driver-sech"),
    ("fig4", "algebraic-driver"),
    ("fig4-sech", "algebraic-driver-sech"),
    ("fig8N", "undamped"),
])
def test_preset_alias_matches_preset(alias, name):
    c = parse_config(preset=alias)
    assert c.preset == name
    assert config_hash(c) == config_hash(parse_config(preset=name))
    assert alias in preset_names()
    assert alias not in preset_names(aliases=False)

def test_preset_alias_in_document():
    assert parse_config("preset = fig4\n").preset == "algebraic-driver"

def test_unknown_preset_raises_key_error():
    with pytest.raises(KeyError):
        preset_text("nope")

def test_gaussian_driver_preset():
    c = parse_config(preset="gaussian-driver")
    assert c.preset == "gaussian-driver"
    assert c.model.driver == GaussianDriver(Gamma=1.0, sigma_x=100.0, sigma_t=0.5)
    assert c.grid.L == 500.0 and c.grid.N == 1536
    assert c.analysis.fit_times == (5.3,)

def test_algebraic_driver_sech_preset():
    c = parse_config(preset="algebraic-driver-sech")
    assert isinstance(c.model.driver, AlgebraicDriver)
    assert c.model.driver.Gamma == 1.5
    assert isinstance(c.ic, SechIC)
    assert c.grid.N == 1280

def test_undamped_preset():
    c = parse_config(preset="undamped")
    assert c.model.gamma == 0.0
    assert c.integrator.t_end == 150.0
    assert c.time_weight.kappa == 0.0

def test_mms_preset_manufactures_driver_and_ic():
    c = parse_config(preset="mms-sech")
    assert isinstance(c.model.driver, ManufacturedDriver)
    assert isinstance(c.ic, ManufacturedIC)
    assert isinstance(c.ic.family, SechMMS)

def test_preset_entry_in_document():
    c = parse_config("preset = undamped\n", preset="gaussian-driver")
    assert c.preset == "undamped"

def test_document_beats_preset():
    c = parse_config("grid.L = 250\n", preset="undamped")
    assert c.grid.L == 250.0
    assert c.grid.N == 768

def test_overrides_beat_document():
    c = parse_config("grid.L = 250\n", overrides=["grid.L=100", "weights.space = gaussian", "weights.sigma=[50]"])
    assert c.grid.L == 100.0
    assert c.space_weight == GaussianWeight(sigma=50.0)

def test_override_errors_have_no_line():
    with pytest.raises(ConfigError) as info:
        parse_config(overrides=["grid.Q=1"])
    assert info.value.line is None
    with pytest.raises(ConfigError):
        parse_config(overrides=["grid.L"])

def test_unknown_preset():
    with pytest.raises(ConfigError) as info:
        parse_config(preset="nope")
    assert info.value.key == "preset"


# ---------------------------------------------------------------------------
# Canonical text and hash
# ---------------------------------------------------------------------------

def test_format_config_is_sorted_and_complete():
    text = format_config(parse_config())
    keys = [line.split(" = ")[0] for line in text.splitlines()]
    assert keys == sorted(keys)
    assert "grid.N" in keys and "preset" not in keys

def test_format_config_uses_17_digits():
    text = format_config(parse_config("model.gamma = 0.1\n"))
    assert "model.gamma = 0.10000000000000001" in text

def test_canonical_text_reparses_to_same_config():
    c = parse_config("output.dir = [my runs]\nanalysis.fit_times = 1.5, 2.5\n", preset="algebraic-driver")
    again = parse_config(format_config(c))
    assert format_config(again) == format_config(c)
    assert config_hash(again) == config_hash(c)
    assert again.output.dir == "my runs"

def test_hash_tracks_values():
    assert config_hash(parse_config()) == config_hash(parse_config())
    assert config_hash(parse_config()) != config_hash(parse_config("model.gamma = 0.02\n"))
    assert len(config_hash(parse_config())) == 64
