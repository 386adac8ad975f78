"""Named configuration documents for the published parameter sets and MMS checks."""

from __future__ import annotations


_GAUSSIAN_DRIVER = """\
model.gamma = 0.01
driver.kind = gaussian
driver.Gamma = 1
driver.sigma_x = 100
driver.sigma_t = 0.5
grid.L = 500
integrator.t_end = 30
analysis.fit_times = 5.3
"""

_ALGEBRAIC_DRIVER = """\
model.gamma = 0.01
driver.kind = algebraic
driver.Gamma = 1.5
driver.delta_x = 100
driver.delta_t = 0.5
grid.L = 400
integrator.t_end = 30
analysis.fit_times = 4.8
"""

PRESETS: dict[str, str] = {
    "gaussian-driver": _GAUSSIAN_DRIVER + "ic.kind = algebraic\n",
    "gaussian-driver-sech": _GAUSSIAN_DRIVER + "ic.kind = sech\n",
    "algebraic-driver": _ALGEBRAIC_DRIVER + "ic.kind = algebraic\n",
    "algebraic-driver-sech": _ALGEBRAIC_DRIVER + "ic.kind = sech\n",
    # undamped, forced limit: the breathing mode may grow until blow-up
    "undamped": _GAUSSIAN_DRIVER + """\
ic.kind = algebraic
model.gamma = 0
integrator.t_end = 150
integrator.blowup_threshold = 1e6
weights.time_kappa = 0
""",
    "mms-gaussian": """\
model.gamma = 0.01
driver.kind = manufactured
ic.kind = manufactured
mms.family = gaussian
grid.L = 20
grid.N = 256
integrator.t_end = 2
integrator.rel_tol = 1e-9
integrator.abs_tol = 1e-9
weights.x0 = 1
""",
    "mms-sech": """\
model.gamma = 0
driver.kind = manufactured
ic.kind = manufactured
mms.family = sech
grid.L = 20
grid.N = 256
integrator.t_end = 1
integrator.rel_tol = 1e-9
integrator.abs_tol = 1e-9
weights.x0 = 1
weights.time_kappa = 0
""",
}


# published labels of the same parameter sets
ALIASES: dict[str, str] = {
    "fig1": "gaussian-driver",
    "fig1-sech": "gaussian-driver-sech",
    "fig4": "algebraic-driver",
    "fig4-sech": "algebraic-driver-sech",
    "fig8N": "undamped",
}


def preset_names(aliases: bool = True) -> list[str]:
    names = set(PRESETS)
    if aliases:
        names |= set(ALIASES)
    return sorted(names)


def canonical_preset(name: str) -> str:
    """Resolve an alias; unknown names raise KeyError."""
    name = ALIASES.get(name, name)
    if name not in PRESETS:
        raise KeyError(name)
    return name


def preset_text(name: str) -> str:
    """Document text of preset *name* (or an alias); raises KeyError when unknown."""
    return PRESETS[canonical_preset(name)]
