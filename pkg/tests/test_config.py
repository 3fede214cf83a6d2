import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from openheis.config import (
    ConfigSyntaxError,
    ExperimentConfig,
    UnknownKeyError,
    from_dict,
    parse_config,
    parse_observable,
)
from openheis.errors import ConfigError
from openheis.presets import PRESETS, get_preset, list_presets

MINIMAL = '{"kind": "dynamics", "model": {"n_sites": 1}}'


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.dt == 1e-3
    assert cfg.model.n_b == 0.08
    assert cfg.model.g_ratio == 0.1
    assert cfg.solver == "auto"
    assert cfg.chain_model().n_sites == 1


def test_negative_gamma_is_a_constraint_violation():
    text = '{\n  "kind": "dynamics",\n  "model": {\n    "n_sites": 1,\n    "gamma": -0.1\n  }\n}'
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert not isinstance(info.value, (UnknownKeyError, ConfigSyntaxError))
    assert info.value.field == "model.gamma"
    assert info.value.line == 5
    assert info.value.exit_code == 2


def test_unknown_key_reports_line():
    text = '{\n  "kind": "dynamics",\n  "model": {"n_sites": 1},\n  "tmax": 5\n}'
    with pytest.raises(UnknownKeyError) as info:
        parse_config(text)
    assert info.value.line == 4
    assert "tmax" in str(info.value)


def test_unknown_nested_key():
    with pytest.raises(UnknownKeyError):
        parse_config('{"kind": "dynamics", "model": {"n_sites": 1, "Bz": 2}}')


def test_syntax_error_reports_line():
    with pytest.raises(ConfigSyntaxError) as info:
        parse_config('{\n  "kind": "dynamics",\n  "model": {"n_sites": 1},\n}')
    assert info.value.line == 4


@pytest.mark.parametrize(
    "patch",
    [
        {"kind": "bogus"},
        {"dt": 0},
        {"solver": "euler"},
        {"initial_state": "tilted(a,b)"},
        {"observables": ["C11"]},
        {"bz_grid": [0, 1, 0.5]},
        {"window": [5, 1]},
        {"t_end": 1.0005},
        {"model": {"n_sites": 0}},
        {"model": {"n_sites": 2, "gamma": 0.1, "on_site_rates": [[0, 0], [0, 0], [0, 0.1]]}},
    ],
)
def test_invalid_values_rejected(patch):
    data = json.loads(MINIMAL)
    data.update(patch)
    with pytest.raises(ConfigError):
        from_dict(data)


def test_hysteresis_needs_a_grid():
    with pytest.raises(ConfigError):
        from_dict({"kind": "hysteresis", "model": {"n_sites": 1}})


def test_explicit_rates():
    cfg = from_dict(
        {"kind": "spectrum", "model": {"n_sites": 2, "on_site_rates": [[0, 0], [0, 0], [0.01, 0.1]]}}
    )
    model = cfg.chain_model()
    assert model.total_damping == pytest.approx(0.11)
    assert np.all(model.neighbour_rates == 0)


def test_initial_states():
    cfg = parse_config(MINIMAL)
    assert np.allclose(cfg.initial_vector(), [1, 0, 0])
    tilted = from_dict({**json.loads(MINIMAL), "initial_state": "tilted(0.5, 1.0)"})
    assert tilted.initial_angles() == (0.5, 1.0)
    assert np.linalg.norm(tilted.initial_vector()) == pytest.approx(1.0)
    rho = tilted.initial_density_matrix(2)
    assert rho.shape == (4, 4)
    assert np.trace(rho) == pytest.approx(1.0)


def test_observable_names():
    assert parse_observable("Cxx12") == ("corr", 1, 2, "x", "x")
    assert parse_observable("Cyz31") == ("corr", 3, 1, "y", "z")
    assert parse_observable("C12") == ("conc", 1, 2)
    with pytest.raises(ConfigError):
        parse_observable("Cxq12")


@pytest.mark.parametrize("preset_id", sorted(PRESETS))
def test_presets_round_trip(preset_id):
    cfg = get_preset(preset_id).config()
    assert isinstance(cfg, ExperimentConfig)
    assert parse_config(cfg.to_json()) == cfg


def test_fig2c_expansions():
    cfg = get_preset("fig2c_caption").config()
    model = cfg.chain_model()
    assert np.allclose(model.b_field, [1, 1, -2])
    assert np.allclose(model.couplings, [0, 0, 0.5])
    assert cfg.meanfield.alpha == 0.5
    assert np.allclose(get_preset("fig2c").config().chain_model().couplings, [0, 0, 1])


def test_fig2a_initial_tilt():
    cfg = get_preset("fig2a_text").config()
    theta, phi = cfg.initial_angles()
    assert theta == pytest.approx(math.pi / 40)
    assert phi == pytest.approx(math.pi / 4)


def test_preset_table():
    rows = {row["id"]: row for row in list_presets()}
    expected = {
        "fig2a_caption", "fig2a_text", "fig2b", "fig2c", "fig2d", "fig3ab", "fig3cd",
        "fig4", "fig5a", "fig5b", "fig5c", "fig5d", "fig6",
    }
    assert expected <= set(rows)
    assert all(row["source"] for row in rows.values())
    fig4 = rows["fig4"]
    assert fig4["couplings"] == [0.1, 0.1, 0.1] and fig4["b_field"] == [0.25, 0.25, -0.5] and fig4["n_sites"] == 3
    assert rows["fig5a"]["sweep"]["param"] == "gamma"
    assert rows["fig5c"]["sweep"] == {"param": "v_x", "values": [0.5, 1.0]}
    assert rows["fig2b"]["sweep"]["param"] == "v_z"


def test_unknown_preset():
    with pytest.raises(KeyError):
        get_preset("fig7")


vec = st.lists(st.floats(-5, 5, allow_nan=False), min_size=3, max_size=3)


@given(
    kind=st.sampled_from(["dynamics", "compare", "correlations", "spectrum"]),
    n=st.integers(1, 6),
    b=vec,
    v=vec,
    gamma=st.floats(0, 1),
    mode=st.sampled_from(["fixed_d", "ll_alpha"]),
    theta=st.floats(0, math.pi),
    steps=st.integers(1, 1000),
)
def test_random_configs_round_trip(kind, n, b, v, gamma, mode, theta, steps):
    data = {
        "kind": kind,
        "model": {"n_sites": n, "b_field": b, "couplings": v, "gamma": gamma},
        "meanfield": {"damping_mode": mode, "alpha": 0.5},
        "dt": 0.01,
        "t_end": steps * 0.01,
        "initial_state": f"tilted({theta!r},0.0)",
    }
    cfg = from_dict(data)
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()
