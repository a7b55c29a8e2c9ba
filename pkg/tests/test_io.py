import json

import numpy as np
import pytest

from schmidt_forge.analysis import theorem3_sweep
from schmidt_forge.compiler import compile_strategy
from schmidt_forge.errors import StateFormatError
from schmidt_forge.executor import execute_exact
from schmidt_forge.io import (
    dumps,
    histogram_csv,
    load_json_arg,
    state_from_dict,
    state_to_dict,
    strategy_from_dict,
    strategy_to_dict,
    sweep_csv,
)
from schmidt_forge.states import random_state


def test_state_round_trip(rng):
    state = random_state(3, 4, rng=rng)
    back = state_from_dict(json.loads(dumps(state_to_dict(state))))
    np.testing.assert_array_equal(back.amplitudes, state.amplitudes)


def test_schmidt_shortcut():
    state = state_from_dict({"schmidt": [0.8, 0.2]})
    assert state.dim_a == 2
    np.testing.assert_allclose(np.diag(state.amplitudes).real ** 2, [0.8, 0.2])


@pytest.mark.parametrize(
    "doc, field",
    [
        ({"schmidt": [0.5, 0.6]}, "schmidt"),
        ({"schmidt": "x"}, "schmidt"),
        ({"schmidt": [1.2, -0.2]}, "schmidt"),
        ({"dim_a": 2, "amplitudes": []}, "dim_b"),
        ({"dim_a": 0, "dim_b": 1, "amplitudes": [[[1, 0]]]}, "dim_a"),
        ({"dim_a": 1, "dim_b": 1, "amplitudes": [[1]]}, "amplitudes"),
        ({"dim_a": 1, "dim_b": 2, "amplitudes": [[[1, 0]]]}, "amplitudes"),
        ({"dim_a": 1, "dim_b": 1, "amplitudes": [[[0.5, 0]]]}, "amplitudes"),
        ([1, 2], "<root>"),
    ],
)
def test_malformed_states_name_field(doc, field):
    with pytest.raises(StateFormatError) as info:
        state_from_dict(doc)
    assert info.value.field == field


def test_load_json_arg(tmp_path):
    path = tmp_path / "s.json"
    path.write_text('{"schmidt": [1.0]}')
    assert load_json_arg(str(path)) == {"schmidt": [1.0]}
    assert load_json_arg('{"a": 1}') == {"a": 1}
    with pytest.raises(StateFormatError):
        load_json_arg("{not json")
    with pytest.raises(StateFormatError):
        load_json_arg(str(tmp_path / "missing.json"))


def test_strategy_round_trip(rng):
    state = random_state(3, 3, rng=rng)
    strat = compile_strategy(state, 2)
    back = strategy_from_dict(json.loads(dumps(strategy_to_dict(strat))))
    assert [b.label for b in back.branches] == [b.label for b in strat.branches]
    rep = execute_exact(back, state)
    assert rep.total_success == pytest.approx(strat.success_probability, abs=1e-12)
    assert dumps(strategy_to_dict(back)) == dumps(strategy_to_dict(strat))


def test_strategy_missing_key():
    with pytest.raises(StateFormatError) as info:
        strategy_from_dict({"m": 2})
    assert info.value.field == "input_spectrum"


def test_csv_formats():
    text = histogram_csv({"b0000:x": 3, "b0001:y": 0})
    assert text == "label,count\nb0000:x,3\nb0001:y,0\n"
    rows = sweep_csv(theorem3_sweep([0.8, 0.2], [1], [0.5])).splitlines()
    assert rows[0] == "n,K,m,p_max,entropy"
    n, k, m, pm, ent = rows[1].split(",")
    assert (n, k, m) == ("1", "0.5", "2") and float(pm) == pytest.approx(0.4)
