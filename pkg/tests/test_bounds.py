import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from schmidt_forge.bounds import (
    RunLengthSpectrum,
    bound_table,
    case_a_criterion,
    check_lemma4_shape,
    check_lemma5_shape,
    pmax_runlength,
    tensor_power_spectrum,
)
from schmidt_forge.errors import CapacityError, ParameterError
from schmidt_forge.states import random_spectrum


def _brute_bound(lam, m):
    # direct sum over the definition, no shared helpers
    lam = sorted(lam, reverse=True)
    lam = lam + [0.0] * max(0, m - len(lam))
    vals = []
    for r in range(1, m + 1):
        vals.append(m / r * sum(lam[m - r:]))
    return vals


def _kron_spectrum(lam, n):
    out = np.array([1.0])
    for _ in range(n):
        out = np.kron(out, lam)
    return np.sort(out)[::-1]


def test_hand_examples():
    assert bound_table([1.0], 2).p_max == 0.0
    t = bound_table([0.8, 0.2], 2)
    np.testing.assert_allclose(t.b_values, [0.4, 1.0])
    assert t.r1 == 1 and t.p_max == pytest.approx(0.4)
    t = bound_table([0.5, 0.3, 0.2], 3)
    np.testing.assert_allclose(t.b_values, [0.6, 0.75, 1.0])
    assert t.r1 == 1 and t.p_max == pytest.approx(0.6) and t.lambda_max == pytest.approx(0.2)
    assert bound_table(np.full(5, 0.2), 5).p_max == pytest.approx(1.0)


def test_m_beyond_rank_is_zero():
    assert bound_table([0.5, 0.5], 3).p_max == 0.0


def test_invalid_m():
    with pytest.raises(ParameterError):
        bound_table([1.0], 0)


def test_matches_brute_force(rng):
    for _ in range(300):
        n = int(rng.integers(1, 9))
        lam = random_spectrum(n, rng)
        for m in range(1, n + 2):
            t = bound_table(lam, m)
            ref = _brute_bound(list(lam), m)
            np.testing.assert_allclose(t.b_values, ref, atol=1e-12)
            assert t.p_max == pytest.approx(min(1.0, max(0.0, min(ref))), abs=1e-12)
            assert t.lambda_max * m == pytest.approx(t.b(t.r1), abs=1e-12)


def test_lemma4_shape_examples():
    assert check_lemma4_shape([0.6, 0.75, 1.0])
    assert check_lemma4_shape([1.0, 1.0])
    assert not check_lemma4_shape([0.5, 0.7, 0.6])


def test_shapes_on_random_spectra(rng):
    for _ in range(1000):
        n = int(rng.integers(1, 9))
        lam = random_spectrum(n, rng)
        m = int(rng.integers(1, n + 1))
        t = bound_table(lam, m)
        assert check_lemma4_shape(t.b_values)
        assert check_lemma5_shape(t)
        assert 0.0 <= t.p_max <= 1.0


def test_case_a_criterion_examples():
    assert case_a_criterion([0.4, 0.35, 0.25], 2)
    assert not case_a_criterion([0.8, 0.2], 2)
    assert case_a_criterion([1 / 3] * 3, 3)


def test_case_a_equivalence(rng):
    for _ in range(500):
        n = int(rng.integers(1, 8))
        lam = random_spectrum(n, rng)
        m = int(rng.integers(1, n + 1))
        if abs(lam[0] - 1 / m) < 1e-9:
            continue
        assert case_a_criterion(lam, m) == (bound_table(lam, m).p_max >= 1 - 1e-12)


def test_tensor_power_examples():
    spec = tensor_power_spectrum([0.8, 0.2], 2)
    assert [c for _, c in spec.runs] == [1, 2, 1]
    np.testing.assert_allclose([v for v, _ in spec.runs], [0.64, 0.16, 0.04])
    one = tensor_power_spectrum([0.5, 0.3, 0.2], 1)
    np.testing.assert_allclose([v for v, _ in one.runs], [0.5, 0.3, 0.2])
    flat = tensor_power_spectrum([0.5, 0.5], 10)
    assert flat.runs == ((2.0 ** -10, 1024),)


@pytest.mark.parametrize("lam", [[0.8, 0.2], [0.5, 0.3, 0.2], [0.4, 0.4, 0.2], [0.7, 0.2, 0.05, 0.05]])
@pytest.mark.parametrize("n", [1, 2, 3, 5])
def test_tensor_power_matches_kron(lam, n):
    spec = tensor_power_spectrum(lam, n)
    np.testing.assert_allclose(spec.expand(), _kron_spectrum(np.asarray(lam), n), atol=1e-15)
    assert spec.total_mass == pytest.approx(1.0, abs=1e-12)


def test_binomial_multiplicities_are_exact():
    spec = tensor_power_spectrum([0.8, 0.2], 30)
    assert [c for _, c in spec.runs] == [math.comb(30, k) for k in range(31)]


def test_capacity_guard():
    with pytest.raises(CapacityError):
        tensor_power_spectrum(np.full(6, 1 / 6) + np.linspace(-0.01, 0.01, 6), 60, limit=1000)


def test_pmax_runlength_examples():
    assert pmax_runlength(tensor_power_spectrum([0.8, 0.2], 1), 2) == pytest.approx(0.4)
    assert pmax_runlength(tensor_power_spectrum([0.5, 0.5], 4), 16) == pytest.approx(1.0)
    assert pmax_runlength(tensor_power_spectrum([0.8, 0.2], 10), 2) == pytest.approx(1.0)
    assert pmax_runlength(tensor_power_spectrum([0.8, 0.2], 3), 9) == 0.0


def test_pmax_runlength_matches_expansion():
    for lam in ([0.8, 0.2], [0.6, 0.3, 0.1], [0.5, 0.25, 0.25]):
        for n in range(1, 9):
            spec = tensor_power_spectrum(lam, n)
            flat = spec.expand()
            for m in range(1, len(flat) + 1):
                assert abs(pmax_runlength(spec, m) - bound_table(flat, m).p_max) < 1e-12


def test_runlength_from_values_groups_ties():
    spec = RunLengthSpectrum.from_values([0.3, 0.3, 0.2, 0.2])
    assert spec.runs == ((0.3, 2), (0.2, 2))
    assert spec.size == 4


@settings(max_examples=80, deadline=None)
@given(st.lists(st.floats(0.001, 1.0), min_size=1, max_size=8), st.data())
def test_pmax_in_unit_interval_and_non_increasing(weights, data):
    lam = np.asarray(weights) / np.sum(weights)
    vals = [bound_table(lam, m).p_max for m in range(1, len(lam) + 2)]
    assert all(0.0 <= v <= 1.0 for v in vals)
    assert vals[0] == pytest.approx(1.0)
    assert np.all(np.diff(vals) <= 1e-12)
    m = data.draw(st.integers(1, len(lam)))
    runs = RunLengthSpectrum.from_values(lam)
    assert pmax_runlength(runs, m) == pytest.approx(bound_table(lam, m).p_max, abs=1e-12)
