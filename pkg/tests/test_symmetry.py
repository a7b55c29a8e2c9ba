import numpy as np
import pytest

from schmidt_forge.bounds import p_max
from schmidt_forge.errors import DegenerateOutcomeError, PreconditionError
from schmidt_forge.states import from_schmidt, random_state, spectrum
from schmidt_forge.symmetry import (
    communication_necessity_demo,
    is_unitary,
    necessity_report,
    transfer_bob_to_alice,
    uhlmann_fidelity,
)


def test_diagonal_projector():
    state = from_schmidt([0.8, 0.2])
    res = transfer_bob_to_alice(state, np.diag([1.0, 0.0]))
    np.testing.assert_allclose(res.p_alice, np.diag([1.0, 0.0]), atol=1e-14)
    np.testing.assert_allclose(res.u_a, np.eye(2), atol=1e-14)
    np.testing.assert_allclose(res.u_b, np.eye(2), atol=1e-14)
    assert res.residual_error < 1e-14
    assert res.literal


def test_plus_projector():
    state = from_schmidt([0.8, 0.2])
    plus = np.array([1.0, 1.0]) / np.sqrt(2)
    res = transfer_bob_to_alice(state, np.outer(plus, plus))
    assert res.residual_error < 1e-9
    np.testing.assert_allclose(spectrum(res.bob_amplitudes), [1.0])
    assert np.sum(np.abs(res.bob_amplitudes) ** 2) == pytest.approx(0.5)


def _random_rank_deficient(dim, rng):
    r = int(rng.integers(1, dim + 1))
    g = rng.normal(size=(dim, r)) + 1j * rng.normal(size=(dim, r))
    h = rng.normal(size=(r, dim)) + 1j * rng.normal(size=(r, dim))
    return g @ h


def test_random_transfers(rng):
    worst = 0.0
    for _ in range(150):
        da, db = int(rng.integers(1, 7)), int(rng.integers(1, 7))
        rank = int(rng.integers(1, min(da, db) + 1))
        state = random_state(da, db, rank=rank, rng=rng)
        op = _random_rank_deficient(db, rng)
        try:
            res = transfer_bob_to_alice(state, op)
        except DegenerateOutcomeError:
            continue
        assert is_unitary(res.u_a) and is_unitary(res.u_b)
        worst = max(worst, res.residual_error)
        sb, sa = spectrum(res.bob_amplitudes, normalize=False), spectrum(res.alice_amplitudes, normalize=False)
        assert len(sb) == len(sa)
        np.testing.assert_allclose(sb, sa, atol=1e-9)
    assert worst < 1e-9


def test_annihilating_operator():
    with pytest.raises(DegenerateOutcomeError):
        transfer_bob_to_alice(from_schmidt([0.5, 0.5], 2, 3), np.diag([0, 0, 1.0]))


def test_necessity_at_point_eight():
    rep = necessity_report(0.8)
    np.testing.assert_allclose(rep.rho_success, 0.2 * np.eye(2), atol=1e-14)
    np.testing.assert_allclose(rep.rho_failure, np.diag([0.6, 0.0]), atol=1e-14)
    np.testing.assert_allclose(rep.rho_success + rep.rho_failure, np.diag([0.8, 0.2]), atol=1e-14)
    assert rep.support_fidelity_positive


@pytest.mark.parametrize("a2", [0.51, 0.6, 0.8, 0.95])
def test_necessity_demo(a2):
    err, positive = communication_necessity_demo(a2)
    assert err < 1e-10 and positive
    assert necessity_report(a2).success_probability == pytest.approx(2 * (1 - a2))
    assert necessity_report(a2).success_probability == pytest.approx(p_max([a2, 1 - a2], 2))


@pytest.mark.parametrize("a2", [0.5, 1.0, 0.3])
def test_necessity_domain(a2):
    with pytest.raises(PreconditionError):
        necessity_report(a2)


def test_uhlmann_fidelity_bounds():
    a = np.diag([1.0, 0.0])
    b = np.diag([0.0, 1.0])
    assert uhlmann_fidelity(a, b) == pytest.approx(0.0, abs=1e-14)
    assert uhlmann_fidelity(a, a) == pytest.approx(1.0)
    assert uhlmann_fidelity(np.eye(2) / 2, a) == pytest.approx(0.5)
