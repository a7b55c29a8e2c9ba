"""Transfer of Bob-side operators to Alice, and the causality argument for communication.

For ``|psi> = sum_k sqrt(l_k)|a_k>|b_k>`` and a Bob operator with matrix
elements ``m_ij = <b_i|P|b_j>``, Alice applies ``sum m_ij |a_i><a_j|``; the two
post-measurement states differ only by local unitaries built from the
singular vectors of the transferred state.
"""

from dataclasses import dataclass

import numpy as np

from .compiler import compile_strategy
from .errors import DegenerateOutcomeError, PreconditionError
from .states import RANK_TOL, BipartitePureState, complete_basis, from_schmidt, partial_trace_a, schmidt_decompose, spectrum

ZERO_TOL = 1e-14


@dataclass(frozen=True, eq=False)
class TransferResult:
    p_alice: np.ndarray
    u_a: np.ndarray
    u_b: np.ndarray
    residual_error: float
    bob_amplitudes: np.ndarray
    alice_amplitudes: np.ndarray
    literal: bool

    def as_dict(self):
        from .io import matrix_to_json

        return {
            "p_alice": matrix_to_json(self.p_alice),
            "u_a": matrix_to_json(self.u_a),
            "u_b": matrix_to_json(self.u_b),
            "residual_error": self.residual_error,
            "spectrum_bob": spectrum(self.bob_amplitudes).tolist(),
            "spectrum_alice": spectrum(self.alice_amplitudes).tolist(),
            "literal": self.literal,
        }


def transfer_bob_to_alice(state, p_bob, rank_tol=RANK_TOL):
    """Alice-side operator and local unitaries reproducing Bob's measurement outcome.

    Returns a result whose ``residual_error`` is
    ``|| (1 x P_bob)|psi> - (u_a x u_b)(P_alice x 1)|psi> ||``.

    When ``P_bob`` maps Bob's Schmidt support outside itself, its matrix on
    that support is first compressed by a QR factorization so the transferred
    operator fits Alice's support.
    """
    if not isinstance(state, BipartitePureState):
        state = BipartitePureState(state)
    p_bob = np.asarray(p_bob, dtype=complex)
    sd = schmidt_decompose(state, rank_tol)
    n = sd.rank
    a_n, b_n = sd.basis_a, sd.basis_b
    b_full = complete_basis(b_n, sd.dim_b)
    sqrt_l = np.sqrt(sd.lambdas)

    # Bob acts on |b_j> as the column b_j; coordinates in the b basis.
    # P|b_j> = sum_i m_ij |b_i> with m_ij = b_i^H P b_j.
    m_full = b_full.conj().T @ p_bob @ b_n
    literal = bool(np.all(np.abs(m_full[n:]) <= 1e-12))
    if literal:
        core = m_full[:n]
        bob_out = b_n
    else:
        q, core = np.linalg.qr(m_full)
        bob_out = b_full @ q

    p_alice = a_n @ core @ a_n.conj().T
    amp_bob = state.amplitudes @ p_bob.T
    amp_alice = p_alice @ state.amplitudes
    if np.sum(np.abs(amp_bob) ** 2) <= ZERO_TOL and np.sum(np.abs(amp_alice) ** 2) <= ZERO_TOL:
        raise DegenerateOutcomeError("the operator annihilates the state on both sides")

    # Transferred state in Schmidt coordinates: Y[i, k] = core[i, k] sqrt(l_k).
    y = core * sqrt_l
    g, _, hh = np.linalg.svd(y)
    # U Y V^T = S with U = G^H and V = conj(H^H).
    u_core = g.conj().T
    v_core = hh.conj()
    ua_core = v_core.conj().T @ u_core
    ub_core = u_core.conj().T @ v_core

    u_a = a_n @ ua_core @ a_n.conj().T + (np.eye(sd.dim_a) - a_n @ a_n.conj().T)
    # Bob: maps b_k (k <= n) to sum_j ub_core[j, k] bob_out_j, completed canonically.
    b_out_full = complete_basis(bob_out, sd.dim_b)
    u_b = bob_out @ ub_core @ b_n.conj().T + b_out_full[:, n:] @ b_full[:, n:].conj().T

    resid = float(np.linalg.norm(amp_bob - u_a @ amp_alice @ u_b.T))
    return TransferResult(p_alice, u_a, u_b, resid, amp_bob, amp_alice, literal)


def is_unitary(u, tol=1e-10):
    return bool(np.linalg.norm(u.conj().T @ u - np.eye(u.shape[0]), 2) <= tol)


def psd_sqrt(rho):
    w, v = np.linalg.eigh((rho + rho.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T


def uhlmann_fidelity(rho, sigma):
    s = psd_sqrt(rho)
    inner = s @ sigma @ s
    return float(np.real(np.trace(psd_sqrt(inner))) ** 2)


@dataclass(frozen=True, eq=False)
class NecessityReport:
    a2: float
    rho_initial: np.ndarray
    rho_success: np.ndarray
    rho_failure: np.ndarray
    rho_sum_error: float
    support_fidelity: float
    support_fidelity_positive: bool
    success_probability: float

    def as_dict(self):
        from .io import matrix_to_json

        return {
            "a2": self.a2,
            "rho_initial": matrix_to_json(self.rho_initial),
            "rho_success": matrix_to_json(self.rho_success),
            "rho_failure": matrix_to_json(self.rho_failure),
            "rho_sum_error": self.rho_sum_error,
            "support_fidelity": self.support_fidelity,
            "support_fidelity_positive": self.support_fidelity_positive,
            "success_probability": self.success_probability,
        }


def bob_verdict_operators(strategy, state):
    """Bob's unnormalized reduced operators summed over success and failure branches."""
    amps = state.amplitudes
    dim = amps.shape[1]
    succ = np.zeros((dim, dim), complex)
    fail = np.zeros((dim, dim), complex)
    for br in strategy.branches:
        rho = partial_trace_a(br.kraus @ amps).matrix
        if br.verdict == "success":
            succ = succ + rho
        else:
            fail = fail + rho
    return succ, fail


def communication_necessity(state, m=2, threshold=1e-10):
    """Causality conservation and verdict overlap on Bob's side for the optimal strategy."""
    strategy = compile_strategy(state, m)
    succ, fail = bob_verdict_operators(strategy, state)
    initial = partial_trace_a(state).matrix
    err = float(np.linalg.norm(succ + fail - initial, 2))
    ts, tf = np.real(np.trace(succ)), np.real(np.trace(fail))
    fid = uhlmann_fidelity(succ / ts, fail / tf) if ts > 0 and tf > 0 else 0.0
    return strategy, initial, succ, fail, err, fid, fid > threshold


def communication_necessity_demo(a2):
    """Two-term example ``sqrt(a2)|11> + sqrt(1-a2)|22>`` with ``1/2 < a2 < 1``.

    Returns ``(rho_sum_error, support_fidelity_positive)`` for the optimal
    singlet strategy; ``necessity_report`` gives the full breakdown.
    """
    rep = necessity_report(a2)
    return rep.rho_sum_error, rep.support_fidelity_positive


def necessity_report(a2):
    if not 0.5 < a2 < 1.0:
        raise PreconditionError("need 1/2 < a2 < 1 so that the optimal probability lies strictly between 0 and 1")
    state = from_schmidt([a2, 1.0 - a2])
    strategy, initial, succ, fail, err, fid, positive = communication_necessity(state, 2)
    return NecessityReport(a2, initial, succ, fail, err, fid, bool(positive), strategy.success_probability)
