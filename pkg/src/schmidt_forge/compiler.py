"""Compilation of the optimal concentration protocol into Alice-side branches.

Every step of the protocol is diagonal in the Schmidt basis of the input
state, so the compiler works on weight vectors ``D`` (one entry per Schmidt
term).  A branch's Kraus operator is ``basis_a @ diag(D) @ basis_a^H`` and its
unnormalized output has Schmidt weights ``D**2 * lambdas``.

Tree structure
--------------
* more target dimensions than Schmidt terms: one failure branch (identity);
* largest coefficient above ``1/m``: a two-outcome trim, whose success piece
  is handled as below and whose failure piece keeps fewer than ``m`` terms;
* otherwise: repeated two-outcome splits into a precursor and a residual with
  one more coefficient tied to the ``m``-th; precursors are reduced with
  certainty, and the final fully tied residual is reduced by discarding terms
  one at a time.

Reduction outcomes that lead to identical output states are merged into one
Kraus operator ``sqrt(sum K^H K)``, which keeps branch counts polynomial.
"""

from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .bounds import bound_table, ordered_spectrum
from .errors import NoOpError, ParameterError, PreconditionError, ToleranceError
from .states import (
    RANK_TOL,
    BipartitePureState,
    SchmidtDecomposition,
    complete_basis,
    from_schmidt,
    schmidt_decompose,
)

DEGENERACY_TOL = 1e-9
CASE_A_SLACK = 1e-10

SUCCESS = "success"
FAILURE = "failure"


@dataclass(frozen=True, eq=False)
class MeasurementStep:
    """Generalized measurement on Alice's particle (ancilla already absorbed)."""

    operators: tuple
    labels: tuple

    def __len__(self):
        return len(self.operators)

    def completeness_residual(self, support=None):
        """Spectral-norm deviation of ``sum K^H K`` from the identity on ``support``."""
        dim = self.operators[0].shape[1]
        total = sum(k.conj().T @ k for k in self.operators)
        if support is None:
            proj = np.eye(dim)
        else:
            proj = np.zeros((dim, dim))
            idx = np.asarray(support)
            proj[idx, idx] = 1.0
        return float(np.linalg.norm(proj @ total @ proj - proj, 2))

    def diagonals(self):
        return [np.real(np.diag(k)).copy() for k in self.operators]


@dataclass(frozen=True, eq=False)
class StrategyBranch:
    label: str
    verdict: str
    probability: float
    kraus: np.ndarray
    u_a: np.ndarray
    u_b: np.ndarray
    weights: np.ndarray = field(repr=False)
    support: tuple = ()


@dataclass(frozen=True, eq=False)
class CompiledStrategy:
    input_spectrum: np.ndarray
    m: int
    branches: tuple
    success_probability: float
    basis_a: np.ndarray = field(repr=False)
    basis_b: np.ndarray = field(repr=False)

    @property
    def dim_a(self):
        return self.basis_a.shape[0]

    @property
    def dim_b(self):
        return self.basis_b.shape[0]

    def reference_state(self):
        amps = (self.basis_a * np.sqrt(self.input_spectrum)) @ self.basis_b.T
        return BipartitePureState(amps, 1e-8)

    def success_branches(self):
        return [b for b in self.branches if b.verdict == SUCCESS]

    def failure_branches(self):
        return [b for b in self.branches if b.verdict == FAILURE]

    def completeness_residual(self):
        """Deviation of ``sum K^H K`` from the projector on Alice's input support."""
        proj = self.basis_a @ self.basis_a.conj().T
        total = sum(b.kraus.conj().T @ b.kraus for b in self.branches)
        return float(np.linalg.norm(proj @ total @ proj - proj, 2))

    def bind(self, sd):
        """Re-express the strategy in the Schmidt bases of another decomposition."""
        return _assemble(sd, self.m, [(b.weights, b.verdict, b.support, b.label) for b in self.branches])


# ---------------------------------------------------------------------------
# elementary steps


def _diag_step(diagonals, labels):
    return MeasurementStep(tuple(np.diag(np.asarray(d, dtype=complex)) for d in diagonals), tuple(labels))


@lru_cache(maxsize=None)
def _lemma2_diagonals(k):
    out = []
    for i in range(k):
        d = np.full(k, 1.0 / np.sqrt(k - 1))
        d[i] = 0.0
        d.setflags(write=False)
        out.append(d)
    return tuple(out)


def lemma2_step(k):
    """Reduce a rank-``k`` maximally entangled state to rank ``k - 1`` with certainty.

    Outcome ``i`` keeps every basis vector except the ``i``-th, each with
    amplitude factor ``1/sqrt(k-1)``.
    """
    if k < 2:
        raise ParameterError("lemma2_step needs k >= 2")
    return _diag_step(_lemma2_diagonals(k), [str(i) for i in range(k)])


@lru_cache(maxsize=None)
def _lemma3_diagonals(m, p, q):
    head = m - p
    width = p + q
    out = []
    for i in range(width):
        d = np.empty(m + q)
        d[:head] = 1.0 / np.sqrt(width)
        d[head:] = 1.0 / np.sqrt(width - 1)
        d[head + i] = 0.0
        d.setflags(write=False)
        out.append(d)
    return tuple(out)


def lemma3_step(m, p, q):
    """Lower a precursor from ``(m, p, q)`` to ``(m, p, q - 1)`` with certainty."""
    if p <= 0 or p > m or q < 0:
        raise ParameterError(f"invalid precursor parameters m={m}, p={p}, q={q}")
    if q == 0:
        raise NoOpError("a precursor with q = 0 is already maximally entangled")
    return _diag_step(_lemma3_diagonals(m, p, q), [str(i) for i in range(p + q)])


@dataclass(frozen=True)
class Block:
    """Run of coefficients tied with the ``m``-th one (0-based ``lo..hi``)."""

    lo: int
    hi: int
    m: int

    @property
    def p(self):
        return self.m - self.lo

    @property
    def q(self):
        return self.hi - (self.m - 1)


def find_block(rho, m, tol=DEGENERACY_TOL):
    ref = rho[m - 1]
    lo = m - 1
    while lo > 0 and abs(rho[lo - 1] - ref) <= tol:
        lo -= 1
    hi = m - 1
    while hi + 1 < len(rho) and abs(rho[hi + 1] - ref) <= tol:
        hi += 1
    return Block(lo, hi, m)


def _split_amount(rho, blk):
    m, p, q = blk.m, blk.p, blk.q
    value = float(np.mean(rho[blk.lo: blk.hi + 1]))
    candidates = []
    if q > 0 and blk.lo > 0:
        candidates.append(m * (p + q) / q * (rho[blk.lo - 1] - value))
    below = rho[blk.hi + 1] if blk.hi + 1 < len(rho) else 0.0
    candidates.append(m * (p + q) / p * (value - below))
    return float(min(candidates))


def _normalized(lambdas):
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0 or np.any(lam < 0) or lam.sum() <= 0:
        raise ParameterError("spectrum must be nonnegative with positive mass")
    return lam / lam.sum()


def case_a_step(lambdas, m, degeneracy_tol=DEGENERACY_TOL):
    """One split of a certain-regime spectrum into a precursor and a residual.

    Returns ``(step, (m, p, q), residual)``. Outcome ``"1"`` produces the
    precursor with probability ``a``; outcome ``"0"`` the normalized
    ``residual`` whose tied block around the ``m``-th coefficient is larger.
    """
    rho = _normalized(lambdas)
    n = len(rho)
    if m < 1 or m > n:
        raise PreconditionError(f"m={m} outside 1..{n}")
    if np.any(np.diff(rho) > degeneracy_tol):
        raise PreconditionError("spectrum must be sorted non-increasing")
    if rho[0] > 1.0 / m + CASE_A_SLACK:
        raise PreconditionError(f"largest coefficient {rho[0]!r} exceeds 1/m")
    blk = find_block(rho, m, degeneracy_tol)
    if blk.lo == 0 and blk.hi == n - 1:
        raise PreconditionError("spectrum is already fully degenerate")
    a = _split_amount(rho, blk)
    m_, p, q = m, blk.p, blk.q
    cut = np.zeros(n)
    cut[: blk.lo] = a / m
    cut[blk.lo: blk.hi + 1] = (a / m) * (p / (p + q))
    residual = np.clip(rho - cut, 0.0, None)
    # Re-tie the grown block exactly so tolerance does not drift.
    if a < 1.0 - 1e-12:
        res_n = residual / residual.sum()
        grown = find_block(res_n, m, degeneracy_tol)
        residual[grown.lo: grown.hi + 1] = np.mean(residual[grown.lo: grown.hi + 1])
    with np.errstate(divide="ignore", invalid="ignore"):
        d0 = np.where(rho > 0, np.sqrt(np.clip(residual / rho, 0.0, 1.0)), 0.0)
    d1 = np.sqrt(np.clip(1.0 - d0 ** 2, 0.0, 1.0))
    d1[blk.hi + 1:] = 0.0
    step = _diag_step([d1, d0], ["1", "0"])
    total = residual.sum()
    res_norm = residual / total if total > 0 else residual
    return step, (m_, p, q), res_norm


def case_b_trim(lambdas, m):
    """Two-outcome trim capping the largest ``m - r1`` coefficients at ``lambda_max``."""
    rho = _normalized(lambdas)
    table = bound_table(rho, m)
    if rho[0] <= 1.0 / m + 1e-12:
        raise PreconditionError("trim is only defined when the optimal probability is below one")
    k = m - table.r1
    lam_max = table.lambda_max
    succ = np.ones(len(rho))
    fail = np.zeros(len(rho))
    succ[:k] = np.sqrt(lam_max / rho[:k])
    fail[:k] = np.sqrt(np.clip((rho[:k] - lam_max) / rho[:k], 0.0, 1.0))
    return _diag_step([succ, fail], [SUCCESS, FAILURE])


# ---------------------------------------------------------------------------
# tree expansion in Schmidt coordinates


def _lift(local, support, n):
    full = np.zeros(n)
    full[list(support)] = local
    return full


def _merge(states):
    merged = {}
    order = []
    for key, weights, label in states:
        if key in merged:
            prev_w, prev_label = merged[key]
            merged[key] = (np.sqrt(prev_w ** 2 + weights ** 2), prev_label)
        else:
            merged[key] = (weights, label)
            order.append(key)
    return [(key, *merged[key]) for key in order]


def _lemma2_chain(D, support, m, label):
    """Discard terms one at a time until ``m`` remain; equal supports are merged."""
    n = len(D)
    states = [(tuple(support), D, label)]
    for k in range(len(support), m, -1):
        step = _lemma2_diagonals(k)
        nxt = []
        for sup, w, lab in states:
            for i, d in enumerate(step):
                new_sup = sup[:i] + sup[i + 1:]
                nxt.append((new_sup, w * _lift(d, sup, n), lab))
        states = _merge(nxt)
    return [(w, SUCCESS, sup, f"{lab}/keep:{','.join(map(str, sup))}") for sup, w, lab in states]


def _lemma3_chain(D, support, m, p, q, label):
    n = len(D)
    head = tuple(support[: m - p])
    states = [(tuple(support[m - p:]), D, label)]
    for qq in range(q, 0, -1):
        step = _lemma3_diagonals(m, p, qq)
        nxt = []
        for tail, w, lab in states:
            sup = head + tail
            for i, d in enumerate(step):
                new_tail = tail[:i] + tail[i + 1:]
                nxt.append((new_tail, w * _lift(d, sup, n), lab))
        states = _merge(nxt)
    return [(w, SUCCESS, head + tail, f"{lab}/keep:{','.join(map(str, head + tail))}") for tail, w, lab in states]


@dataclass
class CaseATrace:
    """Record of the certain-regime iterations, for inspection and tests."""

    amounts: list = field(default_factory=list)
    precursors: list = field(default_factory=list)
    residuals: list = field(default_factory=list)


def _case_a_leaves(lam, D, m, label, degeneracy_tol, trace=None):
    n = len(lam)
    leaves = []
    support = tuple(range(n))
    for it in range(n + 1):
        w = D ** 2 * lam
        rho = w / w.sum()
        blk = find_block(rho, m, degeneracy_tol)
        if blk.lo == 0 and blk.hi == n - 1:
            leaves += _lemma2_chain(D, support, m, f"{label}/uniform")
            return leaves
        a = _split_amount(rho, blk)
        if a >= 1.0 - 1e-12:
            # Already a precursor.
            if trace is not None:
                trace.amounts.append(1.0)
                trace.precursors.append((m, blk.p, blk.q))
            leaves += _lemma3_chain(D, support[: blk.hi + 1], m, blk.p, blk.q, f"{label}/pre")
            return leaves
        if it == n:
            break
        step, params, residual = case_a_step(rho, m, degeneracy_tol)
        d1, d0 = step.diagonals()
        if trace is not None:
            trace.amounts.append(a)
            trace.precursors.append(params)
            trace.residuals.append(residual)
        _, p, q = params
        leaves += _lemma3_chain(D * d1, support[: blk.hi + 1], m, p, q, f"{label}/a{it}:1")
        D = D * d0
        label = f"{label}/a{it}:0"
    raise ToleranceError(
        f"no fully tied residual after {n} splits (m={m}, degeneracy_tol={degeneracy_tol}); "
        f"last residual {(D ** 2 * lam / np.sum(D ** 2 * lam)).tolist()}"
    )


def _decompose_source(source, rank_tol):
    if isinstance(source, SchmidtDecomposition):
        return source
    if isinstance(source, BipartitePureState):
        return schmidt_decompose(source, rank_tol)
    return schmidt_decompose(from_schmidt(ordered_spectrum(source)), rank_tol)


def _unitary_to_front(basis, support, dim):
    # Columns ordered: chosen support, remaining Schmidt vectors, completion.
    n = basis.shape[1]
    rest = [i for i in range(n) if i not in set(support)]
    cols = basis[:, list(support) + rest]
    full = complete_basis(cols, dim)
    return full.conj().T


def _assemble(sd, m, leaves):
    lam = np.asarray(sd.lambdas, float)
    a, b = sd.basis_a, sd.basis_b
    ident_a = np.eye(sd.dim_a, dtype=complex)
    ident_b = np.eye(sd.dim_b, dtype=complex)
    branches = []
    success = 0.0
    for i, (w, verdict, support, label) in enumerate(leaves):
        w = np.asarray(w, float)
        kraus = (a * w) @ a.conj().T
        prob = float(np.sum(w ** 2 * lam))
        if verdict == SUCCESS:
            u_a = _unitary_to_front(a, support, sd.dim_a)
            u_b = _unitary_to_front(b, support, sd.dim_b)
            success += prob
        else:
            u_a, u_b = ident_a, ident_b
        w = w.copy()
        w.setflags(write=False)
        branches.append(StrategyBranch(f"b{i:04d}:{label}", verdict, prob, kraus, u_a, u_b, w, tuple(support)))
    return CompiledStrategy(lam, m, tuple(branches), success, a, b)


def compile_leaves(lambdas, m, degeneracy_tol=DEGENERACY_TOL, trace=None):
    """Expand the protocol tree into ``(weights, verdict, support, label)`` leaves."""
    lam = np.asarray(lambdas, float)
    n = len(lam)
    ones = np.ones(n)
    if m < 1:
        raise ParameterError("m must be at least 1")
    if m > n:
        return [(ones, FAILURE, (), "rank")]
    if lam[0] <= 1.0 / m + 1e-12:
        return _case_a_leaves(lam, ones, m, "A", degeneracy_tol, trace)
    d_succ, d_fail = case_b_trim(lam, m).diagonals()
    leaves = _case_a_leaves(lam, d_succ, m, "trim:1", degeneracy_tol, trace)
    leaves.append((d_fail, FAILURE, (), "trim:0"))
    return leaves


def compile_strategy(source, m, degeneracy_tol=DEGENERACY_TOL, rank_tol=RANK_TOL, trace=None):
    """Compile the optimal protocol for a state, decomposition or spectrum.

    Parameters
    ----------
    source : BipartitePureState, SchmidtDecomposition or sequence of float
        A bare spectrum compiles against the canonical state ``sum sqrt(l_i)|ii>``.
    m : int
        Target Schmidt rank of the maximally entangled output.
    degeneracy_tol : float
        Coefficients closer than this (absolute) count as tied.
    trace : CaseATrace, optional
        Filled with the split amounts, precursor parameters and residuals.
    """
    sd = _decompose_source(source, rank_tol)
    leaves = compile_leaves(sd.lambdas, int(m), degeneracy_tol, trace)
    return _assemble(sd, int(m), leaves)


def strategy_from_weights(source, m, leaves, rank_tol=RANK_TOL):
    """Build a strategy from explicit Schmidt-coordinate leaves.

    Success leaves must carry the ``m`` kept Schmidt indices as ``support``.
    """
    sd = _decompose_source(source, rank_tol)
    return _assemble(sd, int(m), list(leaves))


def with_success_probability(strategy, value):
    return replace(strategy, success_probability=float(value))
