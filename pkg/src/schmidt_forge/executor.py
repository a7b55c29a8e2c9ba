"""Exact and sampled execution of compiled strategies."""

from dataclasses import dataclass

import numpy as np

from .compiler import SUCCESS
from .errors import ParameterError, StateMismatchError
from .states import RANK_TOL, BipartitePureState, make_me_state, schmidt_decompose, spectrum

MATCH_TOL = 1e-8
VERDICT_TOL = 1e-8
NULL_BRANCH = 1e-14
SHOTS_PER_CHUNK = 10_000


@dataclass(frozen=True)
class BranchResult:
    label: str
    verdict: str
    probability: float
    output_spectrum: tuple
    verdict_verified: bool
    checked: bool
    target_fidelity: float = float("nan")


@dataclass(frozen=True)
class ExecutionReport:
    m: int
    branch_results: tuple
    total_success: float
    completeness_residual: float

    @property
    def total_probability(self):
        return sum(b.probability for b in self.branch_results)

    @property
    def all_verified(self):
        return all(b.verdict_verified for b in self.branch_results)

    def as_dict(self):
        return {
            "m": self.m,
            "total_success": self.total_success,
            "total_probability": self.total_probability,
            "completeness_residual": self.completeness_residual,
            "branches": [
                {
                    "label": b.label,
                    "verdict": b.verdict,
                    "probability": b.probability,
                    "output_spectrum": list(b.output_spectrum),
                    "verdict_verified": b.verdict_verified,
                    "checked": b.checked,
                    "target_fidelity": None if np.isnan(b.target_fidelity) else b.target_fidelity,
                }
                for b in self.branch_results
            ],
        }


def _as_state(state):
    return state if isinstance(state, BipartitePureState) else BipartitePureState(state)


def _bound_to(strategy, state, rank_tol):
    sd = schmidt_decompose(state, rank_tol)
    ref = np.asarray(strategy.input_spectrum)
    if sd.rank != len(ref) or np.max(np.abs(sd.lambdas - ref)) > MATCH_TOL:
        raise StateMismatchError(
            f"state spectrum {sd.lambdas.tolist()} does not match the compiled spectrum {ref.tolist()}"
        )
    same_dims = (state.dim_a, state.dim_b) == (strategy.dim_a, strategy.dim_b)
    if same_dims and np.allclose(strategy.reference_state().amplitudes, state.amplitudes, atol=1e-12):
        return strategy, sd
    return strategy.bind(sd), sd


def execute_exact(strategy, state, rank_tol=RANK_TOL):
    """Apply every branch to ``state`` and verify probabilities and verdicts.

    A strategy compiled for different Schmidt bases but an equal spectrum is
    re-expressed in the bases of ``state`` first.
    """
    state = _as_state(state)
    strat, sd = _bound_to(strategy, state, rank_tol)
    amps = state.amplitudes
    m = strat.m
    target = None
    results = []
    total_success = 0.0
    for br in strat.branches:
        out = br.kraus @ amps
        prob = float(np.sum(np.abs(out) ** 2))
        checked = prob > NULL_BRANCH
        lam = spectrum(out, rank_tol) if checked else np.zeros(0)
        fid = float("nan")
        if not checked:
            ok = True
        elif br.verdict == SUCCESS:
            ok = len(lam) == m and bool(np.all(np.abs(lam - 1.0 / m) <= VERDICT_TOL))
            post = br.u_a @ out @ br.u_b.T / np.sqrt(prob)
            if target is None:
                target = make_me_state(m, state.dim_a, state.dim_b).amplitudes
            fid = float(abs(np.vdot(target, post)) ** 2)
        else:
            ok = len(lam) < m
        if br.verdict == SUCCESS:
            total_success += prob
        results.append(BranchResult(br.label, br.verdict, prob, tuple(float(x) for x in lam), bool(ok), checked, fid))
    proj = sd.basis_a @ sd.basis_a.conj().T
    total = sum(b.kraus.conj().T @ b.kraus for b in strat.branches)
    resid = float(np.linalg.norm(proj @ total @ proj - proj, 2))
    return ExecutionReport(m, tuple(results), total_success, resid)


def _chunk_counts(probs, shots, seed_seq):
    rng = np.random.Generator(np.random.Philox(seed_seq))
    return rng.multinomial(shots, probs)


def sample(strategy, state, shots, seed, jobs=1):
    """Monte Carlo histogram of branch labels.

    Shots are cut into fixed chunks, each drawn from a Philox generator keyed
    by a spawned child of ``seed``; the result does not depend on ``jobs``.
    """
    if shots < 1:
        raise ParameterError("shots must be positive")
    report = execute_exact(strategy, state)
    probs = np.array([b.probability for b in report.branch_results])
    probs = np.clip(probs, 0.0, None)
    probs = probs / probs.sum()
    n_chunks = -(-shots // SHOTS_PER_CHUNK)
    sizes = [SHOTS_PER_CHUNK] * (n_chunks - 1) + [shots - SHOTS_PER_CHUNK * (n_chunks - 1)]
    children = np.random.SeedSequence(int(seed) & (2 ** 64 - 1)).spawn(n_chunks)
    if jobs > 1 and n_chunks > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(lambda a: _chunk_counts(probs, *a), zip(sizes, children)))
    else:
        parts = [_chunk_counts(probs, n, c) for n, c in zip(sizes, children)]
    counts = np.sum(parts, axis=0)
    return {b.label: int(c) for b, c in zip(report.branch_results, counts)}


def success_count(histogram, strategy):
    verdict = {b.label: b.verdict for b in strategy.branches}
    return sum(c for label, c in histogram.items() if verdict.get(label) == SUCCESS)


def _random_contraction(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    g = g / (np.linalg.norm(g, 2) * (1.0 + rng.uniform(0.0, 1.0)))
    h = np.eye(dim) - g.conj().T @ g
    w, v = np.linalg.eigh(h)
    comp = (v * np.sqrt(np.clip(w, 0.0, None))) @ v.conj().T
    return g, comp


def random_local_measurement_check(state, trials, seed, rank_tol=RANK_TOL):
    """Random two-outcome Alice measurements never raise the Schmidt rank."""
    state = _as_state(state)
    rng = np.random.default_rng(seed)
    rank_in = len(spectrum(state.amplitudes, rank_tol))
    for _ in range(trials):
        for k in _random_contraction(state.dim_a, rng):
            out = k @ state.amplitudes
            if np.sum(np.abs(out) ** 2) <= NULL_BRANCH:
                continue
            if len(spectrum(out, rank_tol)) > rank_in:
                return False
    return True
