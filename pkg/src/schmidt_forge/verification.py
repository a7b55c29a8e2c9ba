"""Invariant suite over a random corpus of states (backs the ``verify`` command)."""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import unitary_group

from .bounds import bound_table, case_a_criterion, check_lemma4_shape, check_lemma5_shape
from .compiler import DEGENERACY_TOL, CaseATrace, compile_strategy
from .executor import execute_exact
from .states import RANK_TOL, BipartitePureState, random_spectrum, schmidt_decompose


@dataclass
class CheckTally:
    passed: dict = field(default_factory=dict)
    failed: dict = field(default_factory=dict)
    examples: list = field(default_factory=list)

    def record(self, name, ok, detail=""):
        book = self.passed if ok else self.failed
        book[name] = book.get(name, 0) + 1
        if not ok and len(self.examples) < 20:
            self.examples.append(f"{name}: {detail}")

    @property
    def ok(self):
        return not self.failed

    def as_dict(self):
        names = sorted(set(self.passed) | set(self.failed))
        return {
            "ok": self.ok,
            "checks": {k: {"passed": self.passed.get(k, 0), "failed": self.failed.get(k, 0)} for k in names},
            "failures": list(self.examples),
        }


def random_corpus(count, seed, max_rank=8, extra_dims=2):
    """States with random spectra (rank <= ``max_rank``) in random local bases."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, max_rank + 1))
        lam = random_spectrum(n, rng)
        da = n + int(rng.integers(0, extra_dims + 1))
        db = n + int(rng.integers(0, extra_dims + 1))
        amps = np.zeros((da, db), complex)
        amps[np.arange(n), np.arange(n)] = np.sqrt(lam)
        ua = unitary_group.rvs(da, random_state=rng) if da > 1 else np.eye(1)
        ub = unitary_group.rvs(db, random_state=rng) if db > 1 else np.eye(1)
        out.append(BipartitePureState(ua @ amps @ ub.T))
    return out


def check_instance(state, m, tally, degeneracy_tol=DEGENERACY_TOL, rank_tol=RANK_TOL):
    sd = schmidt_decompose(state, rank_tol)
    lam = sd.lambdas
    n = sd.rank
    table = bound_table(lam, m)
    tag = f"N={n} m={m} lambdas={np.round(lam, 6).tolist()}"
    tally.record("lemma4_shape", check_lemma4_shape(table.b_values), tag)
    if m <= n:
        tally.record("lemma5_shape", check_lemma5_shape(table), tag)
    if lam[0] < 1.0 / m - 1e-9 or lam[0] > 1.0 / m + 1e-9:
        tally.record("case_a_equivalence", case_a_criterion(lam, m) == (table.p_max >= 1 - 1e-9), tag)

    trace = CaseATrace()
    strat = compile_strategy(state, m, degeneracy_tol, rank_tol, trace)
    tally.record("completeness", strat.completeness_residual() < 1e-8, f"{tag} residual={strat.completeness_residual()}")
    tally.record("optimality", abs(strat.success_probability - table.p_max) < 1e-8, f"{tag} {strat.success_probability} vs {table.p_max}")
    tally.record("iteration_bound", len(trace.amounts) <= n, tag)
    tally.record(
        "residuals_stay_certain",
        all(r[0] <= 1.0 / m + 1e-10 for r in trace.residuals),
        tag,
    )

    rep = execute_exact(strat, state, rank_tol)
    tally.record("probabilities_sum_to_one", abs(rep.total_probability - 1) < 1e-8, tag)
    tally.record("executed_success_is_optimal", abs(rep.total_success - table.p_max) < 1e-8, f"{tag} {rep.total_success}")
    tally.record("verdicts_verified", rep.all_verified, tag)
    tally.record(
        "rank_never_increases",
        all(len(b.output_spectrum) <= n for b in rep.branch_results if b.checked),
        tag,
    )
    fids = [b.target_fidelity for b in rep.branch_results if b.verdict == "success" and b.checked]
    tally.record("success_equals_target", all(f >= 1 - 1e-8 for f in fids), f"{tag} min fidelity {min(fids, default=1)}")
    return rep


def run_suite(count=200, seed=7, max_rank=8, degeneracy_tol=DEGENERACY_TOL, rank_tol=RANK_TOL):
    tally = CheckTally()
    for state in random_corpus(count, seed, max_rank):
        n = schmidt_decompose(state, rank_tol).rank
        pm = []
        for m in range(1, n + 2):
            check_instance(state, m, tally, degeneracy_tol, rank_tol)
            pm.append(bound_table(schmidt_decompose(state, rank_tol).lambdas, m).p_max)
        tally.record("pmax_non_increasing_in_m", bool(np.all(np.diff(pm) <= 1e-12)), str(pm))
    return tally
