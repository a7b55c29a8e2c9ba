"""Many-copy sweeps, cumulative distribution bounds and the non-universality gap."""

import math
from dataclasses import dataclass, field

import numpy as np

from .bounds import bound_table, ordered_spectrum, pmax_runlength, tensor_power_spectrum
from .compiler import FAILURE, SUCCESS, compile_strategy, strategy_from_weights
from .errors import ParameterError, PreconditionError
from .executor import execute_exact
from .states import entropy_of_entanglement, from_schmidt, partial_trace_a

DEFAULT_N = (5, 10, 15, 20, 25, 30)
DEFAULT_K = tuple(round(0.1 + 0.05 * i, 10) for i in range(19))


@dataclass(frozen=True)
class SweepPoint:
    n: int
    K: float
    m: int
    p_max: float
    entropy: float


def singlet_target(n, K):
    """``2**ceil(n K)``; the tiny offset keeps e.g. ``20 * 0.95`` from rounding up."""
    return 2 ** max(0, math.ceil(n * K - 1e-9))


def _sweep_row(args):
    lam, n, ks, entropy = args
    spec = tensor_power_spectrum(lam, n)
    out = []
    for k in ks:
        m = singlet_target(n, k)
        out.append(SweepPoint(n, float(k), m, pmax_runlength(spec, m), entropy))
    return out


def theorem3_sweep(lambdas, n_values=DEFAULT_N, K_values=DEFAULT_K, jobs=1):
    """Optimal probability of ``ceil(n K)`` singlets from ``n`` copies, over a grid.

    Rows are ordered by ``(n, K)`` regardless of ``jobs``.
    """
    lam = ordered_spectrum(lambdas)
    entropy = entropy_of_entanglement(lam)
    ks = sorted(float(k) for k in K_values)
    tasks = [(lam, int(n), ks, entropy) for n in sorted(n_values)]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(_sweep_row, tasks))
    else:
        rows = [_sweep_row(t) for t in tasks]
    return [pt for row in rows for pt in row]


def is_monotone(values, increasing=True, tol=1e-6, allowed=1):
    """Monotone up to at most ``allowed`` backward steps, each smaller than ``tol``."""
    d = np.diff(np.asarray(values, float))
    if not increasing:
        d = -d
    bad = d[d < 0]
    return len(bad) <= allowed and bool(np.all(-bad < tol))


@dataclass
class MEDistribution:
    """Probabilities of ending in a maximally entangled state of each rank.

    Key ``0`` collects outcomes that are not maximally entangled (treated as
    product, i.e. given up).
    """

    probabilities: dict = field(default_factory=dict)

    def __post_init__(self):
        self.probabilities = {int(k): float(v) for k, v in self.probabilities.items()}
        if abs(sum(self.probabilities.values()) - 1.0) > 1e-9:
            raise ParameterError("distribution must sum to one")

    @property
    def max_rank(self):
        return max(self.probabilities)

    @property
    def cumulative(self):
        top = max(self.max_rank, 0)
        out = {}
        running = 0.0
        for k in range(top, -1, -1):
            running += self.probabilities.get(k, 0.0)
            out[k] = running
        out[0] = 1.0
        return dict(sorted(out.items()))

    def downgrade(self, source, target, fraction=1.0):
        """Move ``fraction`` of the mass at rank ``source`` down to ``target``."""
        if target > source:
            raise ParameterError("a maximally entangled state can only be lowered in rank")
        probs = dict(self.probabilities)
        moved = probs.get(source, 0.0) * fraction
        probs[source] = probs.get(source, 0.0) - moved
        probs[target] = probs.get(target, 0.0) + moved
        return MEDistribution({k: v for k, v in probs.items() if v > 0 or k == 0})

    def as_dict(self):
        return {"p": {str(k): v for k, v in sorted(self.probabilities.items())}}

    @classmethod
    def from_dict(cls, doc):
        if "p" not in doc or not isinstance(doc["p"], dict):
            raise ParameterError("distribution document needs a 'p' object")
        return cls({int(k): float(v) for k, v in doc["p"].items()})

    @classmethod
    def from_report(cls, report, tol=1e-8):
        probs = {}
        for br in report.branch_results:
            lam = np.asarray(br.output_spectrum)
            rank = len(lam)
            uniform = rank > 0 and bool(np.all(np.abs(lam - 1.0 / rank) <= tol))
            key = rank if uniform else 0
            probs[key] = probs.get(key, 0.0) + br.probability
        probs.setdefault(0, 0.0)
        return cls(probs)


def cumulative_bound_check(dist, lambdas, tol=1e-9):
    """``(m, p_tot, p_max, ok)`` for each rank ``m >= 1`` up to the largest in ``dist``."""
    cum = dist.cumulative
    rows = []
    for m in range(1, dist.max_rank + 1):
        p_tot = cum.get(m, 0.0)
        if p_tot <= 0:
            continue
        pm = bound_table(lambdas, m).p_max
        rows.append((m, p_tot, pm, bool(p_tot <= pm + tol)))
    return rows


def uniform_extraction(lambdas, p):
    """Strategy removing ``p/N`` from every coefficient into a rank-``N`` maximally entangled piece."""
    lam = ordered_spectrum(lambdas)
    n = len(lam)
    if not 0 <= p <= n * lam[-1] + 1e-12:
        raise ParameterError(f"extraction probability must lie in [0, {n * lam[-1]}]")
    succ = np.sqrt(np.clip(p / (n * lam), 0.0, 1.0))
    fail = np.sqrt(np.clip(1.0 - succ ** 2, 0.0, 1.0))
    leaves = [(succ, SUCCESS, tuple(range(n)), "extract:1"), (fail, FAILURE, (), "extract:0")]
    return strategy_from_weights(lam, n, leaves)


def lemma6_residual(lambdas, extraction):
    """Spectrum left on Bob's side after a rank-3 extraction.

    Returns ``(p, residual, max_deviation)`` with ``residual`` the eigenvalues
    of the summed unnormalized failure-branch reduced operators and
    ``max_deviation = max_i |residual_i - (lambda_i - p/3)|``.
    """
    lam = ordered_spectrum(lambdas)
    if len(lam) != 3:
        raise PreconditionError("needs exactly three Schmidt terms")
    if extraction.m != 3:
        raise PreconditionError("extraction must target rank 3")
    state = extraction.reference_state()
    report = execute_exact(extraction, state)
    for br in report.branch_results:
        if br.verdict == SUCCESS and br.checked and not br.verdict_verified:
            raise PreconditionError(f"success branch {br.label} is not maximally entangled")
    p = report.total_success
    dim = state.dim_b
    fail = np.zeros((dim, dim), complex)
    for br in extraction.branches:
        if br.verdict != SUCCESS:
            fail = fail + partial_trace_a(br.kraus @ state.amplitudes).matrix
    residual = np.sort(np.clip(np.linalg.eigvalsh(fail), 0.0, None))[::-1][:3]
    residual = np.pad(residual, (0, 3 - len(residual)))
    expected = np.asarray(extraction.input_spectrum) - p / 3
    return p, residual, float(np.max(np.abs(residual - expected)))


@dataclass(frozen=True)
class UniversalityGap:
    p2_initial: float
    p3_extracted: float
    residual: tuple
    residual_normalized: tuple
    p2_after_optimal_3: float

    def as_dict(self):
        return {
            "p2_initial": self.p2_initial,
            "p3_extracted": self.p3_extracted,
            "residual": list(self.residual),
            "residual_normalized": list(self.residual_normalized),
            "p2_after_optimal_3": self.p2_after_optimal_3,
            "gap": self.p2_initial - self.p2_after_optimal_3,
        }


def universality_report(lambdas, tie_tol=1e-12):
    lam = ordered_spectrum(lambdas)
    if len(lam) != 3:
        raise PreconditionError("needs exactly three Schmidt terms")
    if lam[1] + lam[2] < lam[0] - tie_tol:
        raise PreconditionError("needs lambda_2 + lambda_3 >= lambda_1 so that two-dimensional conversion is certain")
    if lam[0] - lam[1] <= tie_tol:
        raise PreconditionError("lambda_1 = lambda_2 admits a universal strategy")
    p2 = bound_table(lam, 2).p_max
    optimal3 = compile_strategy(from_schmidt(lam), 3)
    p3, residual, _ = lemma6_residual(lam, optimal3)
    kept = residual[residual > 1e-12]
    normed = kept / kept.sum()
    after = bound_table(normed, 2).p_max
    return UniversalityGap(p2, p3, tuple(residual), tuple(normed), after)


def universality_gap(lambdas):
    """Certain two-dimensional yield before versus after an optimal rank-3 extraction."""
    rep = universality_report(lambdas)
    return rep.p2_initial, rep.p2_after_optimal_3
