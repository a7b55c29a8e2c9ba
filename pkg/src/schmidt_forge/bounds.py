"""Bounds on the conversion probability into a maximally entangled state.

``B(m, r) = (m / r) * (lambda_{m-r+1} + ... + lambda_N)`` for ``r = 1..m``;
the optimal probability is ``min_r B(m, r)`` clamped to one, and zero once
``m`` exceeds the Schmidt rank.
"""

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ParameterError

TIE_TOL = 1e-12
CASE_A_TOL = 1e-12


def ordered_spectrum(lambdas, norm_tol=1e-9):
    """Validate a spectrum and return it sorted non-increasing without zeros."""
    lam = np.asarray(lambdas, dtype=float).ravel()
    if lam.size == 0:
        raise ParameterError("empty spectrum")
    if np.any(lam < -1e-15):
        raise ParameterError("negative Schmidt coefficient")
    total = lam.sum()
    if abs(total - 1.0) > norm_tol:
        raise ParameterError(f"spectrum sums to {total!r}, expected 1")
    lam = np.sort(np.clip(lam, 0.0, None))[::-1]
    return lam[lam > 0]


@dataclass(frozen=True)
class BoundTable:
    m: int
    b_values: tuple
    r1: int
    lambda_max: float
    p_max: float

    def b(self, r):
        """``B(m, r)`` with 1-based ``r``."""
        return self.b_values[r - 1]

    def as_dict(self):
        return {
            "m": self.m,
            "b_values": list(self.b_values),
            "r1": self.r1,
            "lambda_max": self.lambda_max,
            "p_max": self.p_max,
        }


def tail_sums(lam, length):
    """``T[j] = sum_{i >= j} lam[i]`` (0-based) padded with zeros to ``length + 1``."""
    padded = np.zeros(length + 1)
    padded[: min(len(lam), length)] = lam[:length]
    # Suffix sums from the small end keep rounding proportional to the tail.
    tails = np.cumsum(padded[::-1])[::-1]
    if len(lam) > length:
        tails += float(np.sum(lam[length:]))
    return tails


def bound_table(lambdas, m):
    """All ``B(m, r)``, the last minimizer ``r1`` and the trimming level.

    ``lambda_max = T / r1`` where ``T`` is the tail from index ``m - r1 + 1``;
    equals ``p_max / m``.
    """
    if m < 1:
        raise ParameterError("m must be at least 1")
    lam = ordered_spectrum(lambdas)
    m = int(m)
    tails = tail_sums(lam, m)
    r = np.arange(1, m + 1)
    b = (m / r) * tails[m - r]
    b_min = float(b.min())
    r1 = int(np.flatnonzero(b <= b_min + TIE_TOL)[-1]) + 1
    lam_max = float(tails[m - r1] / r1)
    return BoundTable(m, tuple(float(x) for x in b), r1, lam_max, float(min(max(b_min, 0.0), 1.0)))


def p_max(lambdas, m):
    return bound_table(lambdas, m).p_max


def check_lemma4_shape(b_values, tol=TIE_TOL):
    """Once the bound sequence strictly increases it keeps increasing.

    An increase counts when it exceeds ``tol``; the following step must then be
    strictly positive (the true follow-up gain is at least a third of the first).
    """
    b = np.asarray(b_values, dtype=float)
    d = np.diff(b)
    for i in range(len(d) - 1):
        if d[i] > tol and not d[i + 1] > 0:
            return False
    return True


def check_lemma5_shape(table, tol=1e-10):
    """Non-increasing up to ``r1``, strictly increasing afterwards (when ``p_max < 1``)."""
    b = np.asarray(table.b_values)
    if table.p_max >= 1 - 1e-12:
        return bool(np.all(b >= 1 - 1e-12))
    k = table.r1 - 1
    head = np.diff(b[: k + 1])
    tail = np.diff(b[k:])
    return bool(np.all(head <= tol) and np.all(tail > 0) and abs(b[k] - table.p_max) <= 1e-15)


def case_a_criterion(lambdas, m):
    """Certain conversion is possible iff the largest coefficient is at most ``1/m``."""
    lam = ordered_spectrum(lambdas)
    return bool(lam[0] <= 1.0 / m + CASE_A_TOL)


@dataclass(frozen=True)
class RunLengthSpectrum:
    """Schmidt spectrum as ``(value, multiplicity)`` runs, values strictly decreasing."""

    runs: tuple
    total_mass: float

    @property
    def size(self):
        return sum(c for _, c in self.runs)

    def expand(self, limit=10 ** 7):
        size = self.size
        if size > limit:
            raise CapacityError(f"expanded spectrum would hold {size} entries")
        return np.concatenate([np.full(int(c), v) for v, c in self.runs])

    @classmethod
    def from_values(cls, lambdas, rel_tol=1e-12):
        lam = ordered_spectrum(lambdas)
        return cls(*_group_runs([(float(v), 1) for v in lam], rel_tol))


def _group_runs(pairs, rel_tol):
    pairs = sorted(pairs, key=lambda t: -t[0])
    runs = []
    for v, c in pairs:
        if runs and abs(runs[-1][0] - v) <= rel_tol * runs[-1][0]:
            runs[-1][1] += c
        else:
            runs.append([v, c])
    runs = tuple((v, int(c)) for v, c in runs)
    return runs, math.fsum(v * c for v, c in runs)


def tensor_power_spectrum(lambdas, n, limit=10 ** 6, rel_tol=1e-12):
    """Spectrum of ``n`` identical copies with exact multinomial multiplicities."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    base = RunLengthSpectrum.from_values(lambdas, rel_tol).runs
    d = len(base)
    count = math.comb(n + d - 1, d - 1)
    if count > limit:
        raise CapacityError(f"{count} distinct products exceed the limit {limit}")
    values = [v for v, _ in base]
    mults = [c for _, c in base]
    pairs = []
    nfact = math.factorial(n)
    for combo in itertools.combinations_with_replacement(range(d), n):
        k = [0] * d
        for i in combo:
            k[i] += 1
        value = 1.0
        mult = nfact
        for i in range(d):
            value *= values[i] ** k[i]
            mult = mult // math.factorial(k[i]) * mults[i] ** k[i]
        pairs.append((value, mult))
    runs, total = _group_runs(pairs, rel_tol)
    return RunLengthSpectrum(runs, total)


def pmax_runlength(spec, m):
    """Optimal probability for a run-length spectrum without expanding it.

    ``B(m, r)`` is monotone in ``r`` while ``m - r + 1`` stays inside one run,
    so only run endpoints (clipped to ``m``) need to be scanned.
    """
    m = int(m)
    if m < 1:
        raise ParameterError("m must be at least 1")
    size = spec.size
    if m > size:
        return 0.0
    runs = spec.runs
    after = [0.0] * (len(runs) + 1)
    for k in range(len(runs) - 1, -1, -1):
        v, c = runs[k]
        after[k] = after[k + 1] + v * float(c)
    best = math.inf
    start = 1
    for k, (v, c) in enumerate(runs):
        if start > m:
            break
        end = start + c - 1
        for j in {start, min(end, m)}:
            r = m - j + 1
            tail = after[k + 1] + v * float(end - j + 1)
            best = min(best, (m / r) * tail)
        start = end + 1
    return float(min(max(best, 0.0), 1.0))
