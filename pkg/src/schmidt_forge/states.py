"""Bipartite pure states, Schmidt decompositions and reduced density operators.

A state ``|psi> = sum_ij C[i, j] |i>_A |j>_B`` is stored as its amplitude
matrix ``C`` (rows index Alice, columns index Bob).  Local operators act as
``C -> K @ C`` for Alice and ``C -> C @ P.T`` for Bob.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, NormalizationError, ParameterError

NORM_TOL = 1e-10
RANK_TOL = 1e-12


def _frozen(arr, dtype=complex):
    out = np.array(arr, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class BipartitePureState:
    """Normalized pure state of a two-party system.

    Parameters
    ----------
    amplitudes : array_like
        ``dim_a x dim_b`` complex amplitude matrix.
    norm_tol : float
        Accepted deviation of the squared norm from one.
    """

    amplitudes: np.ndarray
    norm_tol: float = NORM_TOL

    def __post_init__(self):
        amps = np.atleast_2d(np.asarray(self.amplitudes, dtype=complex))
        if amps.ndim != 2:
            raise DimensionError("amplitudes must be a matrix")
        norm2 = float(np.sum(np.abs(amps) ** 2))
        if abs(norm2 - 1.0) > self.norm_tol:
            raise NormalizationError(f"squared norm {norm2!r} deviates from 1")
        object.__setattr__(self, "amplitudes", _frozen(amps))

    @property
    def dim_a(self):
        return self.amplitudes.shape[0]

    @property
    def dim_b(self):
        return self.amplitudes.shape[1]

    def vector(self):
        """Flattened state vector in the ``|i>_A |j>_B`` product basis."""
        return self.amplitudes.reshape(-1).copy()

    def swapped(self):
        """The same state with the roles of Alice and Bob exchanged."""
        return BipartitePureState(self.amplitudes.T, self.norm_tol)

    @classmethod
    def from_unnormalized(cls, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise NormalizationError("cannot normalize the zero vector")
        return cls(amps / norm)


@dataclass(frozen=True, eq=False)
class SchmidtDecomposition:
    """Ordered Schmidt form ``sum_i sqrt(lambdas[i]) |a_i>|b_i>``.

    ``basis_a`` and ``basis_b`` hold the ``N`` local vectors as columns, so
    the source amplitude matrix equals ``basis_a @ diag(sqrt(lambdas)) @ basis_b.T``.
    """

    lambdas: np.ndarray
    basis_a: np.ndarray
    basis_b: np.ndarray
    rank_tol: float = RANK_TOL

    @property
    def rank(self):
        return len(self.lambdas)

    @property
    def dim_a(self):
        return self.basis_a.shape[0]

    @property
    def dim_b(self):
        return self.basis_b.shape[0]

    def reconstruct(self):
        return (self.basis_a * np.sqrt(self.lambdas)) @ self.basis_b.T

    def canonical_state(self):
        """``sum_i sqrt(lambda_i)|ii>`` in an ``N x N`` space."""
        return from_schmidt(self.lambdas)


@dataclass(frozen=True, eq=False)
class DensityOperator:
    """Hermitian positive semidefinite matrix; trace may be below one."""

    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", _frozen(self.matrix))

    @property
    def dim(self):
        return self.matrix.shape[0]

    @property
    def trace(self):
        return float(np.real(np.trace(self.matrix)))

    def eigenvalues(self):
        """Eigenvalues sorted non-increasing."""
        return np.sort(np.linalg.eigvalsh(self.matrix))[::-1]

    def normalized(self):
        return DensityOperator(self.matrix / self.trace)

    def support_rank(self, tol=1e-10):
        return int(np.sum(self.eigenvalues() > tol))


def _phase_fix(u, v):
    # Largest-magnitude entry of each Alice vector made real positive,
    # Bob vector takes the conjugate phase so the product is unchanged.
    u = u.copy()
    v = v.copy()
    for k in range(u.shape[1]):
        col = u[:, k]
        idx = int(np.argmax(np.round(np.abs(col), 12)))
        phase = col[idx] / abs(col[idx])
        u[:, k] = col / phase
        v[:, k] = v[:, k] * phase
    return u, v


def _order_ties(lam, u, v, tol=1e-12):
    order = list(range(len(lam)))
    start = 0
    while start < len(order):
        stop = start + 1
        while stop < len(order) and abs(lam[stop] - lam[start]) <= tol * max(lam[start], 1e-300):
            stop += 1
        if stop - start > 1:
            block = order[start:stop]
            key = lambda k: tuple(-x for z in np.round(u[:, k], 10) for x in (z.real, z.imag))
            order[start:stop] = sorted(block, key=key)
        start = stop
    return lam[order], u[:, order], v[:, order]


def schmidt_svd(amplitudes, rank_tol=RANK_TOL):
    """Schmidt data of an arbitrary (possibly unnormalized) amplitude matrix.

    Returns ``(lambdas, basis_a, basis_b)`` where ``lambdas`` are the squared
    singular values above ``rank_tol * lambdas[0]``; no normalization is applied.
    """
    amps = np.asarray(amplitudes, dtype=complex)
    u, s, vh = np.linalg.svd(amps, full_matrices=False)
    lam = s ** 2
    if lam.size == 0 or lam[0] == 0:
        return np.zeros(0), np.zeros((amps.shape[0], 0), complex), np.zeros((amps.shape[1], 0), complex)
    keep = lam > rank_tol * lam[0]
    lam = lam[keep]
    u = u[:, keep]
    v = vh.conj().T[:, keep].conj()
    u, v = _phase_fix(u, v)
    return _order_ties(lam, u, v)


def spectrum(amplitudes, rank_tol=RANK_TOL, normalize=True):
    """Ordered Schmidt coefficients (squared) of an amplitude matrix."""
    s = np.linalg.svd(np.asarray(amplitudes, dtype=complex), compute_uv=False)
    lam = s ** 2
    if lam.size == 0 or lam[0] == 0:
        return np.zeros(0)
    lam = lam[lam > rank_tol * lam[0]]
    if normalize:
        lam = lam / lam.sum()
    return lam


def schmidt_rank(amplitudes, rank_tol=RANK_TOL):
    return len(spectrum(amplitudes, rank_tol, normalize=False))


def schmidt_decompose(state, rank_tol=RANK_TOL):
    """Ordered Schmidt decomposition of a normalized state.

    Raises
    ------
    NormalizationError
        If ``state`` is a raw matrix whose squared norm is not one.
    """
    if not isinstance(state, BipartitePureState):
        state = BipartitePureState(state)
    lam, u, v = schmidt_svd(state.amplitudes, rank_tol)
    return SchmidtDecomposition(_frozen(lam, float), _frozen(u), _frozen(v), rank_tol)


def complete_basis(columns, dim):
    """Extend orthonormal ``columns`` to a ``dim x dim`` unitary.

    New columns come from Gram-Schmidt against the standard basis, in order,
    so the completion is reproducible.
    """
    cols = [np.asarray(c, dtype=complex) for c in np.asarray(columns, dtype=complex).T]
    for k in range(dim):
        if len(cols) == dim:
            break
        e = np.zeros(dim, complex)
        e[k] = 1.0
        for c in cols:
            e = e - c * np.vdot(c, e)
        for c in cols:
            e = e - c * np.vdot(c, e)
        nrm = np.linalg.norm(e)
        if nrm > 1e-8:
            cols.append(e / nrm)
    return np.column_stack(cols) if cols else np.zeros((dim, 0), complex)


def from_schmidt(lambdas, dim_a=None, dim_b=None, norm_tol=NORM_TOL):
    """Canonical state ``sum_i sqrt(lambda_i) |ii>``."""
    lam = np.asarray(lambdas, dtype=float)
    if lam.ndim != 1 or lam.size == 0:
        raise ParameterError("lambdas must be a non-empty list")
    if np.any(lam < 0):
        raise ParameterError("Schmidt coefficients must be nonnegative")
    n = lam.size
    dim_a = n if dim_a is None else dim_a
    dim_b = n if dim_b is None else dim_b
    if n > min(dim_a, dim_b):
        raise DimensionError(f"{n} Schmidt terms do not fit into {dim_a}x{dim_b}")
    amps = np.zeros((dim_a, dim_b), complex)
    amps[np.arange(n), np.arange(n)] = np.sqrt(lam)
    return BipartitePureState(amps, norm_tol)


def make_me_state(m, dim_a=None, dim_b=None):
    """Maximally entangled state of Schmidt rank ``m`` embedded in ``dim_a x dim_b``."""
    if m < 1:
        raise ParameterError("m must be positive")
    dim_a = m if dim_a is None else dim_a
    dim_b = m if dim_b is None else dim_b
    if m > min(dim_a, dim_b):
        raise DimensionError(f"m={m} exceeds local dimension {min(dim_a, dim_b)}")
    return from_schmidt(np.full(m, 1.0 / m), dim_a, dim_b)


def precursor_lambdas(m, p, q):
    if p <= 0 or q < 0 or p > m:
        raise ParameterError(f"need 0 < p <= m and q >= 0, got m={m}, p={p}, q={q}")
    lam = np.empty(m + q)
    lam[: m - p] = 1.0 / m
    lam[m - p:] = p / (m * (p + q))
    return lam


def make_precursor(m, p, q):
    """Precursor state: ``(m-p)`` weights ``1/m`` followed by ``(p+q)`` weights ``p/(m(p+q))``."""
    return from_schmidt(precursor_lambdas(m, p, q))


def partial_trace_b(state):
    """Alice's reduced operator ``Tr_B |psi><psi|`` (unnormalized input allowed)."""
    amps = state.amplitudes if isinstance(state, BipartitePureState) else np.asarray(state, complex)
    return DensityOperator(amps @ amps.conj().T)


def partial_trace_a(state):
    """Bob's reduced operator ``Tr_A |psi><psi|``."""
    amps = state.amplitudes if isinstance(state, BipartitePureState) else np.asarray(state, complex)
    return DensityOperator(amps.T @ amps.conj())


def entropy_of_entanglement(sd):
    """Entropy of entanglement in bits; accepts a decomposition or a spectrum."""
    lam = sd.lambdas if isinstance(sd, SchmidtDecomposition) else np.asarray(sd, float)
    lam = lam[lam > 0]
    return float(-np.sum(lam * np.log2(lam)))


def _embed(amps, dim_a, dim_b):
    out = np.zeros((dim_a, dim_b), complex)
    out[: amps.shape[0], : amps.shape[1]] = amps
    return out


def fidelity_to(state, target):
    """Overlap ``|<target|state>|^2`` after zero-padding to common dimensions."""
    a = state.amplitudes
    b = target.amplitudes
    da = max(a.shape[0], b.shape[0])
    db = max(a.shape[1], b.shape[1])
    ov = np.vdot(_embed(b, da, db), _embed(a, da, db))
    return float(min(1.0, abs(ov) ** 2))


def spectra_equal(state, target, tol=1e-9, rank_tol=RANK_TOL):
    """True when both states have the same ordered Schmidt spectrum within ``tol``."""
    la = spectrum(state.amplitudes, rank_tol)
    lb = spectrum(target.amplitudes, rank_tol)
    if la.size != lb.size:
        return False
    return bool(np.all(np.abs(la - lb) <= tol))


def random_state(dim_a, dim_b, rank=None, rng=None):
    """Haar-random state, optionally with prescribed Schmidt rank."""
    rng = np.random.default_rng(rng)
    if rank is None:
        amps = rng.normal(size=(dim_a, dim_b)) + 1j * rng.normal(size=(dim_a, dim_b))
    else:
        left = rng.normal(size=(dim_a, rank)) + 1j * rng.normal(size=(dim_a, rank))
        right = rng.normal(size=(rank, dim_b)) + 1j * rng.normal(size=(rank, dim_b))
        amps = left @ right
    return BipartitePureState.from_unnormalized(amps)


def random_spectrum(n, rng=None):
    """Uniformly random point of the probability simplex, sorted non-increasing."""
    rng = np.random.default_rng(rng)
    lam = rng.dirichlet(np.ones(n))
    return np.sort(lam)[::-1]
