"""Finite periodic XY and XXZ chains: Hamiltonians, ground states, reduced states.

Basis convention: site ``i`` of an ``N``-site chain is bit ``N - 1 - i`` of the
computational-basis index, and a set bit means spin down (sigma^z = -1).  With
this choice ``psi.reshape((2,) * N)`` has axis ``i`` equal to site ``i``, and the
Kronecker ordering of reduced states follows the site order.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

DENSE_LIMIT = 12
ITERATIVE_LIMIT = 20
DENSE_DIM = 256
DEGENERACY_RTOL = 1e-10
LANCZOS_MAXITER = 5000
LANCZOS_TOL = 1e-10
KRYLOV_DIM = 150


class ModelKind(enum.Enum):
    XY = "xy"
    XXZ = "xxz"


@dataclass(frozen=True)
class ModelSpec:
    """Which chain and its couplings.

    Use :meth:`xy` or :meth:`xxz` rather than the raw constructor; fields of the
    inactive model must stay ``None``.
    """

    kind: ModelKind
    lam: float | None = None
    gamma: float | None = None
    delta: float | None = None

    def __post_init__(self):
        if self.kind is ModelKind.XY:
            if self.lam is None or self.gamma is None or self.delta is not None:
                raise ValueError("XY model takes lam and gamma only")
            if not 0.0 <= self.gamma <= 1.0:
                raise ValueError(f"gamma must lie in [0, 1], got {self.gamma}")
            if self.lam < 0.0:
                raise ValueError(f"lam must be non-negative, got {self.lam}")
        elif self.kind is ModelKind.XXZ:
            if self.delta is None or self.lam is not None or self.gamma is not None:
                raise ValueError("XXZ model takes delta only")
        else:  # pragma: no cover
            raise ValueError(f"unknown model kind {self.kind!r}")

    @classmethod
    def xy(cls, lam: float, gamma: float) -> "ModelSpec":
        return cls(ModelKind.XY, lam=float(lam), gamma=float(gamma))

    @classmethod
    def xxz(cls, delta: float) -> "ModelSpec":
        return cls(ModelKind.XXZ, delta=float(delta))


@dataclass(frozen=True)
class FiniteChain:
    n_sites: int
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError("a chain needs at least 2 sites")
        if self.n_sites > ITERATIVE_LIMIT:
            raise ValueError(f"N={self.n_sites} exceeds the supported maximum {ITERATIVE_LIMIT}")
        if self.boundary != "periodic":
            raise ValueError("only periodic boundaries are supported")

    @property
    def bonds(self) -> list[tuple[int, int]]:
        n = self.n_sites
        return [(i, (i + 1) % n) for i in range(n)]


@dataclass(frozen=True)
class Hamiltonian:
    """A real symmetric block of H together with the basis states spanning it."""

    matrix: sp.csr_matrix
    basis: np.ndarray
    n_sites: int

    @property
    def dim(self) -> int:
        return self.basis.size

    def embed(self, vec: np.ndarray) -> np.ndarray:
        """Lift a block vector into the full 2**N space."""
        full = np.zeros(2 ** self.n_sites)
        full[self.basis] = vec
        return full


@dataclass
class GroundStateBundle:
    energy: float
    states: list[np.ndarray]
    n_sites: int
    gap: float | None = None
    residuals: list[float] = field(default_factory=list)

    @property
    def degeneracy(self) -> int:
        return len(self.states)


@dataclass(frozen=True)
class DensityMatrix:
    """Reduced state of 1 to 3 sites (real symmetric, unit trace, PSD)."""

    entries: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.entries, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] not in (2, 4, 8):
            raise ValueError(f"density matrix must be 2x2, 4x4 or 8x8, got {m.shape}")
        if abs(np.trace(m) - 1.0) > 1e-12:
            raise ValueError(f"trace {np.trace(m)!r} differs from 1")
        if np.max(np.abs(m - m.T)) > 1e-12:
            raise ValueError("density matrix is not symmetric")
        lo = np.linalg.eigvalsh(m)[0]
        if lo < -1e-10:
            raise ValueError(f"density matrix is not PSD (smallest eigenvalue {lo:.3e})")
        object.__setattr__(self, "entries", m)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def n_sites(self) -> int:
        return int(round(math.log2(self.dim)))


def _popcount(states: np.ndarray) -> np.ndarray:
    counts = np.zeros(states.shape, dtype=np.int64)
    s = states.copy()
    while np.any(s):
        counts += s & 1
        s >>= 1
    return counts


def sector_basis(n_sites: int, *, n_down: int | None = None, parity: int | None = None) -> np.ndarray:
    """Sorted basis states with a fixed number of down spins or fixed parity of it."""
    states = np.arange(2 ** n_sites, dtype=np.int64)
    if n_down is None and parity is None:
        return states
    pc = _popcount(states)
    if n_down is not None:
        return states[pc == n_down]
    return states[(pc & 1) == parity]


def build_hamiltonian(
    model: ModelSpec,
    chain: FiniteChain,
    *,
    n_down: int | None = None,
    parity: int | None = None,
) -> Hamiltonian:
    """Sparse H restricted to a symmetry sector (full space when none is given).

    XY:  H = -sum_i [ lam/2 ((1+g) X_i X_{i+1} + (1-g) Y_i Y_{i+1}) + Z_i ]
    XXZ: H = 1/4 sum_i [ X_i X_{i+1} + Y_i Y_{i+1} + delta Z_i Z_{i+1} ]

    XY conserves the parity of the number of down spins, XXZ their number.
    """
    n = chain.n_sites
    if model.kind is ModelKind.XY and n_down is not None:
        raise ValueError("the XY Hamiltonian does not conserve total S^z")
    basis = sector_basis(n, n_down=n_down, parity=parity)
    dim = basis.size
    rows, cols, vals = [], [], []
    diag = np.zeros(dim)
    idx = np.arange(dim)

    def bit(i):
        return (basis >> (n - 1 - i)) & 1

    for i, j in chain.bonds:
        bi, bj = bit(i), bit(j)
        anti = bi != bj
        mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
        target = np.searchsorted(basis, basis ^ mask)
        if model.kind is ModelKind.XY:
            # (1+g)XX + (1-g)YY flips the pair with amplitude 2 (antiparallel) or 2g (parallel)
            amp = np.where(anti, -model.lam, -model.lam * model.gamma)
            keep = amp != 0.0
            rows.append(idx[keep])
            cols.append(target[keep])
            vals.append(amp[keep])
        else:
            rows.append(idx[anti])
            cols.append(target[anti])
            vals.append(np.full(int(anti.sum()), 0.5))
            diag += 0.25 * model.delta * np.where(anti, -1.0, 1.0)
    if model.kind is ModelKind.XY:
        diag -= n - 2.0 * _popcount(basis)
    rows.append(idx)
    cols.append(idx)
    vals.append(diag)
    mat = sp.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(dim, dim)
    ).tocsr()
    mat.sum_duplicates()
    return Hamiltonian(mat, basis, n)


class ConvergenceError(RuntimeError):
    pass


def _lanczos_lowest(matvec, dim: int, locked: list[np.ndarray], rng: np.random.Generator):
    """Lowest eigenpair orthogonal to ``locked`` by restarted Lanczos.

    Full reorthogonalization inside each Krylov cycle; restarts from the current
    Ritz vector.  Returns (value, vector, residual).
    """
    def project(v):
        for u in locked:
            v -= (u @ v) * u
        return v

    v = project(rng.standard_normal(dim))
    v /= np.linalg.norm(v)
    total = 0
    theta, resid = np.nan, np.inf
    while total < LANCZOS_MAXITER:
        size = min(KRYLOV_DIM, dim - len(locked), LANCZOS_MAXITER - total)
        basis = np.empty((size, dim))
        alpha, beta = [], []
        basis[0] = v
        k = 0
        ritz = None
        for k in range(size):
            w = project(matvec(basis[k]))
            a = basis[k] @ w
            alpha.append(a)
            w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
            w -= basis[: k + 1].T @ (basis[: k + 1] @ w)
            b = np.linalg.norm(w)
            total += 1
            t = np.diag(alpha) + np.diag(beta, 1) + np.diag(beta, -1)
            evals, evecs = np.linalg.eigh(t)
            theta, ritz = evals[0], evecs[:, 0]
            resid = abs(b * ritz[-1])
            if resid <= LANCZOS_TOL or b < 1e-14 or k + 1 == size:
                break
            beta.append(b)
            basis[k + 1] = w / b
        vec = basis[: k + 1].T @ ritz
        vec = project(vec)
        vec /= np.linalg.norm(vec)
        if resid <= LANCZOS_TOL or k + 1 >= dim - len(locked):
            true_resid = np.linalg.norm(matvec(vec) - theta * vec)
            if true_resid <= 1e-8:
                return theta, vec, true_resid
        v = vec
    raise ConvergenceError(f"Lanczos did not converge in {LANCZOS_MAXITER} iterations (residual {resid:.3e})")


def ground_states(ham: Hamiltonian, k: int = 2, *, seed: int = 7) -> GroundStateBundle:
    """Lowest eigenvector(s) of a Hamiltonian block.

    Up to ``k`` eigenpairs are computed; states whose energy lies within the
    relative degeneracy threshold of the lowest one are kept.  ``gap`` is the
    distance to the first non-degenerate level found (None when ``k`` levels were
    all degenerate or the block is too small).
    """
    mat = ham.matrix
    dim = ham.dim
    if dim <= DENSE_DIM:
        evals, evecs = np.linalg.eigh(mat.toarray())
        e0 = evals[0]
        tol = DEGENERACY_RTOL * max(1.0, abs(e0))
        deg = int(np.sum(evals - e0 < tol))
        states = [evecs[:, i] for i in range(deg)]
        gap = float(evals[deg] - e0) if deg < dim else None
        residuals = [float(np.linalg.norm(mat @ s - e0 * s)) for s in states]
        return GroundStateBundle(float(e0), states, ham.n_sites, gap, residuals)

    rng = np.random.default_rng(seed)
    matvec = mat.dot
    found, energies, residuals = [], [], []
    gap = None
    for _ in range(max(1, k)):
        e, vec, res = _lanczos_lowest(matvec, dim, found, rng)
        if found:
            tol = DEGENERACY_RTOL * max(1.0, abs(energies[0]))
            if e - energies[0] >= tol:
                gap = float(e - energies[0])
                break
        found.append(vec)
        energies.append(e)
        residuals.append(res)
    e0 = float(min(energies))
    return GroundStateBundle(e0, found, ham.n_sites, gap, residuals)


def _sectors(model: ModelSpec, chain: FiniteChain) -> list[dict]:
    n = chain.n_sites
    if model.kind is ModelKind.XY:
        return [{"parity": 0}, {"parity": 1}]
    if n % 2:
        raise ValueError("XXZ ground states are computed for even N only")
    if model.delta > -1.0:
        return [{"n_down": n // 2}]
    return [{"n_down": n // 2}, {"n_down": 0}, {"n_down": n}]


def solve(model: ModelSpec, chain: FiniteChain, *, full_space: bool = False) -> GroundStateBundle:
    """Ground state(s) of a model on a finite ring, lifted to the full 2**N space.

    Each symmetry sector is diagonalized separately and the lowest levels are
    merged; levels in different sectors within the degeneracy threshold form a
    degenerate bundle.  ``full_space`` skips the sector split (N <= 12).
    """
    if full_space:
        if chain.n_sites > DENSE_LIMIT:
            raise ValueError(f"full-space diagonalization is limited to N <= {DENSE_LIMIT}")
        ham = build_hamiltonian(model, chain)
        return ground_states(ham, k=3)
    pieces = []
    for kw in _sectors(model, chain):
        ham = build_hamiltonian(model, chain, **kw)
        b = ground_states(ham, k=1 if ham.dim > DENSE_DIM else 2)
        pieces.append((ham, b))
    e0 = min(b.energy for _, b in pieces)
    tol = DEGENERACY_RTOL * max(1.0, abs(e0))
    states, residuals, above = [], [], []
    for ham, b in pieces:
        if b.energy - e0 < tol:
            states.extend(ham.embed(s) for s in b.states)
            residuals.extend(b.residuals)
            if b.gap is not None:
                above.append(b.energy + b.gap)
        else:
            above.append(b.energy)
    gap = min(above) - e0 if above else None
    return GroundStateBundle(e0, states, chain.n_sites, gap, residuals)


def reduce_density(bundle: GroundStateBundle, sites) -> DensityMatrix:
    """Partial trace onto ``sites`` (in the given order).

    A degenerate bundle is replaced by the equal-weight mixture of its states.
    """
    sites = list(sites)
    n = bundle.n_sites
    if not 1 <= len(sites) <= 3:
        raise ValueError("reduced states are supported for 1 to 3 sites")
    if len(set(sites)) != len(sites):
        raise ValueError(f"sites must be distinct, got {sites}")
    if any(s < 0 or s >= n for s in sites):
        raise ValueError(f"site index out of range for N={n}: {sites}")
    rest = [i for i in range(n) if i not in sites]
    d = 2 ** len(sites)
    rho = np.zeros((d, d))
    for psi in bundle.states:
        t = psi.reshape((2,) * n).transpose(sites + rest).reshape(d, -1)
        rho += t @ t.T
    rho /= len(bundle.states)
    rho = 0.5 * (rho + rho.T)
    return DensityMatrix(rho / np.trace(rho))
