"""Discrete (Wootters) and generalized (kernel) Wigner functions of qubit states.

Discrete phase space of ``n`` qubits: points ``(x, p)`` with ``x, p`` bit tuples of
length ``n``.  Grids are stored as arrays ``values[x_index, p_index]`` where the
index reads the bits in site order (site 0 most significant), so for two qubits
``values[0b01, 0b00]`` is W(01,00).

Generalized Wigner function: per-site kernel ``U Pi U^+`` with
``Pi = (1 - sqrt(3) Z) / 2`` and ``U = exp(-i Z phi) exp(-i Y theta)``, which equals
``(1 - sqrt(3) n.sigma) / 2`` for the Bloch direction
``n = (sin 2theta cos 2phi, sin 2theta sin 2phi, cos 2theta)``.  Integrals over
phase space use the per-site measure ``sin(2 theta) dtheta dphi / pi`` on
``[0, pi/2] x [0, 2 pi]``.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .chains import DensityMatrix
from .correlators import (
    PAULI,
    CorrelatorSet,
    TripleCorrelatorInput,
    UnphysicalInputError,
    triple_terms,
)

SQRT3 = math.sqrt(3.0)
SQRT_CLIP = 1e-10

# one representative per behavior class of the two-site DWF of a real Z2-symmetric state
XY_PAIR_CLASSES = ("00,00", "00,01", "01,00", "01,01", "11,00", "11,01")
XXZ_PAIR_CLASSES = {"corner": "00,00", "interference": "00,01", "zz-only": "01,00"}


# ---------------------------------------------------------------- discrete

@dataclass(frozen=True)
class PhasePoint:
    x: tuple[int, ...]
    p: tuple[int, ...]

    def __post_init__(self):
        if len(self.x) != len(self.p) or not self.x:
            raise ValueError("x and p must be non-empty and of equal length")
        if any(b not in (0, 1) for b in self.x + self.p):
            raise ValueError("phase-space coordinates are bits")

    @property
    def n(self) -> int:
        return len(self.x)

    @classmethod
    def parse(cls, text: str) -> "PhasePoint":
        """'01,10' -> x=(0, 1), p=(1, 0)."""
        try:
            xs, ps = text.split(",")
            return cls(tuple(int(c) for c in xs.strip()), tuple(int(c) for c in ps.strip()))
        except ValueError as exc:
            raise ValueError(f"bad phase-space point {text!r}; expected e.g. '00,01'") from exc

    @property
    def index(self) -> tuple[int, int]:
        return _bits_to_int(self.x), _bits_to_int(self.p)

    def __str__(self) -> str:
        return "".join(map(str, self.x)) + "," + "".join(map(str, self.p))


def _bits_to_int(bits) -> int:
    v = 0
    for b in bits:
        v = 2 * v + b
    return v


def all_points(n: int):
    for x in itertools.product((0, 1), repeat=n):
        for p in itertools.product((0, 1), repeat=n):
            yield PhasePoint(x, p)


@dataclass(frozen=True)
class PhasePointOperator:
    matrix: np.ndarray
    point: PhasePoint


@functools.lru_cache(maxsize=None)
def _single_a(x: int, p: int) -> np.ndarray:
    a = 0.5 * (PAULI["i"] + (-1) ** x * PAULI["z"] + (-1) ** p * PAULI["x"]
               + (-1) ** (x + p) * PAULI["y"])
    a.setflags(write=False)
    return a


def phase_point_operator(point: PhasePoint) -> PhasePointOperator:
    mat = functools.reduce(np.kron, (_single_a(x, p) for x, p in zip(point.x, point.p)))
    return PhasePointOperator(mat, point)


@dataclass(frozen=True)
class DWFGrid:
    n: int
    values: np.ndarray
    normalization_trace: float

    def at(self, point: PhasePoint | str) -> float:
        if isinstance(point, str):
            point = PhasePoint.parse(point)
        return float(self.values[point.index])

    def reconstruct(self) -> np.ndarray:
        """sum_alpha W(alpha) A(alpha)."""
        out = np.zeros((2 ** self.n, 2 ** self.n), dtype=complex)
        for pt in all_points(self.n):
            out += self.values[pt.index] * phase_point_operator(pt).matrix
        return out


def _as_matrix(op) -> np.ndarray:
    return op.entries if isinstance(op, DensityMatrix) else np.asarray(op)


def dwf(op, n: int | None = None) -> DWFGrid:
    """W(alpha) = Tr(op A(alpha)) / 2**n over all 4**n phase-space points."""
    m = _as_matrix(op)
    if n is None:
        n = int(round(math.log2(m.shape[0])))
    if m.shape != (2 ** n, 2 ** n):
        raise ValueError(f"operator of shape {m.shape} does not act on {n} qubits")
    vals = np.zeros((2 ** n, 2 ** n))
    for pt in all_points(n):
        vals[pt.index] = np.real(np.trace(m @ phase_point_operator(pt).matrix)) / 2 ** n
    return DWFGrid(n, vals, float(np.real(np.trace(m))))


def dwf_single_closed(mz: float, x: int) -> float:
    return 0.25 * (1.0 + (-1) ** x * mz)


def dwf_pair_closed(c: CorrelatorSet, point: PhasePoint | str) -> float:
    if isinstance(point, str):
        point = PhasePoint.parse(point)
    (x1, x2), (p1, p2) = point.x, point.p
    return (1.0 + ((-1) ** x1 + (-1) ** x2) * c.mz
            + (-1) ** (p1 + p2) * c.xx
            + (-1) ** (x1 + x2) * c.zz
            + (-1) ** (x1 + x2 + p1 + p2) * c.yy) / 16.0


def matrix_sqrt(rho) -> np.ndarray:
    """Principal square root of a PSD matrix; eigenvalues in [-1e-10, 0) are clipped."""
    m = _as_matrix(rho)
    w, v = np.linalg.eigh(0.5 * (m + m.conj().T))
    if w[0] < -SQRT_CLIP:
        raise UnphysicalInputError(f"matrix has eigenvalue {w[0]:.3e} below -{SQRT_CLIP}")
    w = np.sqrt(np.clip(w, 0.0, None))
    out = (v * w) @ v.conj().T
    return np.real_if_close(out)


def extremize_dwf(grid: DWFGrid) -> tuple[float, float]:
    """(W_M, W_m): max and min over the three class representatives W(00,00), W(00,01), W(01,00)."""
    if grid.n != 2:
        raise ValueError("extremization is defined on two-qubit grids")
    reps = [grid.at(p) for p in XXZ_PAIR_CLASSES.values()]
    return max(reps), min(reps)


# ---------------------------------------------------------------- generalized

@dataclass(frozen=True)
class AngleConfig:
    thetas: tuple[float, ...]
    phis: tuple[float, ...]

    def __post_init__(self):
        if len(self.thetas) != len(self.phis) or not self.thetas:
            raise ValueError("need one (theta, phi) pair per site")
        eps = 1e-12
        for t in self.thetas:
            if not -eps <= t <= math.pi / 2 + eps:
                raise ValueError(f"theta={t} outside [0, pi/2]")
        for p in self.phis:
            if not -eps <= p <= 2 * math.pi + eps:
                raise ValueError(f"phi={p} outside [0, 2 pi]")

    @property
    def n(self) -> int:
        return len(self.thetas)

    @classmethod
    def uniform(cls, theta: float, phi: float, n: int) -> "AngleConfig":
        return cls((theta,) * n, (phi,) * n)


def bloch_vector(theta: float, phi: float) -> np.ndarray:
    s = math.sin(2 * theta)
    return np.array([s * math.cos(2 * phi), s * math.sin(2 * phi), math.cos(2 * theta)])


@dataclass(frozen=True)
class GWFKernel:
    matrix: np.ndarray
    config: AngleConfig


def site_kernel(theta: float, phi: float) -> np.ndarray:
    # rotation sense chosen so that the kernel points along bloch_vector(theta, phi)
    u = ((math.cos(phi) * PAULI["i"] - 1j * math.sin(phi) * PAULI["z"])
         @ (math.cos(theta) * PAULI["i"] - 1j * math.sin(theta) * PAULI["y"]))
    parity = 0.5 * (PAULI["i"] - SQRT3 * PAULI["z"])
    return u @ parity @ u.conj().T


def gwf_kernel(config: AngleConfig) -> GWFKernel:
    mat = functools.reduce(np.kron, (site_kernel(t, p) for t, p in zip(config.thetas, config.phis)))
    return GWFKernel(mat, config)


def gwf(op, config: AngleConfig) -> float:
    """Weyl rule W = Tr(op Delta(config))."""
    m = _as_matrix(op)
    k = gwf_kernel(config).matrix
    if m.shape != k.shape:
        raise ValueError(f"operator of shape {m.shape} vs kernel on {config.n} sites")
    val = np.trace(m @ k)
    if abs(val.imag) > 1e-12:
        raise ValueError(f"Weyl rule gave a complex value {val}; operator not Hermitian?")
    return float(val.real)


def gwf_single_closed(mz: float, theta: float) -> float:
    return 0.5 * (1.0 - SQRT3 * math.cos(2 * theta) * mz)


def gwf_pair_closed(c: CorrelatorSet, config: AngleConfig) -> float:
    (ti, tj), (pi_, pj) = config.thetas, config.phis
    ci, cj = math.cos(2 * ti), math.cos(2 * tj)
    si, sj = math.sin(2 * ti), math.sin(2 * tj)
    return 0.25 * (1.0
                   - SQRT3 * (ci + cj) * c.mz
                   + 3.0 * math.cos(2 * pi_) * si * math.cos(2 * pj) * sj * c.xx
                   + 3.0 * si * sj * math.sin(2 * pi_) * math.sin(2 * pj) * c.yy
                   + 3.0 * ci * cj * c.zz)


def gwf_xxz_closed(c: CorrelatorSet, config: AngleConfig) -> float:
    """Two-site GWF for states with <XX> = <YY> and zero magnetization."""
    if abs(c.xx - c.yy) > 1e-9 or abs(c.mz) > 1e-9:
        raise ValueError("specialization needs xx == yy and mz == 0")
    (ti, tj), (pi_, pj) = config.thetas, config.phis
    return 0.25 * (1.0
                   + 3.0 * math.cos(2 * ti) * math.cos(2 * tj) * c.zz
                   + 3.0 * math.sin(2 * ti) * math.sin(2 * tj) * math.cos(2 * (pi_ - pj)) * c.xx)


def _kernel_coefficients(theta: float, phi: float) -> dict[str, float]:
    nx, ny, nz = bloch_vector(theta, phi)
    return {"i": 1.0, "x": -SQRT3 * nx, "y": -SQRT3 * ny, "z": -SQRT3 * nz}


def gwf_triple_closed(t: TripleCorrelatorInput, config: AngleConfig) -> float:
    """Three-site GWF from the Pauli expansion of rho_ijk against the product kernel.

    Each surviving expectation <s_i s_j s_k> enters with weight
    prod_site c(s), where c(1) = 1 and c(a) = -sqrt(3) n_a.
    """
    if config.n != 3:
        raise ValueError("three-site GWF needs a three-site angle config")
    coeffs = [_kernel_coefficients(th, ph) for th, ph in zip(config.thetas, config.phis)]
    total = 0.0
    for label, v in triple_terms(t).items():
        total += v * coeffs[0][label[0]] * coeffs[1][label[1]] * coeffs[2][label[2]]
    return total / 8.0


@dataclass(frozen=True)
class GWFExtremum:
    max: float
    argmax: AngleConfig
    min: float
    argmin: AngleConfig


_THETA_GRID = (0.0, math.pi / 8, math.pi / 4, 3 * math.pi / 8, math.pi / 2)


def _canonical_theta(theta: float) -> float:
    # theta and pi/2 - theta (for cos^2 2theta) are the same branch; name the z-branch pi/2
    if abs(math.cos(2 * theta)) > 1 - 1e-12:
        return math.pi / 2
    return theta


def extremize_gwf(c: CorrelatorSet, phi: float = 0.0) -> GWFExtremum:
    """Extremize the XX-symmetric two-site GWF over a common angle theta_i = theta_j.

    A coarse theta grid is refined by bounded golden-section search around the
    best grid point.  Exact ties between branches go to the smaller theta.
    """
    def f(theta):
        return gwf_xxz_closed(c, AngleConfig((theta, theta), (phi, phi)))

    def best(sign):
        vals = [sign * f(t) for t in _THETA_GRID]
        i = int(np.argmax(vals))
        lo = _THETA_GRID[max(i - 1, 0)]
        hi = _THETA_GRID[min(i + 1, len(_THETA_GRID) - 1)]
        res = minimize_scalar(lambda t: -sign * f(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-10})
        cand = [(vals[i], _THETA_GRID[i])]
        if -res.fun > vals[i] + 1e-14:
            cand.append((-res.fun, float(res.x)))
        v, theta = max(cand, key=lambda vt: vt[0])
        # ties across branches: keep the lowest theta among equal optima
        ties = [t for t in _THETA_GRID if abs(sign * f(t) - v) <= 1e-14]
        if ties and abs(sign * f(min(ties, key=_canonical_theta)) - v) <= 1e-14:
            theta = min((_canonical_theta(t) for t in ties))
        return sign * v, _canonical_theta(theta)

    vmax, tmax = best(+1.0)
    vmin, tmin = best(-1.0)
    return GWFExtremum(vmax, AngleConfig.uniform(tmax, phi, 2), vmin, AngleConfig.uniform(tmin, phi, 2))


# ---------------------------------------------------------------- reconstruction

N_THETA = 16
N_PHI = 16


@functools.lru_cache(maxsize=None)
def _site_nodes():
    """Per-site nodes (theta, phi) and weights for the phase-space measure.

    Gauss-Legendre in u = cos 2theta (sin 2theta dtheta = du / 2) times the
    trapezoid rule in phi; exact for the polynomials the kernel produces.
    """
    u, wu = np.polynomial.legendre.leggauss(N_THETA)
    theta = 0.5 * np.arccos(u)
    phi = 2 * math.pi * np.arange(N_PHI) / N_PHI
    wphi = np.full(N_PHI, 2 * math.pi / N_PHI)
    tt, pp = np.meshgrid(theta, phi, indexing="ij")
    ww = np.outer(wu / 2.0, wphi) / math.pi
    kernels = np.array([site_kernel(t, p) for t, p in zip(tt.ravel(), pp.ravel())])
    return tt.ravel(), pp.ravel(), ww.ravel(), kernels


def quadrature_nodes():
    """(thetas, phis, weights) of the per-site quadrature grid."""
    t, p, w, _ = _site_nodes()
    return t, p, w


def sample_gwf(op, n: int) -> np.ndarray:
    """GWF on the product quadrature grid, shape (nodes,) * n."""
    m = _as_matrix(op)
    _, _, _, k = _site_nodes()
    if n == 1:
        return np.real(np.einsum("ab,nba->n", m, k))
    if n == 2:
        r = m.reshape(2, 2, 2, 2)
        return np.real(np.einsum("abcd,mca,ndb->mn", r, k, k))
    raise ValueError("sampling is implemented for one and two sites")


def reconstruct_from_gwf(samples: np.ndarray, n: int, *, tol: float = 1e-10) -> np.ndarray:
    """rho = int W Delta dOmega on the quadrature grid.

    The reconstruction is checked by resampling it; a mismatch above ``tol``
    means the samples were not produced on this grid.
    """
    _, _, w, k = _site_nodes()
    samples = np.asarray(samples)
    if n == 1:
        rho = np.einsum("n,n,nab->ab", w, samples, k)
    elif n == 2:
        r = np.einsum("m,n,mn,mac,nbd->abcd", w, w, samples, k, k)
        rho = r.reshape(4, 4)
    else:
        raise ValueError("reconstruction is implemented for one and two sites")
    resid = np.max(np.abs(sample_gwf(rho, n) - samples))
    if resid > tol:
        raise ValueError(f"reconstruction residual {resid:.3e} above tolerance {tol:.1e}")
    return np.real_if_close(rho, tol=1e6)


def integrate_gwf(samples: np.ndarray, n: int) -> float:
    _, _, w, _ = _site_nodes()
    if n == 1:
        return float(w @ samples)
    return float(np.einsum("m,n,mn->", w, w, samples))


def overlap_gwf(samples_a: np.ndarray, samples_b: np.ndarray, n: int) -> float:
    return integrate_gwf(samples_a * samples_b, n)
