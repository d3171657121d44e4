"""Magnetization and spin-spin correlators, and the reduced states built from them.

Two independent routes produce a :class:`CorrelatorSet`:

* the infinite XY chain through its Jordan-Wigner free-fermion solution
  (a single quadrature for the Majorana contraction ``G(r)``, Toeplitz
  determinants for the transverse correlators, Pfaffians for anything longer);
* exact diagonalization of a finite ring (:mod:`phasecrit.chains`).

Majorana conventions used throughout: ``A_l = c_l^+ + c_l``, ``B_l = c_l^+ - c_l``
with spin up as the empty mode, so that ``Z_l = A_l B_l``,
``X_l = (prod_{m<l} A_m B_m) A_l`` and ``Y_l = i (prod_{m<l} A_m B_m) B_l``.
The only non-trivial contraction is ``<A_l B_{l+r}> = G(r)``.
"""

from __future__ import annotations

import enum
import functools
import itertools
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from scipy.integrate import quad_vec

from .chains import DensityMatrix, FiniteChain, ModelKind, ModelSpec, solve

QUAD_EPSABS = 1e-12
QUAD_LIMIT = 2 ** 14
PSD_TOL = 1e-9

PAULI = {
    "i": np.eye(2),
    "x": np.array([[0.0, 1.0], [1.0, 0.0]]),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]]),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]]),
}


class Source(enum.Enum):
    THERMO_LIMIT = "thermo"
    FINITE_ED = "ed"
    FERRO_ANALYTIC = "ferro"
    OTHER = "other"


class UnphysicalInputError(ValueError):
    """Correlators or matrices that do not describe a valid quantum state."""


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class CorrelatorSet:
    """<Z>, and <X_i X_{i+m}>, <Y_i Y_{i+m}>, <Z_i Z_{i+m}> at distance m."""

    mz: float
    xx: float
    yy: float
    zz: float
    distance: int = 1
    source: Source = Source.OTHER

    def __post_init__(self):
        for name in ("mz", "xx", "yy", "zz"):
            v = getattr(self, name)
            if not math.isfinite(v) or abs(v) > 1.0 + 1e-12:
                raise UnphysicalInputError(f"{name}={v!r} outside [-1, 1]")
        if self.distance < 1:
            raise ValueError("distance must be a positive integer")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.mz, self.xx, self.yy, self.zz)

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(_pair_matrix(self))[0])

    def is_physical(self) -> bool:
        return self.min_eigenvalue() >= -PSD_TOL

    @classmethod
    def from_rho(cls, rho, distance: int = 1, source: Source = Source.OTHER) -> "CorrelatorSet":
        """Read the surviving correlators off a two-site state (mz averaged over both sites)."""
        m = rho.entries if isinstance(rho, DensityMatrix) else np.asarray(rho)

        def ev(a, b):
            return float(np.real(np.trace(m @ np.kron(PAULI[a], PAULI[b]))))

        mz = 0.5 * (ev("z", "i") + ev("i", "z"))
        return cls(mz, ev("x", "x"), ev("y", "y"), ev("z", "z"), distance, source)


@dataclass(frozen=True)
class TripleCorrelatorInput:
    """Inputs for a three-site state on sites i < j < k.

    ``three_point`` maps Pauli labels over (i, j, k), e.g. ``"xzx"`` for
    <X_i Z_j X_k>, to their values.  Missing entries are closed with products of
    ``mz`` and the pair correlators (see :func:`closure_three_point`).
    """

    mz: float
    ij: CorrelatorSet
    jk: CorrelatorSet
    ik: CorrelatorSet
    three_point: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.ik.distance != self.ij.distance + self.jk.distance:
            raise ValueError(
                f"distances inconsistent: m_ik={self.ik.distance} != "
                f"m_ij + m_jk = {self.ij.distance + self.jk.distance}"
            )

    def value(self, label: str) -> float:
        if label in self.three_point:
            return self.three_point[label]
        return closure_three_point(self, label)


THREE_POINT_LABELS = ("zzz", "xxz", "xzx", "zxx", "yyz", "yzy", "zyy")


def closure_three_point(t: TripleCorrelatorInput, label: str) -> float:
    """Three-point function approximated from mz and pair correlators.

    Transverse pairs are factorized against the remaining magnetization;
    <ZZZ> keeps the pairwise Wick contractions and drops the cyclic one.
    """
    mz = t.mz
    if label == "zzz":
        return mz * (t.ij.zz + t.jk.zz + t.ik.zz) - 2.0 * mz ** 3
    pairs = {"xxz": ("ij", "x"), "xzx": ("ik", "x"), "zxx": ("jk", "x"),
             "yyz": ("ij", "y"), "yzy": ("ik", "y"), "zyy": ("jk", "y")}
    if label not in pairs:
        raise KeyError(label)
    pair, axis = pairs[label]
    c = getattr(t, pair)
    return (c.xx if axis == "x" else c.yy) * mz


# ---------------------------------------------------------------- free fermions

def _g_integrand(lam: float, gamma: float, r: np.ndarray):
    def f(phi):
        c, s = math.cos(phi), math.sin(phi)
        disp = math.sqrt((1.0 - lam * c) ** 2 + (lam * gamma * s) ** 2)
        return (np.cos(r * phi) * (1.0 - lam * c) + gamma * lam * np.sin(r * phi) * s) / (math.pi * disp)
    return f


@functools.lru_cache(maxsize=4096)
def _g_table(lam: float, gamma: float, rmax: int) -> np.ndarray:
    r = np.arange(-rmax, rmax + 1, dtype=float)
    f = _g_integrand(lam, gamma, r)
    val, err, info = quad_vec(f, 0.0, math.pi, epsabs=QUAD_EPSABS, epsrel=0.0,
                              limit=QUAD_LIMIT, full_output=True)
    if info.status != 0:
        # kink of the dispersion at phi = 0 when lam -> 1: retry on finer fixed panels
        edges = np.concatenate([[0.0], np.geomspace(1e-6, 1e-1, 6), np.linspace(0.2, math.pi, 16)])
        val = np.zeros_like(r)
        err = 0.0
        for a, b in zip(edges[:-1], edges[1:]):
            v, e, info = quad_vec(f, a, b, epsabs=QUAD_EPSABS / len(edges), epsrel=0.0,
                                  limit=QUAD_LIMIT, full_output=True)
            val += v
            err += e
        if info.status != 0 or err > 1e-10:
            raise QuadratureError(
                f"G(r) quadrature did not converge at lam={lam}, gamma={gamma} (error estimate {err:.3e})"
            )
    val.setflags(write=False)
    return val


class FreeFermionXY:
    """Ground-state contractions of the infinite XY chain at fixed (lam, gamma)."""

    def __init__(self, lam: float, gamma: float, rmax: int = 24):
        if lam < 0 or not 0.0 <= gamma <= 1.0:
            raise ValueError(f"invalid couplings lam={lam}, gamma={gamma}")
        self.lam = float(lam)
        self.gamma = float(gamma)
        # fixed table width keeps G(r) bitwise independent of which distance asked for it
        self.rmax = max(24, 8 * math.ceil(rmax / 8))
        self._g = _g_table(self.lam, self.gamma, self.rmax)

    def G(self, r: int) -> float:
        if abs(r) > self.rmax:
            raise ValueError(f"|r|={abs(r)} beyond table size {self.rmax}")
        return float(self._g[r + self.rmax])

    @property
    def mz(self) -> float:
        return self.G(0)

    def xx(self, m: int) -> float:
        mat = np.array([[self.G(i - j - 1) for j in range(m)] for i in range(m)])
        return (-1) ** m * scipy.linalg.det(mat)

    def yy(self, m: int) -> float:
        mat = np.array([[self.G(j - i + 1) for j in range(m)] for i in range(m)])
        return (-1) ** m * scipy.linalg.det(mat)

    def zz(self, m: int) -> float:
        return self.mz ** 2 - self.G(m) * self.G(-m)

    def contraction(self, a: tuple[str, int], b: tuple[str, int]) -> float:
        """<gamma_a gamma_b> for two Majoranas given as (kind, site)."""
        (ka, la), (kb, lb) = a, b
        if ka == kb:
            if la != lb:
                return 0.0
            return 1.0 if ka == "A" else -1.0
        if ka == "A":
            return self.G(lb - la)
        return -self.G(la - lb)

    def expect(self, ops: dict[int, str]) -> float:
        """Expectation of a Pauli string {site: 'x'|'y'|'z'} by Wick's theorem."""
        coeff, word = pauli_to_majorana(ops)
        if len(word) % 2:
            return 0.0
        n = len(word)
        if n == 0:
            return float(np.real(coeff))
        m = np.zeros((n, n))
        for a in range(n):
            for b in range(a + 1, n):
                m[a, b] = self.contraction(word[a], word[b])
                m[b, a] = -m[a, b]
        val = coeff * pfaffian(m)
        return float(np.real(val))


def pauli_to_majorana(ops: dict[int, str]) -> tuple[complex, list[tuple[str, int]]]:
    """Rewrite a Pauli string as (coefficient, reduced Majorana word)."""
    coeff = 1.0 + 0.0j
    word: list[tuple[str, int]] = []
    for site in sorted(ops):
        p = ops[site]
        if p == "z":
            word += [("A", site), ("B", site)]
            continue
        string = [(k, l) for l in range(site) for k in ("A", "B")]
        if p == "x":
            word += string + [("A", site)]
        elif p == "y":
            coeff *= 1j
            word += string + [("B", site)]
        else:
            raise ValueError(f"unknown Pauli label {p!r}")
    # cancel repeated Majoranas: A^2 = 1, B^2 = -1
    changed = True
    while changed:
        changed = False
        for a in range(len(word)):
            for b in range(a + 1, len(word)):
                if word[a] == word[b]:
                    coeff *= (-1) ** (b - a - 1)
                    if word[a][0] == "B":
                        coeff *= -1
                    word = word[:a] + word[a + 1:b] + word[b + 1:]
                    changed = True
                    break
            if changed:
                break
    return coeff, word


def pfaffian(a: np.ndarray) -> float:
    """Pfaffian of a real antisymmetric matrix (Parlett-Reid with pivoting)."""
    a = np.array(a, dtype=float)
    n = a.shape[0]
    if n % 2:
        return 0.0
    pf = 1.0
    for k in range(0, n - 1, 2):
        kp = k + 1 + int(np.argmax(np.abs(a[k + 1:, k])))
        if kp != k + 1:
            a[[k + 1, kp], :] = a[[kp, k + 1], :]
            a[:, [k + 1, kp]] = a[:, [kp, k + 1]]
            pf = -pf
        if a[k + 1, k] == 0.0:
            return 0.0
        pf *= a[k, k + 1]
        if k + 2 < n:
            tau = a[k, k + 2:] / a[k, k + 1]
            col = a[k + 2:, k + 1].copy()
            a[k + 2:, k + 2:] += np.outer(tau, col) - np.outer(col, tau)
    return pf


def xy_thermo_correlators(lam: float, gamma: float, m: int) -> CorrelatorSet:
    """Correlators of the infinite XY chain at distance ``m``."""
    if m < 1:
        raise ValueError("distance must be >= 1")
    ff = FreeFermionXY(lam, gamma, rmax=m + 1)
    return CorrelatorSet(
        _clip(ff.mz), _clip(ff.xx(m)), _clip(ff.yy(m)), _clip(ff.zz(m)), m, Source.THERMO_LIMIT
    )


def xy_thermo_triple(lam: float, gamma: float, m_ij: int = 1, m_jk: int = 1) -> TripleCorrelatorInput:
    """Three-site inputs on sites (0, m_ij, m_ij + m_jk) with exact three-point functions."""
    k = m_ij + m_jk
    ff = FreeFermionXY(lam, gamma, rmax=k + 1)
    sites = (0, m_ij, k)
    three = {}
    for label in THREE_POINT_LABELS:
        three[label] = ff.expect(dict(zip(sites, label)))
    return TripleCorrelatorInput(
        ff.mz,
        xy_thermo_correlators(lam, gamma, m_ij),
        xy_thermo_correlators(lam, gamma, m_jk),
        xy_thermo_correlators(lam, gamma, k),
        three,
    )


def _clip(v: float) -> float:
    # quadrature round-off can push saturated values a hair past +-1
    return float(min(1.0, max(-1.0, v)))


# ---------------------------------------------------------------- finite rings

def _site_bits(n: int) -> list[np.ndarray]:
    s = np.arange(2 ** n, dtype=np.int64)
    return [1 - 2 * ((s >> (n - 1 - i)) & 1) for i in range(n)]


def ed_correlators(model: ModelSpec, n_sites: int, m: int, *, bundle=None) -> CorrelatorSet:
    """Ring-averaged correlators of the finite-N ground state (mixture if degenerate)."""
    if not 1 <= m < n_sites / 2:
        raise ValueError(f"distance m={m} must satisfy 1 <= m < N/2 for N={n_sites}")
    if bundle is None:
        bundle = solve(model, FiniteChain(n_sites))
    n = n_sites
    z = _site_bits(n)
    s = np.arange(2 ** n, dtype=np.int64)
    mz = xx = yy = zz = 0.0
    for psi in bundle.states:
        p = psi * psi
        for i in range(n):
            j = (i + m) % n
            mz += p @ z[i]
            zz += p @ (z[i] * z[j])
            mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
            f = psi * psi[s ^ mask]
            xx += f.sum()
            # Y Y = +1 on antiparallel pairs, -1 on parallel ones (times the flip)
            yy += f @ (-(z[i] * z[j]))
    norm = n * bundle.degeneracy
    return CorrelatorSet(
        _clip(mz / norm), _clip(xx / norm), _clip(yy / norm), _clip(zz / norm), m, Source.FINITE_ED
    )


def ferro_correlators(m: int) -> CorrelatorSet:
    """Equal mixture of the two fully polarized states (XXZ, delta <= -1)."""
    return CorrelatorSet(0.0, 0.0, 0.0, 1.0, m, Source.FERRO_ANALYTIC)


def xxz_correlators(delta: float, m: int = 1, n_sites: int = 16) -> CorrelatorSet:
    """XXZ correlators: analytic ferromagnet for delta <= -1, ED otherwise."""
    if delta <= -1.0:
        return ferro_correlators(m)
    return ed_correlators(ModelSpec.xxz(delta), n_sites, m)


def extrapolate_inverse_n(sizes, values, power: int = 1) -> tuple[float, float]:
    """Linear fit in 1/N**power; returns (N -> infinity intercept, rms residual).

    power=2 suits periodic Heisenberg rings, whose bond energy converges as 1/N^2.
    """
    x = 1.0 / np.asarray(sizes, dtype=float) ** power
    y = np.asarray(values, dtype=float)
    coef, *_ = np.linalg.lstsq(np.vstack([np.ones_like(x), x]).T, y, rcond=None)
    resid = y - (coef[0] + coef[1] * x)
    return float(coef[0]), float(np.sqrt(np.mean(resid ** 2)))


# ---------------------------------------------------------------- reduced states

def _pair_matrix(c: CorrelatorSet) -> np.ndarray:
    p = PAULI
    m = (np.eye(4)
         + c.mz * (np.kron(p["z"], p["i"]) + np.kron(p["i"], p["z"]))
         + c.xx * np.kron(p["x"], p["x"])
         + c.yy * np.real(np.kron(p["y"], p["y"]))
         + c.zz * np.kron(p["z"], p["z"]))
    return 0.25 * m


def build_rho_single(mz: float) -> DensityMatrix:
    if abs(mz) > 1.0:
        raise UnphysicalInputError(f"|mz|={abs(mz)} exceeds 1")
    return DensityMatrix(np.diag([0.5 * (1 + mz), 0.5 * (1 - mz)]))


def build_rho_pair(c: CorrelatorSet) -> DensityMatrix:
    m = _pair_matrix(c)
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -PSD_TOL:
        raise UnphysicalInputError(f"correlators give a non-PSD state (eigenvalue {lo:.3e})")
    return DensityMatrix(m)


def triple_terms(t: TripleCorrelatorInput) -> dict[str, float]:
    """All non-vanishing Pauli expectations over (i, j, k), keyed by 3-letter labels ('i' = identity)."""
    mz = t.mz
    terms = {"iii": 1.0, "zii": mz, "izi": mz, "iiz": mz}
    for lab, c in (("{}{}i", t.ij), ("i{}{}", t.jk), ("{}i{}", t.ik)):
        terms[lab.format("x", "x")] = c.xx
        terms[lab.format("y", "y")] = c.yy
        terms[lab.format("z", "z")] = c.zz
    for label in THREE_POINT_LABELS:
        terms[label] = t.value(label)
    return terms


def build_rho_triple(t: TripleCorrelatorInput) -> DensityMatrix:
    m = np.zeros((8, 8), dtype=complex)
    for label, v in triple_terms(t).items():
        m += v * np.kron(np.kron(PAULI[label[0]], PAULI[label[1]]), PAULI[label[2]])
    m = np.real(m) / 8.0
    m = 0.5 * (m + m.T)
    lo = np.linalg.eigvalsh(m)[0]
    if lo < -PSD_TOL:
        raise UnphysicalInputError(f"three-site state is not PSD (eigenvalue {lo:.3e})")
    return DensityMatrix(m)


def pauli_expectation(rho: np.ndarray, label: str) -> float:
    op = functools.reduce(np.kron, (PAULI[c] for c in label))
    return float(np.real(np.trace(rho @ op)))


def all_labels(n: int):
    return ("".join(t) for t in itertools.product("ixyz", repeat=n))
