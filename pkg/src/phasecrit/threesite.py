"""Term-by-term comparison of the three-site GWF with the published closed form.

The published expression groups the Pauli expansion of Tr(rho_ijk Delta x Delta x
Delta) into pair and three-point terms, with the three-point functions replaced
by products.  :func:`gwf_triple_printed` transcribes it as printed (labels and
angle indices included), and :func:`discrepancy_table` sets each group against
the value derived here from the full expansion with exact three-point functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .correlators import TripleCorrelatorInput
from .phasespace import AngleConfig, bloch_vector

SQRT3 = math.sqrt(3.0)
C3 = 3.0 * SQRT3

NOTES = {
    "identity": "",
    "mz": "",
    "xx_ik": "",
    "xx_ij+jk": "printed form multiplies both adjacent pairs by <xx_ij>",
    "yy_ik": "",
    "yy_ij+jk": "printed label reads <yy_ik> and the second product mixes phi_j with theta_i",
    "zz_ik": "",
    "zz_ij+jk": "printed form multiplies both adjacent pairs by <zz_ij>",
    "xxz": "three-point function replaced by <xx_ij> mz",
    "xzx": "replaced by <xx_ik> mz with the opposite overall sign",
    "zxx": "absent from the printed form",
    "yyz": "three-point function replaced by <yy_ij> mz",
    "yzy": "replaced by <yy_ik> mz with the opposite overall sign",
    "zyy": "absent from the printed form",
    "zzz": "replaced by (<zz_ij> - <zz_ik>) mz",
}


@dataclass(frozen=True)
class TermRow:
    term: str
    printed: float
    derived: float
    note: str

    @property
    def difference(self) -> float:
        return self.printed - self.derived


def _angles(config: AngleConfig):
    if config.n != 3:
        raise ValueError("three-site comparison needs a three-site angle config")
    return [bloch_vector(t, p) for t, p in zip(config.thetas, config.phis)]


def printed_terms(t: TripleCorrelatorInput, config: AngleConfig) -> dict[str, float]:
    """Bracketed groups of the published expression (multiply the sum by 1/8)."""
    (xi, yi, zi), (xj, yj, zj), (xk, yk, zk) = _angles(config)
    ti, tj, tk = config.thetas
    pi_, pj, pk = config.phis
    s2 = lambda a: math.sin(2 * a)  # noqa: E731
    mz = t.mz
    return {
        "identity": 1.0,
        "mz": -SQRT3 * (zi + zj + zk) * mz,
        "xx_ik": 3 * xi * xk * t.ik.xx,
        "xx_ij+jk": 3 * (xi * xj + xj * xk) * t.ij.xx,
        "yy_ik": 3 * yi * yk * t.ik.yy,
        "yy_ij+jk": 3 * (s2(ti) * s2(tj) * s2(pi_) * s2(pj) + s2(ti) * s2(tk) * s2(pj) * s2(pk)) * t.ik.yy,
        "zz_ik": 3 * zi * zk * t.ik.zz,
        "zz_ij+jk": 3 * (zi * zj + zj * zk) * t.ij.zz,
        "xxz": -C3 * xi * xj * zk * t.ij.xx * mz,
        "xzx": C3 * xi * xk * zj * t.ik.xx * mz,
        "zxx": 0.0,
        "yyz": -C3 * yi * yj * zk * t.ij.yy * mz,
        "yzy": C3 * yi * yk * zj * t.ik.yy * mz,
        "zyy": 0.0,
        "zzz": -C3 * zi * zj * zk * (t.ij.zz - t.ik.zz) * mz,
    }


def derived_terms(t: TripleCorrelatorInput, config: AngleConfig) -> dict[str, float]:
    """The same groups from the Pauli expansion; their sum / 8 is the GWF."""
    (xi, yi, zi), (xj, yj, zj), (xk, yk, zk) = _angles(config)
    v = t.value
    return {
        "identity": 1.0,
        "mz": -SQRT3 * (zi + zj + zk) * t.mz,
        "xx_ik": 3 * xi * xk * t.ik.xx,
        "xx_ij+jk": 3 * (xi * xj * t.ij.xx + xj * xk * t.jk.xx),
        "yy_ik": 3 * yi * yk * t.ik.yy,
        "yy_ij+jk": 3 * (yi * yj * t.ij.yy + yj * yk * t.jk.yy),
        "zz_ik": 3 * zi * zk * t.ik.zz,
        "zz_ij+jk": 3 * (zi * zj * t.ij.zz + zj * zk * t.jk.zz),
        "xxz": -C3 * xi * xj * zk * v("xxz"),
        "xzx": -C3 * xi * zj * xk * v("xzx"),
        "zxx": -C3 * zi * xj * xk * v("zxx"),
        "yyz": -C3 * yi * yj * zk * v("yyz"),
        "yzy": -C3 * yi * zj * yk * v("yzy"),
        "zyy": -C3 * zi * yj * yk * v("zyy"),
        "zzz": -C3 * zi * zj * zk * v("zzz"),
    }


def gwf_triple_printed(t: TripleCorrelatorInput, config: AngleConfig) -> float:
    """The published three-site expression, transcribed as printed."""
    return sum(printed_terms(t, config).values()) / 8.0


def discrepancy_table(t: TripleCorrelatorInput, config: AngleConfig) -> list[TermRow]:
    p, d = printed_terms(t, config), derived_terms(t, config)
    return [TermRow(k, p[k] / 8.0, d[k] / 8.0, NOTES[k]) for k in p]
