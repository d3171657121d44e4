"""End-to-end acceptance checks; one test per criterion, each with its runtime budget."""

import math
import time

import numpy as np
import pytest

from phasecrit.correlators import build_rho_pair
from phasecrit.criticality import (
    DetectionKind,
    Observable,
    SweepSpec,
    Sweeper,
    Z_DOWN,
    Z_UP,
    concurrence_pair,
    detect_cusp,
    detect_discontinuity,
    detect_divergence,
    distance_spread,
    dwf_negativity,
    factorization_field,
    factorization_scan,
    pair_correlators,
)
from phasecrit.phasespace import XY_PAIR_CLASSES, AngleConfig, dwf
from phasecrit.validation import run_suites, SUITES


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0
        if exc[0] is None:
            assert self.elapsed <= self.seconds, f"took {self.elapsed:.1f} s > {self.seconds} s"


def _report(n, ok, detail):
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")


@pytest.mark.criterion(1, "XY 2QPT: six DWF classes and both GWF configs diverge at lambda = 1.00 +- 0.01")
def test_criterion_1_xy_second_order():
    observables = [Observable("dwf", point=p) for p in XY_PAIR_CLASSES]
    observables += [Observable("gwf", thetas=(c[0],) * 2, phis=(c[1],) * 2) for c in (Z_DOWN, Z_UP)]
    locs = []
    with Budget(60):
        for obs in observables:
            rep = detect_divergence(Sweeper.from_spec(SweepSpec("xy", obs, 0.5, 1.5, 256, 3, gamma=0.5)))
            locs.append((obs, rep.kind, rep.location))
    ok = all(k is DetectionKind.DIVERGENCE and abs(x - 1.0) <= 0.01 for _, k, x in locs)
    _report(1, ok, " ".join(f"{x:.4f}" for _, _, x in locs))
    for obs, kind, x in locs:
        assert kind is DetectionKind.DIVERGENCE, obs
        assert x == pytest.approx(1.0, abs=0.01), obs
    spacing = 1.0 / 255
    assert max(x for *_, x in locs) - min(x for *_, x in locs) <= spacing


@pytest.mark.criterion(2, "factorization line at 1/sqrt(1-gamma^2) from the GWF spread and the sqrt(rho) DWF jump")
def test_criterion_2_factorization_line():
    rows = []
    with Budget(180):
        for gamma in (0.3, 0.5, 0.8):
            rows.append((gamma, factorization_scan(gamma, points=512)))
    spread_spacing = (3.0 - 1.005) / 511
    ok = True
    for gamma, rep in rows:
        lam_f = factorization_field(gamma)
        m = rep.metrics
        ok &= (rep.kind is DetectionKind.FACTORIZATION_LINE
               and abs(rep.location - lam_f) <= spread_spacing
               and m["sqrt_detected"] and abs(m["sqrt_location"] - lam_f) <= m["spacing"]
               and not m["rho_detected"])
    ok &= abs(rows[1][1].location - 1.1547) <= 0.005
    _report(2, ok, " ".join(f"gamma={g}: {r.location:.5f}/{r.metrics['sqrt_location']:.5f}" for g, r in rows))
    for gamma, rep in rows:
        lam_f = factorization_field(gamma)
        m = rep.metrics
        assert rep.kind is DetectionKind.FACTORIZATION_LINE, gamma
        assert abs(rep.location - lam_f) <= spread_spacing, gamma
        assert m["sqrt_detected"], gamma
        assert abs(m["sqrt_location"] - lam_f) <= m["spacing"], gamma
        assert not m["rho_detected"], gamma
    assert rows[1][1].location == pytest.approx(1.1547, abs=0.005)


@pytest.mark.criterion(3, "GWF distance independence at lambda_f (<= 1e-6) and not at lambda_f +- 0.1 (>= 1e-3)")
def test_criterion_3_distance_independence():
    lam_f = factorization_field(0.5)
    cfg = AngleConfig.uniform(*Z_DOWN, 2)
    with Budget(60):
        table = {sq: [distance_spread(x, 0.5, (1, 20), cfg, sqrt=sq) for x in (lam_f - 0.1, lam_f, lam_f + 0.1)]
                 for sq in (False, True)}
    ok = all(v[1] <= 1e-6 and v[0] >= 1e-3 and v[2] >= 1e-3 for v in table.values())
    _report(3, ok, " ".join(f"{'sqrt' if k else 'rho'}: " + ",".join(f"{x:.2e}" for x in v) for k, v in table.items()))
    for v in table.values():
        assert v[1] <= 1e-6
        assert v[0] >= 1e-3 and v[2] >= 1e-3


@pytest.mark.criterion(4, "XXZ 1QPT: corner DWF jumps at delta = -1 within one spacing (N=16)")
def test_criterion_4_xxz_first_order():
    spec = SweepSpec("xxz", Observable("dwf", point="00,00"), -2.0, 2.5, 512, 2, n_sites=16)
    with Budget(300):
        rep = detect_discontinuity(Sweeper.from_spec(spec))
    h = 4.5 / 511
    ok = rep.kind is DetectionKind.DISCONTINUITY and abs(rep.location + 1.0) <= h
    _report(4, ok, rep.line())
    assert rep.kind is DetectionKind.DISCONTINUITY
    assert abs(rep.location + 1.0) <= h


@pytest.mark.criterion(5, "XXZ CQPT: cusps of W_M and extremized GWF at delta = 1, argmax switch, shift vs N")
def test_criterion_5_xxz_infinite_order():
    h = 4.5 / 511
    shifts = {}
    switch = None
    with Budget(600):
        for n in (12, 14, 16):
            dw = Sweeper.from_spec(SweepSpec("xxz", Observable("dwf-extremes"), -2.0, 2.5, 512, 2, n_sites=n))
            gw = Sweeper.from_spec(SweepSpec("xxz", Observable("gwf-extremes"), -2.0, 2.5, 512, 2, n_sites=n))
            r_dwf, r_gwf = detect_cusp(dw, "W_M"), detect_cusp(gw, "GWF_max")
            shifts[n] = (r_dwf, r_gwf)
            if n == 16:
                fine = gw.sample(2, center=r_gwf.location)
                theta = fine.values[:, fine.column("theta_max")]
                i = int(np.flatnonzero(np.abs(np.diff(theta)) > 0.1)[0])
                switch = (float(fine.grid[i]), float(fine.grid[i + 1]), theta[i], theta[i + 1])
    r_dwf, r_gwf = shifts[16]
    offsets = [max(abs(a.location - 1.0), abs(b.location - 1.0)) for a, b in (shifts[n] for n in (12, 14, 16))]
    mid = 0.5 * (switch[0] + switch[1])
    ok = (r_dwf.kind is DetectionKind.CUSP and r_gwf.kind is DetectionKind.CUSP
          and abs(r_dwf.location - 1) <= 2 * h and abs(r_gwf.location - 1) <= 2 * h
          and abs(mid - r_gwf.location) <= 2 * h
          and np.allclose(sorted(switch[2:]), [math.pi / 4, math.pi / 2])
          and all(b <= a + 1e-12 for a, b in zip(offsets, offsets[1:])))
    _report(5, ok, f"W_M {r_dwf.location:.5f} GWF {r_gwf.location:.5f} switch {mid:.5f} "
                   f"offsets N=12,14,16: " + ",".join(f"{o:.2e}" for o in offsets))
    for n in (12, 14, 16):
        assert shifts[n][0].kind is DetectionKind.CUSP and shifts[n][1].kind is DetectionKind.CUSP, n
    assert abs(r_dwf.location - 1.0) <= 2 * h
    assert abs(r_gwf.location - 1.0) <= 2 * h
    assert abs(mid - r_gwf.location) <= 2 * h
    assert sorted((switch[2], switch[3])) == pytest.approx([math.pi / 4, math.pi / 2])
    assert all(b <= a + 1e-12 for a, b in zip(offsets, offsets[1:]))


@pytest.mark.criterion(6, "corner-class DWF negativity > 0 exactly where concurrence > 0 (256 delta points)")
def test_criterion_6_negativity_concurrence():
    spec = SweepSpec("xxz", Observable("dwf", point="00,00"), -2.0, 2.5, 256, n_sites=16)
    grid = np.linspace(-2.0, 2.5, 256)
    mismatches = []
    with Budget(300):
        for x in grid:
            c = pair_correlators(spec, float(x))
            w = dwf(build_rho_pair(c).entries)
            corner = sum(max(0.0, -w.at(p)) for p in ("00,00", "00,11", "11,00", "11,11"))
            conc = concurrence_pair(c)
            if (corner > 0) != (conc > 0) or (dwf_negativity(w) > 0) != (conc > 0):
                mismatches.append(float(x))
    _report(6, not mismatches, f"{len(grid) - len(mismatches)}/{len(grid)} points agree")
    assert not mismatches


@pytest.mark.criterion(7, "three-site GWF: divergence at lambda = 1, no discontinuity in [1.05, 1.25]")
def test_criterion_7_three_site():
    found = []
    with Budget(120):
        for cfg in (Z_DOWN, Z_UP):
            obs = Observable("gwf", thetas=(cfg[0],) * 3, phis=(cfg[1],) * 3)
            div = detect_divergence(Sweeper.from_spec(SweepSpec("xy", obs, 0.5, 1.5, 256, 3, gamma=0.5)))
            near = Sweeper.from_spec(SweepSpec("xy", obs, 1.05, 1.25, 256, 2, gamma=0.5))
            jumps = [detect_discontinuity(near), detect_discontinuity(near, "d1"), detect_cusp(near)]
            found.append((div, jumps))
    ok = all(d.kind is DetectionKind.DIVERGENCE and abs(d.location - 1) <= 0.01
             and not any(j.detected for j in js) for d, js in found)
    _report(7, ok, " ".join(f"div {d.location:.4f} jumps {[j.kind.value for j in js]}" for d, js in found))
    for d, js in found:
        assert d.kind is DetectionKind.DIVERGENCE
        assert d.location == pytest.approx(1.0, abs=0.01)
        assert not any(j.detected for j in js)


@pytest.mark.criterion(8, "property suites: SW, DWF identities, closed forms, oracle, synthetic detectors")
def test_criterion_8_property_suites():
    with Budget(180):
        checks = run_suites(SUITES, seed=0)
    failed = [c.row() for c in checks if not c.passed]
    _report(8, not failed, f"{len(checks) - len(failed)}/{len(checks)} checks")
    assert not failed, "\n".join(failed)
