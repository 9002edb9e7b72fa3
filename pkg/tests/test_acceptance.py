"""Acceptance suite: production-size runs for every stated criterion.

Run with `pytest tests/test_acceptance.py -s -v` to see one PASS/FAIL line
per criterion. The heavy spectra are computed once in session fixtures and
shared. Total runtime is a few minutes on a desktop machine.
"""

import math
import time

import numpy as np
import pytest

from pseudosusy.discretize import build_grid, schrodinger_matrix
from pseudosusy.eigen import eigen_dense, eigvec_for
from pseudosusy.spectra import dirac_spectrum, sector_spectrum
from pseudosusy.verify import (GroundStateAnnihilated, action_convergence,
                               analytic_vs_numeric, check_intertwining,
                               check_pseudo_adjoint, check_pseudo_hermiticity,
                               map_eigenfunction, supercharge_algebra)


def report(num, ok, detail):
    line = f"{'PASS' if ok else 'FAIL'} criterion {num}: {detail}"
    print(line)
    assert ok, line


def nearest(levels, target):
    arr = np.asarray(levels, dtype=float)
    return float(np.min(np.abs(arr - target))) if len(arr) else math.inf


# -- shared production-size runs ------------------------------------------------

@pytest.fixture(scope="session")
def scarf_sectors(scarf):
    t0 = time.time()
    res = {i: sector_spectrum(scarf, 12.0, 800, i) for i in (1, 2)}
    return res, time.time() - t0


@pytest.fixture(scope="session")
def scarf_dirac(scarf):
    return dirac_spectrum(scarf, 12.0, 800)


@pytest.fixture(scope="session")
def osc_sector_fine(osc):
    return sector_spectrum(osc, 8.0, 800, 1)


@pytest.fixture(scope="session")
def osc_sector_coarse(osc):
    return sector_spectrum(osc, 8.0, 400, 1)


@pytest.fixture(scope="session")
def osc_dirac(osc):
    return dirac_spectrum(osc, 8.0, 800)


@pytest.fixture(scope="session")
def stanh_sector(stanh):
    return sector_spectrum(stanh, 12.0, 800, 1)


# -- criteria ---------------------------------------------------------------------

def test_criterion_1_scarf_partner_spectra(scarf_sectors):
    res, elapsed = scarf_sectors
    s1, s2 = res[1], res[2]
    ok = (len(s1.levels) == 2
          and abs(s1.levels[0]) <= 1e-3
          and abs(s1.levels[1] - 3.0) <= 1e-3
          and s1.max_imag <= 1e-6
          and len(s2.levels) == 1
          and abs(s2.levels[0] - 3.0) <= 1e-3
          and nearest(s2.levels, 0.0) >= 0.5
          and elapsed <= 150.0)
    report(1, ok,
           f"sector1 levels {np.round(s1.levels, 6)} (im<={s1.max_imag:.1e}), "
           f"sector2 levels {np.round(s2.levels, 6)}, runtime {elapsed:.0f}s")


def test_criterion_2_scarf_dirac_series(scarf_dirac):
    lv = scarf_dirac.levels
    gaps = {t: nearest(lv, t) for t in (1.0, 2.0, -2.0)}
    ok = (len(lv) == 3
          and all(g <= 1e-3 for g in gaps.values())
          and nearest(lv, -1.0) >= 0.3)
    report(2, ok,
           f"dirac levels {np.round(lv, 6)}, gaps to (1, 2, -2) "
           f"{[f'{gaps[t]:.1e}' for t in (1.0, 2.0, -2.0)]}, "
           f"distance to -1: {nearest(lv, -1.0):.2f}")


def test_criterion_3_oscillator_ladder(osc_sector_fine, osc_sector_coarse):
    fine, coarse = osc_sector_fine, osc_sector_coarse
    gaps = {t: nearest(fine.levels, t) for t in (0.0, 4.0, 8.0, 12.0)}
    companion_ok = True
    comp_note = []
    for k in range(3):
        target = 4.0 * k + 1.6
        e_fine = nearest(fine.levels, target)
        e_coarse = nearest(coarse.levels, target)
        comp_note.append(f"{target}: {e_coarse:.1e}->{e_fine:.1e}")
        companion_ok = companion_ok and e_fine < e_coarse
    ok = (all(g <= 1e-2 for g in gaps.values())
          and fine.max_imag <= 1e-6
          and companion_ok)
    report(3, ok,
           f"ladder gaps {[f'{gaps[t]:.1e}' for t in (0.0, 4.0, 8.0, 12.0)]}, "
           f"max_im {fine.max_imag:.1e}, companion branch refinement "
           f"[{'; '.join(comp_note)}], complex pairs reported: "
           f"{len(fine.complex_pairs)}")


def test_criterion_4_oscillator_dirac(osc_dirac):
    lv = osc_dirac.levels
    targets = [1.0, math.sqrt(5.0), 3.0, -math.sqrt(5.0), -3.0]
    gaps = {t: nearest(lv, t) for t in targets}
    ok = (all(g <= 1e-2 for g in gaps.values())
          and nearest(lv, -1.0) >= 0.3)
    report(4, ok,
           f"gaps {[f'{g:.1e}' for g in gaps.values()]} to (1, sqrt5, 3, "
           f"-sqrt5, -3), distance to -1: {nearest(lv, -1.0):.2f}")


def test_criterion_5_exact_operator_identities(scarf, osc, stanh):
    worst = {}
    for model, xm in ((scarf, 12.0), (osc, 8.0), (stanh, 12.0)):
        grid = build_grid(xm, 400)
        rs = []
        rs += [c.residual for c in check_intertwining(model, grid, "factored")]
        rs += [check_pseudo_hermiticity(model, grid, i, "factored").residual
               for i in (1, 2)]
        rs += [c.residual for c in supercharge_algebra(model, grid)]
        worst[model.kind] = max(rs)
    ok = all(w <= 1e-12 for w in worst.values())
    report(5, ok, "worst factored-identity residual per model "
                  + ", ".join(f"{k}={v:.1e}" for k, v in worst.items())
                  + " (block-Dirac square checked for pseudoscalar models)")


def test_criterion_6_signed_pseudo_adjoint(scarf, osc):
    rs = {}
    for model, xm in ((scarf, 12.0), (osc, 8.0)):
        rs[model.kind] = check_pseudo_adjoint(model, build_grid(xm, 400)).residual
    ok = all(v <= 1e-12 for v in rs.values())
    report(6, ok, "signed parity-adjoint residuals "
                  + ", ".join(f"{k}={v:.1e}" for k, v in rs.items()))


def test_criterion_7_eigenfunction_transport(scarf):
    grid = build_grid(12.0, 800)
    h1 = schrodinger_matrix(scarf, grid, 1, "factored")
    spec = eigen_dense(h1, meta=grid.meta())
    vals = spec.values
    dense = h1.to_dense()
    from pseudosusy.eigen import EigenPair
    lam1 = vals[int(np.argmin(np.abs(vals - 3.0)))]
    excited = EigenPair(lam1, eigvec_for(dense, lam1))
    mapped = map_eigenfunction(scarf, grid, excited)
    lam0 = vals[int(np.argmin(np.abs(vals)))]
    ground = EigenPair(lam0, eigvec_for(dense, lam0))
    try:
        map_eigenfunction(scarf, grid, ground)
        annihilated, ratio = False, math.inf
    except GroundStateAnnihilated as exc:
        annihilated, ratio = True, exc.ratio
    ok = mapped.residual <= 1e-8 and annihilated and ratio <= 1e-4
    report(7, ok, f"mapped residual {mapped.residual:.1e} at eps={lam1.real:.4f}, "
                  f"ground annihilation ratio {ratio:.1e}")


def test_criterion_8_analytic_alignment(scarf, osc):
    defects = {}
    for model, xm, ns in ((scarf, 12.0, (0, 1)), (osc, 8.0, (0, 1, 2))):
        for n in ns:
            defects[f"{model.kind}[{n}]"] = analytic_vs_numeric(
                model, build_grid(xm, 800), 1, n)
    refine_ok = True
    refine_note = []
    for model, xm in ((scarf, 12.0), (osc, 8.0)):
        d_coarse = analytic_vs_numeric(model, build_grid(xm, 400), 1, 0)
        d_fine = defects[f"{model.kind}[0]"]
        refine_note.append(f"{model.kind}: {d_coarse:.1e}->{d_fine:.1e}")
        refine_ok = refine_ok and d_fine < d_coarse
    ok = all(d <= 1e-4 for d in defects.values()) and refine_ok
    report(8, ok, "alignment defects "
                  + ", ".join(f"{k}={v:.1e}" for k, v in defects.items())
                  + f"; refinement [{'; '.join(refine_note)}]")


# Independent oracle for the scalar model, produced before the main build:
# dense direct-mode diagonalization at n = 3200 on the same box, values
# cross-checked below against the shape-invariance closed form
#   thr - (lam - n)^2 + (a lam)^2 / (lam - n)^2,  thr = lam^2 - a^2.
SCALAR_ORACLE = (-4.9789522e-05, 7.19426811, 12.7496778)


def test_criterion_9_scalar_sector(stanh_sector):
    res = stanh_sector
    lam, a = 4.0, 0.5
    formula = [lam ** 2 - a ** 2 - (lam - n) ** 2
               + a ** 2 * lam ** 2 / (lam - n) ** 2 for n in range(3)]
    oracle_consistent = all(abs(o - f) <= 1e-3
                            for o, f in zip(SCALAR_ORACLE, formula))
    gaps = [nearest(res.levels, o) for o in SCALAR_ORACLE]
    ok = (len(res.levels) == 3
          and all(g <= 1e-2 for g in gaps)
          and res.max_imag <= 1e-6
          and oracle_consistent)
    report(9, ok, f"levels {np.round(res.levels, 5)} vs oracle "
                  f"{np.round(SCALAR_ORACLE, 5)}, gaps "
                  f"{[f'{g:.1e}' for g in gaps]}, max_im {res.max_imag:.1e}, "
                  f"oracle-vs-formula consistent: {oracle_consistent}")


def test_criterion_10_eigensolver_unit_suite(rng):
    t0 = time.time()
    comp = np.zeros((5, 5), dtype=complex)
    comp[1:, :-1] = np.eye(4)
    comp[0, -1] = 1.0  # companion of z^5 - 1
    roots = eigen_dense(comp, method="qr").values
    want = np.exp(2j * np.pi * np.arange(5) / 5)
    root_gap = max(min(abs(r - w) for r in roots) for w in want)

    worst_res = 0.0
    worst_trace = 0.0
    for _ in range(50):
        n = int(rng.integers(2, 65))
        a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
        spec = eigen_dense(a, method="qr", want_vectors=True)
        worst_res = max(worst_res, max(p.residual for p in spec.pairs))
        tr = abs(np.sum(spec.values) - np.trace(a)) / abs(np.trace(a))
        worst_trace = max(worst_trace, tr)
    elapsed = time.time() - t0
    ok = root_gap <= 1e-10 and worst_res <= 1e-10 and worst_trace <= 1e-8
    report(10, ok, f"companion-root gap {root_gap:.1e}, worst residual "
                   f"{worst_res:.1e}, worst trace error {worst_trace:.1e}, "
                   f"runtime {elapsed:.1f}s")


def test_criterion_11_direct_vs_factored_convergence(scarf, osc, stanh):
    notes = []
    ok = True
    for model, xm in ((scarf, 12.0), (osc, 8.0), (stanh, 12.0)):
        out = action_convergence(model, xm, 400)
        notes.append(f"{model.kind}: " + ",".join(f"{r:.2f}" for r in out["ratios"]))
        ok = ok and all(3.5 <= r <= 4.5 for r in out["ratios"])
    report(11, ok, "h-halving residual ratios " + "; ".join(notes))
