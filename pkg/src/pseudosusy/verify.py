"""Machine verification of the factorization identities.

Factored-mode identities (intertwining, parity pseudo-adjointness, parity
pseudo-Hermiticity, the nilpotent charge algebra, and the Dirac square) hold
at matrix level by associativity and exact parity bookkeeping, so their
residuals are asserted at rounding scale. Direct-mode counterparts are
discretizations of the same differential identities and are checked in the
weaker action sense on smooth probe vectors, where they shrink as h^2.

Sign note: with the node-reversal permutation P and an interaction that is
PT-odd on the mirrored grid, the conjugation P L^H P equals -M exactly (not
+M); every identity below asserts the signed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import models as mdl
from .discretize import (BandedMatrix, Grid, as_dense, build_grid, dirac_matrix,
                         first_order_ops, parity_matrix, schrodinger_matrix)
from .eigen import EigenPair, eigen_dense, eigvec_for, match_spectra
from .spectra import dirac_spectrum, roughness, sector_spectrum

__all__ = [
    "GroundStateAnnihilated",
    "DivergentMap",
    "CheckResult",
    "VerificationReport",
    "gaussian_probes",
    "check_intertwining",
    "check_pseudo_adjoint",
    "check_pseudo_hermiticity",
    "map_eigenfunction",
    "mapped_raw_norm",
    "supercharge_algebra",
    "isospectrality_check",
    "dirac_spectrum_check",
    "analytic_vs_numeric",
    "action_convergence",
    "CHECK_NAMES",
    "run_checks",
]

EXACT_TOL = 1e-12
DIRECT_TOL = 1e-10
MAP_RESIDUAL_TOL = 1e-8
GAP_TOL = 1e-9
ANNIHILATION_TRIGGER = 1e-6


class GroundStateAnnihilated(Exception):
    """The intertwiner annihilated the state; it has no sector-2 image."""

    def __init__(self, ratio: float, value: complex):
        super().__init__(f"state at {value:.3e} annihilated (|Mv|/|v| = {ratio:.3e})")
        self.ratio = ratio
        self.value = value


class DivergentMap(Exception):
    """Map prefactor 1/(E + m) (or 1/E in the scalar sector) blows up."""


@dataclass
class CheckResult:
    name: str
    residual: float
    tolerance: float
    mode: str = "factored"
    notes: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.residual <= self.tolerance)

    def to_dict(self) -> dict:
        return {"name": self.name, "residual": self.residual,
                "tolerance": self.tolerance, "pass": self.passed,
                "mode": self.mode, "notes": self.notes}


@dataclass
class VerificationReport:
    model_label: str
    grid_meta: dict
    checks: list = field(default_factory=list)
    flags: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return {"model": self.model_label, "grid": self.grid_meta,
                "checks": [c.to_dict() for c in self.checks],
                "flags": self.flags, "pass": self.passed}


def _fro(a) -> float:
    return float(np.linalg.norm(as_dense(a), "fro"))


def gaussian_probes(grid: Grid, widths=None) -> list[np.ndarray]:
    """Unit-norm Gaussian probes; widths chosen so the wall values are
    negligible against an O(h^2) action residual."""
    if widths is None:
        widths = [grid.x_max / 10.0, grid.x_max / 8.0, grid.x_max / 6.0]
    probes = []
    for s in widths:
        f = np.exp(-grid.x ** 2 / (2.0 * s * s)).astype(complex)
        probes.append(f / np.linalg.norm(f))
    return probes


# -- operator identities ------------------------------------------------------

def check_intertwining(model: mdl.ModelSpec, grid: Grid,
                       mode: str = "factored") -> list[CheckResult]:
    """Residuals of H2 M - M H1 and L H2 - H1 L.

    Factored mode is exact by associativity; direct mode measures the action
    on Gaussian probes and carries the h^2 stencil error.
    """
    l_op, m_op = first_order_ops(model, grid)
    ld, md = l_op.to_dense(), m_op.to_dense()
    if mode == "factored":
        h1 = ld @ md
        h2 = md @ ld
        r1 = np.linalg.norm(h2 @ md - md @ h1, "fro") / np.linalg.norm(md, "fro")
        r2 = np.linalg.norm(ld @ h2 - h1 @ ld, "fro") / np.linalg.norm(ld, "fro")
        tol = EXACT_TOL
    elif mode == "direct":
        h1 = schrodinger_matrix(model, grid, 1, "direct").to_dense()
        h2 = schrodinger_matrix(model, grid, 2, "direct").to_dense()
        nm = np.linalg.norm(md, "fro")
        nl = np.linalg.norm(ld, "fro")
        r1 = max(np.linalg.norm((h2 @ md - md @ h1) @ f) / nm
                 for f in gaussian_probes(grid))
        r2 = max(np.linalg.norm((ld @ h2 - h1 @ ld) @ f) / nl
                 for f in gaussian_probes(grid))
        tol = math.inf  # truncation-order quantity; tested via refinement
    else:
        raise ValueError(f"mode must be 'factored' or 'direct', got {mode!r}")
    return [CheckResult("intertwine_right", float(r1), tol, mode),
            CheckResult("intertwine_left", float(r2), tol, mode)]


def check_pseudo_adjoint(model: mdl.ModelSpec, grid: Grid) -> CheckResult:
    """|M + P L^H P|_F / |M|_F for the first-order factors built on the raw
    Dirac coupling. Zero (to rounding) exactly when the coupling is PT-odd;
    the scalar model fails through its mass shift and gets flagged."""
    v = np.atleast_1d(mdl.dirac_coupling(model, grid.x)).astype(complex)
    n = grid.n_points
    c = 1.0 / (2.0 * grid.h)
    off = np.full(n - 1, c, dtype=complex)
    l_v = BandedMatrix(n, {0: v, 1: off, -1: -off}).to_dense()
    m_v = BandedMatrix(n, {0: v, 1: -off, -1: off}).to_dense()
    p = parity_matrix(grid)
    res = np.linalg.norm(m_v + p @ l_v.conj().T @ p, "fro") / np.linalg.norm(m_v, "fro")
    notes = ""
    pt_res = mdl.pt_residual_potential(model)
    if pt_res > 1e-8:
        notes = f"PTViolation: coupling PT residual {pt_res:.3e}"
    return CheckResult("pseudo_adjoint_signed", float(res), EXACT_TOL, notes=notes)


def check_pseudo_hermiticity(model: mdl.ModelSpec, grid: Grid, i: int = 1,
                             mode: str = "factored") -> CheckResult:
    """|P H_i^H P - H_i|_F / |H_i|_F."""
    h = schrodinger_matrix(model, grid, i, mode).to_dense()
    p = parity_matrix(grid)
    res = np.linalg.norm(p @ h.conj().T @ p - h, "fro") / np.linalg.norm(h, "fro")
    tol = EXACT_TOL if mode == "factored" else DIRECT_TOL
    return CheckResult(f"pseudo_hermiticity_{i}", float(res), tol, mode)


# -- eigenfunction transport ----------------------------------------------------

def _map_energy(model: mdl.ModelSpec, eps: float, sign: int) -> tuple[float, complex]:
    """Dirac energy and map prefactor for a sector-1 level."""
    if model.sector == mdl.PSEUDOSCALAR:
        val = model.mass ** 2 + eps
        if val < 0:
            raise mdl.ModelError(f"m^2 + eps = {val} < 0")
        e = sign * math.sqrt(val)
        if abs(e + model.mass) < 1e-8:
            raise DivergentMap(f"|E + m| = {abs(e + model.mass):.2e}")
        return e, 1j / (e + model.mass)
    if eps < 0:
        raise mdl.ModelError(f"eps = {eps} < 0 in the scalar sector")
    e = sign * math.sqrt(eps)
    if abs(e) < 1e-8:
        raise DivergentMap(f"|E| = {abs(e):.2e}")
    return e, -1.0 / e


def map_eigenfunction(model: mdl.ModelSpec, grid: Grid, pair: EigenPair,
                      sign: int = 1) -> EigenPair:
    """Transport a sector-1 eigenpair to sector 2 with the intertwiner.

    Returns a unit-norm sector-2 eigenpair with its recorded residual.
    Raises GroundStateAnnihilated when |M v| <= 1e-6 |v| (the one-sided
    ground state) and DivergentMap when the prefactor denominator vanishes.
    """
    if pair.vector is None:
        raise ValueError("map_eigenfunction needs an eigenvector")
    l_op, m_op = first_order_ops(model, grid)
    md = m_op.to_dense()
    v1 = pair.vector
    mv = md @ v1
    ratio = float(np.linalg.norm(mv) / np.linalg.norm(v1))
    if ratio <= ANNIHILATION_TRIGGER:
        raise GroundStateAnnihilated(ratio, pair.value)
    eps = float(np.real(pair.value))
    _, pref = _map_energy(model, eps, sign)
    v2 = pref * mv
    h2 = (m_op @ l_op).to_dense()
    nrm = np.linalg.norm(v2)
    v2_unit = v2 / nrm
    res = float(np.linalg.norm(h2 @ v2_unit - pair.value * v2_unit)
                / np.linalg.norm(h2, "fro"))
    return EigenPair(pair.value, v2_unit, res)


def mapped_raw_norm(model: mdl.ModelSpec, grid: Grid, pair: EigenPair,
                    sign: int = 1) -> float:
    """Norm of the unnormalized mapped vector; equals |M v1| / |E + m|."""
    _, m_op = first_order_ops(model, grid)
    eps = float(np.real(pair.value))
    _, pref = _map_energy(model, eps, sign)
    return float(abs(pref) * np.linalg.norm(m_op.to_dense() @ pair.vector))


# -- charge algebra ---------------------------------------------------------------

def supercharge_algebra(model: mdl.ModelSpec, grid: Grid) -> list[CheckResult]:
    """Nilpotency, the anticommutator block identity, commutation with the
    block Hamiltonian, and (pseudoscalar sector) the Dirac square identity."""
    l_op, m_op = first_order_ops(model, grid)
    ld, md = l_op.to_dense(), m_op.to_dense()
    n = grid.n_points
    q = np.zeros((2 * n, 2 * n), dtype=complex)
    qs = np.zeros_like(q)
    q[:n, n:] = ld
    qs[n:, :n] = md
    h_blk = np.zeros_like(q)
    h_blk[:n, :n] = ld @ md
    h_blk[n:, n:] = md @ ld
    nq = np.linalg.norm(q, "fro")
    nh = np.linalg.norm(h_blk, "fro")
    anti = q @ qs + qs @ q
    out = [
        CheckResult("charge_nilpotent", float(np.linalg.norm(q @ q, "fro") / nq ** 2), EXACT_TOL),
        CheckResult("cocharge_nilpotent", float(np.linalg.norm(qs @ qs, "fro") / nq ** 2), EXACT_TOL),
        CheckResult("anticommutator_block",
                    float(np.linalg.norm(anti - h_blk, "fro") / nh), EXACT_TOL),
        CheckResult("charge_commutes",
                    float(np.linalg.norm(q @ anti - anti @ q, "fro") / (nq * nh)), EXACT_TOL),
        CheckResult("cocharge_commutes",
                    float(np.linalg.norm(qs @ anti - anti @ qs, "fro") / (nq * nh)), EXACT_TOL),
    ]
    if model.sector == mdl.PSEUDOSCALAR:
        d = dirac_matrix(model, grid)
        dd = d @ d
        target = anti + model.mass ** 2 * np.eye(2 * n)
        out.append(CheckResult(
            "dirac_square",
            float(np.linalg.norm(dd - target, "fro") / np.linalg.norm(dd, "fro")),
            EXACT_TOL))
    return out


# -- spectrum-level checks ---------------------------------------------------------

def isospectrality_check(model: mdl.ModelSpec, grid: Grid,
                         method: str = "auto") -> list[CheckResult]:
    """Nonzero factored spectra of the two sectors must coincide, and the
    genuine (smooth-vector) near-zero mode count must differ by one."""
    h1 = schrodinger_matrix(model, grid, 1, "factored")
    h2 = schrodinger_matrix(model, grid, 2, "factored")
    s1 = eigen_dense(h1, method=method, meta=grid.meta())
    s2 = eigen_dense(h2, method=method, meta=grid.meta())
    match = match_spectra(s1, s2, drop_zero_modes=True)
    zero_scale = match.zero_scale
    gaps = [g / (1.0 + abs(la)) for la, _, g in match.pairs if abs(la) > zero_scale]
    worst = max(gaps, default=0.0)
    unmatched = len(match.unmatched_a) + len(match.unmatched_b)
    d1, d2 = h1.to_dense(), h2.to_dense()
    ld, md = (x.to_dense() for x in first_order_ops(model, grid))
    genuine = []
    for spec, a, ann in ((s1, d1, md), (s2, d2, ld)):
        count = 0
        for lam in spec.values:
            if abs(lam) <= zero_scale:
                v = eigvec_for(a, lam)
                if roughness(v) < 1.0:
                    count += 1
        genuine.append(count)
    return [
        CheckResult("isospectral_nonzero_gap", float(worst), GAP_TOL,
                    notes=f"{len(match.pairs)} matched pairs"),
        CheckResult("isospectral_unmatched", float(unmatched), 0.5,
                    notes="nonzero eigenvalues left unmatched"),
        CheckResult("zero_mode_surplus", float(abs(genuine[0] - genuine[1] - 1)), 0.5,
                    notes=f"genuine zero modes: sector1={genuine[0]}, sector2={genuine[1]}"),
    ]


def dirac_spectrum_check(model: mdl.ModelSpec, grid: Grid,
                         method: str = "auto",
                         tol_match: float = 1e-3) -> list[CheckResult]:
    """Every filtered Dirac level must square onto a filtered partner level,
    +m must be present and -m absent when the ground level sits at zero."""
    m = model.mass
    d = dirac_spectrum(model, x_max=grid.x_max, n=grid.n_points,
                       tol_match=tol_match, method=method)
    s1 = sector_spectrum(model, x_max=grid.x_max, n=grid.n_points, i=1,
                         tol_match=tol_match, method=method)
    s2 = sector_spectrum(model, x_max=grid.x_max, n=grid.n_points, i=2,
                         tol_match=tol_match, method=method)
    eps_pool = np.array([z.real for z in s1.raw_kept + s2.raw_kept])
    worst = 0.0
    for e in d.levels:
        target = e * e - m * m
        gap = float(np.min(np.abs(eps_pool - target))) if len(eps_pool) else math.inf
        worst = max(worst, gap / (1.0 + abs(e * e)))
    checks = [CheckResult("dirac_energy_map", worst, 1e-6,
                          notes=f"{len(d.levels)} filtered levels")]
    ground_at_zero = any(abs(z.real) <= 1e-3 for z in s1.raw_kept)
    if ground_at_zero:
        has_pos = any(abs(e - m) <= 1e-3 * (1 + m) for e in d.levels)
        dist_neg = min((abs(e + m) for e in d.levels), default=math.inf)
        checks.append(CheckResult("dirac_plus_mass_present",
                                  0.0 if has_pos else 1.0, 0.5))
        checks.append(CheckResult("dirac_minus_mass_absent",
                                  0.0 if dist_neg > 0.3 else 1.0, 0.5,
                                  notes=f"closest level to -m at distance {dist_neg:.3f}"))
    return checks


def analytic_vs_numeric(model: mdl.ModelSpec, grid: Grid, i: int, n: int,
                        method: str = "auto") -> float:
    """Alignment defect 1 - |<u, v>| / (|u| |v|) between the sampled analytic
    eigenfunction and the direct-mode numeric eigenvector at level n.

    Comparison is up to complex scale only; eigenvectors of these operators
    are not mutually orthogonal, so nothing stronger is meaningful. Sector-2
    functions are produced by applying the intertwiner to the sampled
    sector-1 state.
    """
    levels = mdl.analytic_levels(model, 1, max_count=n + 1)
    if n >= len(levels):
        raise mdl.RangeError(f"level {n} outside bound range")
    target = levels[n]
    if i == 1:
        u = np.atleast_1d(mdl.analytic_eigenfunction(model, n, grid.x))
    elif i == 2:
        if n == 0:
            raise mdl.RangeError("the ground state has no sector-2 image")
        phi = np.atleast_1d(mdl.analytic_eigenfunction(model, n, grid.x))
        _, m_op = first_order_ops(model, grid)
        u = m_op.to_dense() @ phi
    else:
        raise ValueError("sector index must be 1 or 2")
    h = schrodinger_matrix(model, grid, i, "direct")
    spec = eigen_dense(h, method=method, meta=grid.meta())
    vals = spec.values
    j = int(np.argmin(np.abs(vals - target)))
    if abs(vals[j] - target) > 0.1 * (1.0 + abs(target)):
        raise mdl.ModelError(
            f"no converged numeric level near {target}; closest {vals[j]}")
    v = eigvec_for(h.to_dense(), vals[j])
    overlap = abs(np.vdot(u, v)) / (np.linalg.norm(u) * np.linalg.norm(v))
    return float(1.0 - overlap)


def action_convergence(model: mdl.ModelSpec, x_max: float, n: int,
                       i: int = 1) -> dict:
    """Direct-vs-factored action residuals on Gaussian probes at grid sizes
    n and 2n+1 (which halves h exactly); returns residuals and their ratios.
    Second-order stencils put the ratio near 4."""
    out = {"n": [n, 2 * n + 1], "residuals": [], "ratios": []}
    for nn in (n, 2 * n + 1):
        g = build_grid(x_max, nn)
        hf = schrodinger_matrix(model, g, i, "factored").to_dense()
        hd = schrodinger_matrix(model, g, i, "direct").to_dense()
        res = [float(np.linalg.norm((hd - hf) @ f)) for f in gaussian_probes(g)]
        out["residuals"].append(res)
    out["ratios"] = [a / b for a, b in zip(*out["residuals"])]
    return out


# -- aggregator --------------------------------------------------------------------

CHECK_NAMES = ("pt", "intertwine", "pseudoadjoint", "pseudohermiticity",
               "algebra", "isospectral", "map", "analytic")


def run_checks(model: mdl.ModelSpec, grid: Grid, names,
               method: str = "auto", tol_match: float = 1e-3) -> VerificationReport:
    """Run the named checks and collect a report."""
    unknown = [c for c in names if c not in CHECK_NAMES]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}")
    report = VerificationReport(model_label=model.label(), grid_meta=grid.meta())
    for name in names:
        if name == "pt":
            report.checks.append(CheckResult(
                "pt_potential", mdl.pt_residual_potential(model), 1e-8))
            for i in (1, 2):
                report.checks.append(CheckResult(
                    f"pt_partner_{i}", mdl.pt_residual_partner(model, i), 1e-8))
        elif name == "intertwine":
            report.checks.extend(check_intertwining(model, grid))
        elif name == "pseudoadjoint":
            result = check_pseudo_adjoint(model, grid)
            report.checks.append(result)
            if result.notes:
                report.flags.append(result.notes)
        elif name == "pseudohermiticity":
            for i in (1, 2):
                report.checks.append(check_pseudo_hermiticity(model, grid, i, "factored"))
                report.checks.append(check_pseudo_hermiticity(model, grid, i, "direct"))
        elif name == "algebra":
            report.checks.extend(supercharge_algebra(model, grid))
        elif name == "isospectral":
            report.checks.extend(isospectrality_check(model, grid, method))
        elif name == "map":
            report.checks.extend(_map_check(model, grid, method))
        elif name == "analytic":
            report.checks.extend(_analytic_check(model, grid, method))
    return report


def _map_check(model: mdl.ModelSpec, grid: Grid, method: str) -> list[CheckResult]:
    h1 = schrodinger_matrix(model, grid, 1, "factored")
    spec = eigen_dense(h1, method=method, meta=grid.meta())
    vals = spec.values
    band = 1e-6 * spec.a_fro
    dense = h1.to_dense()
    out = []
    ground = None
    excited = None
    for lam in vals:
        if abs(lam) <= band and ground is None:
            v = eigvec_for(dense, lam)
            if roughness(v) < 1.0:
                ground = EigenPair(lam, v)
        elif lam.real > band and excited is None and abs(lam.imag) < 1e-6 * (1 + abs(lam)):
            thr = mdl.bound_threshold(model)
            if thr is None or lam.real < thr * 0.999:
                excited = EigenPair(lam, eigvec_for(dense, lam))
    if excited is not None:
        mapped = map_eigenfunction(model, grid, excited)
        out.append(CheckResult("map_excited_residual", mapped.residual,
                               MAP_RESIDUAL_TOL,
                               notes=f"level {excited.value.real:.6f}"))
    if ground is not None:
        try:
            map_eigenfunction(model, grid, ground)
            out.append(CheckResult("map_ground_annihilated", 1.0, 1e-4,
                                   notes="ground state unexpectedly mapped"))
        except GroundStateAnnihilated as exc:
            out.append(CheckResult("map_ground_annihilated", exc.ratio, 1e-4))
    return out


def _analytic_check(model: mdl.ModelSpec, grid: Grid, method: str) -> list[CheckResult]:
    try:
        levels = mdl.analytic_levels(model, 1, max_count=3)
    except mdl.NotAvailable:
        return [CheckResult("analytic_alignment", 0.0, 1.0, mode="direct",
                            notes="skipped: no closed-form eigenfunctions")]
    out = []
    for n in range(len(levels)):
        defect = analytic_vs_numeric(model, grid, 1, n, method)
        out.append(CheckResult(f"analytic_alignment_{n}", defect, 1e-4,
                               mode="direct"))
    return out
