"""Dense complex non-Hermitian eigensolver and spectrum bookkeeping.

The native engine follows the classical chain: diagonal balancing,
Householder reduction to upper Hessenberg form, implicitly shifted complex
QR iteration with Wilkinson shifts and subdiagonal deflation, then inverse
iteration on the Hessenberg matrix for eigenvectors, back-transformed to
the original basis. A LAPACK-backed path (numpy.linalg.eig) is offered for
large matrices where the O(n^3) python-driven sweeps become the bottleneck;
"auto" switches between the two on matrix size. Both engines are
cross-checked against each other in the test suite.

Everything here is allocation-pure: callers' matrices are never mutated.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .discretize import as_dense

__all__ = [
    "ConvergenceError",
    "EigenPair",
    "Spectrum",
    "MatchResult",
    "eigen_dense",
    "eigvec_for",
    "filter_physical",
    "match_spectra",
]

_MAX_DIM = 4096
_DEFLATE_TOL = 1e-14
_AUTO_CUTOFF = 600  # native QR below, LAPACK above; see module docstring


class ConvergenceError(RuntimeError):
    """QR iteration exhausted its sweep budget before full deflation."""


@dataclass
class EigenPair:
    value: complex
    vector: Optional[np.ndarray] = None
    residual: Optional[float] = None

    def converged(self, tol: float = 1e-8) -> Optional[bool]:
        """Convergence flag from the recorded residual; None when the pair
        was produced values-only."""
        if self.residual is None:
            return None
        return self.residual <= tol


@dataclass
class Spectrum:
    """Eigenpairs sorted by (re, im) plus provenance metadata."""

    pairs: list
    a_fro: float
    dim: int
    method: str
    meta: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    @property
    def values(self) -> np.ndarray:
        return np.array([p.value for p in self.pairs], dtype=complex)

    def __len__(self) -> int:
        return len(self.pairs)


# -- balancing ----------------------------------------------------------------

def _balance(a: np.ndarray, max_sweeps: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal similarity scaling by powers of two; returns (B, d) with
    B = D^-1 A D and D = diag(d). Eigenvectors of A are D @ (vectors of B)."""
    b = a.copy()
    n = b.shape[0]
    d = np.ones(n)
    for _ in range(max_sweeps):
        converged = True
        for i in range(n):
            r = np.sum(np.abs(b[i, :])) - np.abs(b[i, i])
            c = np.sum(np.abs(b[:, i])) - np.abs(b[i, i])
            if r == 0.0 or c == 0.0:
                continue
            f = 1.0
            while c < r / 2.0:
                c *= 2.0
                r /= 2.0
                f *= 2.0
            while c > r * 2.0:
                c /= 2.0
                r *= 2.0
                f /= 2.0
            if f != 1.0:
                converged = False
                b[i, :] /= f
                b[:, i] *= f
                d[i] *= f
        if converged:
            break
    return b, d


# -- Hessenberg reduction ------------------------------------------------------

def _hessenberg(a: np.ndarray, accumulate_q: bool) -> tuple[np.ndarray, Optional[np.ndarray]]:
    """Householder reduction A = Q H Q^H with H upper Hessenberg."""
    h = a.astype(complex, copy=True)
    n = h.shape[0]
    q = np.eye(n, dtype=complex) if accumulate_q else None
    for k in range(n - 2):
        x = h[k + 1:, k]
        norm_x = np.linalg.norm(x)
        if norm_x == 0.0:
            continue
        v = x.copy()
        alpha = v[0]
        phase = alpha / abs(alpha) if alpha != 0 else 1.0
        v[0] += phase * norm_x
        norm_v = np.linalg.norm(v)
        if norm_v == 0.0:
            continue
        v /= norm_v
        h[k + 1:, k:] -= 2.0 * np.outer(v, v.conj() @ h[k + 1:, k:])
        h[:, k + 1:] -= 2.0 * np.outer(h[:, k + 1:] @ v, v.conj())
        if q is not None:
            q[:, k + 1:] -= 2.0 * np.outer(q[:, k + 1:] @ v, v.conj())
        h[k + 2:, k] = 0.0
    return h, q


# -- QR iteration ---------------------------------------------------------------

def _wilkinson_shift(h: np.ndarray, hi: int) -> complex:
    a = h[hi - 1, hi - 1]
    b = h[hi - 1, hi]
    c = h[hi, hi - 1]
    d = h[hi, hi]
    disc = np.sqrt((a - d) ** 2 / 4.0 + b * c + 0j)
    e1 = (a + d) / 2.0 + disc
    e2 = (a + d) / 2.0 - disc
    return e1 if abs(e1 - d) < abs(e2 - d) else e2


def _qr_eigenvalues(h_in: np.ndarray, sweep_budget: int) -> np.ndarray:
    """Implicit single-shift QR on a Hessenberg matrix; eigenvalues only.

    Deflates when a subdiagonal entry drops below 1e-14 times the sum of the
    moduli of its diagonal neighbours. Raises ConvergenceError when the
    total sweep budget is spent before every eigenvalue has deflated.
    """
    h = h_in.copy()
    n = h.shape[0]
    ev = np.empty(n, dtype=complex)
    hi = n - 1
    sweeps = 0
    stall = 0
    while hi >= 0:
        if hi == 0:
            ev[0] = h[0, 0]
            break
        lo = hi
        while lo > 0:
            s = abs(h[lo - 1, lo - 1]) + abs(h[lo, lo])
            if s == 0.0:
                s = 1.0
            if abs(h[lo, lo - 1]) < _DEFLATE_TOL * s:
                h[lo, lo - 1] = 0.0
                break
            lo -= 1
        if lo == hi:
            ev[hi] = h[hi, hi]
            hi -= 1
            stall = 0
            continue
        sweeps += 1
        stall += 1
        if sweeps > sweep_budget:
            raise ConvergenceError(
                f"{hi + 1} eigenvalue(s) undeflated after {sweep_budget} QR sweeps")
        if stall % 12 == 0:
            # Exceptional shift breaks the rare shift cycles.
            mu = h[hi, hi] + 0.75 * abs(h[hi, hi - 1])
        else:
            mu = _wilkinson_shift(h, hi)
        x = h[lo, lo] - mu
        y = h[lo + 1, lo]
        for i in range(lo, hi):
            r = np.hypot(abs(x), abs(y))
            if r == 0.0:
                c_, s_ = 1.0 + 0j, 0j
            else:
                c_ = x / r
                s_ = y / r
            g = np.array([[np.conj(c_), np.conj(s_)], [-s_, c_]])
            c0 = max(lo, i - 1)
            h[i:i + 2, c0:hi + 1] = g @ h[i:i + 2, c0:hi + 1]
            r1 = min(i + 2, hi)
            h[lo:r1 + 1, i:i + 2] = h[lo:r1 + 1, i:i + 2] @ g.conj().T
            if i < hi - 1:
                x = h[i + 1, i]
                y = h[i + 2, i]
    return ev


# -- inverse iteration -----------------------------------------------------------

def _hessenberg_solve_factor(h: np.ndarray, lam: complex):
    """Givens QR factorization of (H - lam I); returns (rotations, R)."""
    n = h.shape[0]
    r = h.astype(complex, copy=True)
    r[np.arange(n), np.arange(n)] -= lam
    rots = []
    for i in range(n - 1):
        a, b = r[i, i], r[i + 1, i]
        s = np.hypot(abs(a), abs(b))
        if s == 0.0:
            c_, s_ = 1.0 + 0j, 0j
        else:
            c_, s_ = a / s, b / s
        g = np.array([[np.conj(c_), np.conj(s_)], [-s_, c_]])
        r[i:i + 2, i:] = g @ r[i:i + 2, i:]
        rots.append(g)
    return rots, r


def _hessenberg_solve(rots, r: np.ndarray, b: np.ndarray, floor: float) -> np.ndarray:
    n = r.shape[0]
    y = b.astype(complex, copy=True)
    for i, g in enumerate(rots):
        y[i:i + 2] = g @ y[i:i + 2]
    out = np.zeros(n, dtype=complex)
    for i in range(n - 1, -1, -1):
        rhs = y[i] - r[i, i + 1:] @ out[i + 1:]
        piv = r[i, i]
        if abs(piv) < floor:
            piv = floor
        out[i] = rhs / piv
    return out


def _invit_vector(h: np.ndarray, lam: complex, scale: float, seed: int,
                  iters: int = 3) -> np.ndarray:
    """Inverse iteration on the Hessenberg matrix at a converged shift."""
    n = h.shape[0]
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    floor = np.finfo(float).eps * scale
    if floor == 0.0:
        floor = np.finfo(float).tiny ** 0.5
    shift = lam * (1.0 + 4.0 * np.finfo(float).eps) + 1e-14 * scale * 1j
    rots, r = _hessenberg_solve_factor(h, shift)
    for _ in range(iters):
        v = _hessenberg_solve(rots, r, v, floor)
        v /= np.linalg.norm(v)
    return v


# -- public API --------------------------------------------------------------------

def _validate(a) -> np.ndarray:
    mat = as_dense(a)
    n = mat.shape[0]
    if mat.ndim != 2 or mat.shape != (n, n):
        raise ValueError("eigen_dense requires a square matrix")
    if n > _MAX_DIM:
        raise ValueError(f"dimension {n} exceeds the supported {_MAX_DIM}")
    if not np.all(np.isfinite(mat.view(float))):
        raise ValueError("matrix entries must be finite")
    return mat


def eigen_dense(a, want_vectors: bool = False, method: str = "auto",
                tol_eig: float = 1e-8, sweep_budget: Optional[int] = None,
                meta: Optional[dict] = None) -> Spectrum:
    """Full spectrum of a dense (or banded) complex matrix.

    method: "qr" runs the native balanced Householder/implicit-QR engine,
    "lapack" delegates to numpy.linalg, "auto" picks by size. With
    want_vectors, every pair carries a unit eigenvector and the relative
    residual |A v - lam v| / |A|_F, which must meet tol_eig.
    """
    mat = _validate(a)
    n = mat.shape[0]
    a_fro = float(np.linalg.norm(mat, "fro"))
    if method == "auto":
        method = "qr" if n <= _AUTO_CUTOFF else "lapack"
    if method not in ("qr", "lapack"):
        raise ValueError(f"unknown method {method!r}")

    if method == "lapack":
        if want_vectors:
            values, vectors = np.linalg.eig(mat)
        else:
            values = np.linalg.eigvals(mat)
            vectors = None
    else:
        budget = sweep_budget if sweep_budget is not None else 60 * n
        balanced, dscale = _balance(mat)
        hess, q = _hessenberg(balanced, accumulate_q=want_vectors)
        values = _qr_eigenvalues(hess, budget)
        vectors = None
        if want_vectors:
            scale = float(np.linalg.norm(hess, "fro"))
            cols = []
            for idx, lam in enumerate(values):
                y = _invit_vector(hess, lam, scale, seed=1000 + idx)
                v = dscale * (q @ y)
                cols.append(v / np.linalg.norm(v))
            vectors = np.column_stack(cols)
            vectors = _split_degenerate(values, vectors, a_fro)

    order = np.lexsort((values.imag, values.real))
    pairs = []
    worst = 0.0
    for rank, idx in enumerate(order):
        lam = complex(values[idx])
        if vectors is not None:
            v = vectors[:, idx]
            nrm = np.linalg.norm(v)
            v = v / nrm if nrm > 0 else v
            res = float(np.linalg.norm(mat @ v - lam * v) / a_fro) if a_fro else 0.0
            worst = max(worst, res)
            pairs.append(EigenPair(lam, v, res))
        else:
            pairs.append(EigenPair(lam))
    if want_vectors and worst > tol_eig:
        raise ConvergenceError(
            f"worst eigenpair residual {worst:.3e} exceeds tol_eig={tol_eig:.1e}")
    return Spectrum(pairs=pairs, a_fro=a_fro, dim=n, method=method,
                    meta=dict(meta or {}))


def _split_degenerate(values: np.ndarray, vectors: np.ndarray, a_fro: float) -> np.ndarray:
    """Re-orthogonalize inverse-iteration vectors inside near-degenerate
    clusters so repeated eigenvalues do not return one vector twice."""
    tol = 1e-8 * max(a_fro, 1.0)
    order = np.argsort(values.real)
    used: list[int] = []
    for pos, idx in enumerate(order):
        group = [j for j in order[:pos]
                 if abs(values[j] - values[idx]) <= tol]
        v = vectors[:, idx]
        for j in group:
            v = v - (vectors[:, j].conj() @ v) * vectors[:, j]
        nrm = np.linalg.norm(v)
        if nrm > 1e-8:
            vectors[:, idx] = v / nrm
        used.append(idx)
    return vectors


def eigvec_for(a, lam: complex, iters: int = 2, seed: int = 7) -> np.ndarray:
    """Unit eigenvector for an already-computed eigenvalue of a dense matrix,
    by shifted inverse iteration with a full LU solve. Intended for pulling a
    handful of vectors out of large matrices diagonalized values-only."""
    mat = _validate(a)
    n = mat.shape[0]
    scale = np.linalg.norm(mat, "fro")
    shifted = mat - (lam * (1.0 + 4 * np.finfo(float).eps)) * np.eye(n)
    shifted[np.arange(n), np.arange(n)] += 1e-14 * scale / max(np.sqrt(n), 1.0)
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    for _ in range(iters):
        v = np.linalg.solve(shifted, v)
        v /= np.linalg.norm(v)
    return v


# -- filtering and matching ----------------------------------------------------------

def filter_physical(spec_coarse: Spectrum, spec_fine: Spectrum,
                    tol_match: float = 1e-3,
                    threshold: Optional[float] = None) -> Spectrum:
    """Two-grid stability filter.

    Keeps fine-grid eigenvalues that have an unused coarse-grid partner
    within tol_match * (1 + |lam|) (greedy nearest matching, no reuse) and,
    when a threshold is given, real part strictly below it.
    """
    coarse = spec_coarse.values
    used = np.zeros(len(coarse), dtype=bool)
    kept = []
    for pair in spec_fine.pairs:
        lam = pair.value
        if len(coarse) == 0:
            break
        dist = np.abs(coarse - lam)
        dist[used] = np.inf
        j = int(np.argmin(dist))
        if dist[j] <= tol_match * (1.0 + abs(lam)):
            used[j] = True
            if threshold is None or lam.real < threshold:
                kept.append(pair)
    return Spectrum(pairs=kept, a_fro=spec_fine.a_fro, dim=spec_fine.dim,
                    method=spec_fine.method, meta=dict(spec_fine.meta),
                    notes=spec_fine.notes + [
                        f"two-grid filtered against n={spec_coarse.meta.get('n_points', '?')}"
                        f" at tol_match={tol_match}"])


@dataclass
class MatchResult:
    pairs: list            # (lam_a, lam_b, gap)
    unmatched_a: list
    unmatched_b: list
    zero_scale: float


def match_spectra(a: Spectrum, b: Spectrum, drop_zero_modes: bool = False) -> MatchResult:
    """Greedy bipartite nearest matching of two spectra, closest pairs first.

    With drop_zero_modes, eigenvalues inside |lam| <= 1e-6 * |A|_F are left
    out of the unmatched lists (they are factorization kernel candidates,
    not shared levels). Well-separated spectra make the greedy pairing
    equivalent to the optimal assignment; it is not optimal in general.
    """
    av, bv = a.values, b.values
    pairs = []
    if len(av) and len(bv):
        dist = np.abs(av[:, None] - bv[None, :])
        order = np.argsort(dist, axis=None)
        used_a = np.zeros(len(av), dtype=bool)
        used_b = np.zeros(len(bv), dtype=bool)
        remaining = min(len(av), len(bv))
        for flat in order:
            i, j = divmod(int(flat), len(bv))
            if used_a[i] or used_b[j]:
                continue
            used_a[i] = True
            used_b[j] = True
            pairs.append((av[i], bv[j], float(dist[i, j])))
            remaining -= 1
            if remaining == 0:
                break
        unmatched_a = [lam for lam, u in zip(av, used_a) if not u]
        unmatched_b = [lam for lam, u in zip(bv, used_b) if not u]
    else:
        unmatched_a = list(av)
        unmatched_b = list(bv)
    zero_scale = 1e-6 * max(a.a_fro, b.a_fro)
    if drop_zero_modes:
        unmatched_a = [z for z in unmatched_a if abs(z) > zero_scale]
        unmatched_b = [z for z in unmatched_b if abs(z) > zero_scale]
    return MatchResult(pairs, unmatched_a, unmatched_b, zero_scale)
