"""Grids and discrete operators.

The box is symmetric with Dirichlet walls; interior nodes are mirrored
exactly so the parity permutation is an exact involution at matrix level.
First derivatives use the antisymmetric central-difference matrix, which is
what makes the parity-conjugation identities hold to rounding rather than
to truncation order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .models import PSEUDOSCALAR, ModelSpec, partner_potential, superpotential_value

__all__ = [
    "ArgumentError",
    "Grid",
    "build_grid",
    "BandedMatrix",
    "as_dense",
    "first_order_ops",
    "schrodinger_matrix",
    "dirac_matrix",
    "parity_matrix",
]


class ArgumentError(ValueError):
    """Invalid construction arguments."""


@dataclass(frozen=True)
class Grid:
    """Symmetric interior mesh on (-x_max, x_max) with Dirichlet walls."""

    x_max: float
    n_points: int
    h: float
    x: np.ndarray

    @property
    def x_min(self) -> float:
        return -self.x_max

    def meta(self) -> dict:
        return {"x_max": self.x_max, "n_points": self.n_points, "h": self.h}


def build_grid(x_max: float, n_points: int) -> Grid:
    """Interior nodes x_j = -x_max + j h, j = 1..n, h = 2 x_max / (n + 1),
    mirrored so that x_j + x_{n+1-j} = 0 exactly in floating arithmetic."""
    if not (x_max > 0) or not np.isfinite(x_max):
        raise ArgumentError(f"x_max must be positive and finite, got {x_max}")
    if n_points < 2:
        raise ArgumentError(f"n_points must be >= 2, got {n_points}")
    h = 2.0 * x_max / (n_points + 1)
    x = -x_max + np.arange(1, n_points + 1) * h
    half = n_points // 2
    x[n_points - half:] = -x[:half][::-1]
    if n_points % 2 == 1:
        x[half] = 0.0
    x.setflags(write=False)
    return Grid(float(x_max), int(n_points), h, x)


class BandedMatrix:
    """Complex banded matrix stored as diagonals keyed by offset.

    Products accumulate contributions in increasing-offset order so that a
    banded multiply reproduces the deterministic dense reference exactly.
    """

    def __init__(self, n: int, diags: dict):
        self.n = n
        self.diags = {}
        for off, d in diags.items():
            d = np.asarray(d, dtype=complex)
            if d.shape != (n - abs(off),):
                raise ArgumentError(
                    f"diagonal at offset {off} must have length {n - abs(off)}")
            self.diags[int(off)] = d.copy()

    @property
    def bandwidth(self) -> int:
        live = [abs(o) for o, d in self.diags.items() if np.any(d != 0)]
        return max(live, default=0)

    def to_dense(self) -> np.ndarray:
        a = np.zeros((self.n, self.n), dtype=complex)
        for off, d in self.diags.items():
            idx = np.arange(self.n - abs(off))
            if off >= 0:
                a[idx, idx + off] = d
            else:
                a[idx - off, idx] = d
        return a

    @classmethod
    def from_dense(cls, a: np.ndarray, max_offset: int) -> "BandedMatrix":
        a = np.asarray(a, dtype=complex)
        n = a.shape[0]
        if a.shape != (n, n):
            raise ArgumentError("from_dense requires a square matrix")
        diags = {}
        for off in range(-max_offset, max_offset + 1):
            idx = np.arange(n - abs(off))
            diags[off] = a[idx, idx + off] if off >= 0 else a[idx - off, idx]
        return cls(n, diags)

    def conj_transpose(self) -> "BandedMatrix":
        return BandedMatrix(self.n, {-off: np.conj(d) for off, d in self.diags.items()})

    def __matmul__(self, other):
        if isinstance(other, BandedMatrix):
            if other.n != self.n:
                raise ArgumentError("dimension mismatch")
            n = self.n
            out: dict[int, np.ndarray] = {}
            for r in sorted(self.diags):
                a = self.diags[r]
                for s in sorted(other.diags):
                    b = other.diags[s]
                    off = r + s
                    if abs(off) >= n:
                        continue
                    # C[i, i+r+s] += A[i, i+r] * B[i+r, i+r+s]; valid rows are
                    # the i with 0 <= i+r <= n-1 and both factors in range.
                    i_lo = max(0, -r, -off)
                    i_hi = min(n, n - r, n - off)
                    if i_hi <= i_lo:
                        continue
                    i = np.arange(i_lo, i_hi)
                    contrib = a[i if r >= 0 else i + r] * b[(i + r) if s >= 0 else i + off]
                    tgt = out.setdefault(off, np.zeros(n - abs(off), dtype=complex))
                    tgt[i if off >= 0 else i + off] += contrib
            return BandedMatrix(n, out)
        other = np.asarray(other)
        return self.to_dense() @ other

    def __rmatmul__(self, other):
        return np.asarray(other) @ self.to_dense()

    def __add__(self, other: "BandedMatrix") -> "BandedMatrix":
        if not isinstance(other, BandedMatrix) or other.n != self.n:
            raise ArgumentError("can only add a BandedMatrix of equal size")
        out = {off: d.copy() for off, d in self.diags.items()}
        for off, d in other.diags.items():
            if off in out:
                out[off] = out[off] + d
            else:
                out[off] = d.copy()
        return BandedMatrix(self.n, out)

    def __sub__(self, other: "BandedMatrix") -> "BandedMatrix":
        return self + (other * (-1.0))

    def __mul__(self, scalar) -> "BandedMatrix":
        return BandedMatrix(self.n, {o: d * scalar for o, d in self.diags.items()})

    __rmul__ = __mul__


def as_dense(a) -> np.ndarray:
    """ndarray view of a BandedMatrix or array-like."""
    if isinstance(a, BandedMatrix):
        return a.to_dense()
    return np.asarray(a, dtype=complex)


def _central_difference_diags(grid: Grid) -> dict:
    n = grid.n_points
    c = 1.0 / (2.0 * grid.h)
    return {1: np.full(n - 1, c, dtype=complex), -1: np.full(n - 1, -c, dtype=complex)}


def first_order_ops(model: ModelSpec, grid: Grid) -> tuple[BandedMatrix, BandedMatrix]:
    """Intertwining factors L = D + diag(W), M = -D + diag(W) with D the
    antisymmetric central-difference matrix under Dirichlet walls."""
    w = np.atleast_1d(superpotential_value(model, grid.x)).astype(complex)
    if not np.all(np.isfinite(w)):
        raise ArgumentError("superpotential is not finite on all grid nodes")
    d = _central_difference_diags(grid)
    n = grid.n_points
    l_op = BandedMatrix(n, {0: w, 1: d[1], -1: d[-1]})
    m_op = BandedMatrix(n, {0: w, 1: -d[1], -1: -d[-1]})
    return l_op, m_op


def schrodinger_matrix(model: ModelSpec, grid: Grid, i: int = 1,
                       mode: str = "factored",
                       fd_fallback: bool = False) -> BandedMatrix:
    """Sector-i partner operator.

    factored: the exact product L M (i=1) or M L (i=2), bandwidth 2; the
    operator identities hold on it to rounding by associativity.
    direct: 3-point Laplacian plus diag(U_i), bandwidth 1; approximates the
    same differential operator but differs from the product as a matrix.
    """
    if i not in (1, 2):
        raise ArgumentError("sector index must be 1 or 2")
    if mode == "factored":
        l_op, m_op = first_order_ops(model, grid)
        return l_op @ m_op if i == 1 else m_op @ l_op
    if mode == "direct":
        n = grid.n_points
        u = np.atleast_1d(partner_potential(model, i, grid.x,
                                            fd_fallback=fd_fallback)).astype(complex)
        hh = grid.h ** 2
        return BandedMatrix(n, {
            0: 2.0 / hh + u,
            1: np.full(n - 1, -1.0 / hh, dtype=complex),
            -1: np.full(n - 1, -1.0 / hh, dtype=complex),
        })
    raise ArgumentError(f"mode must be 'factored' or 'direct', got {mode!r}")


def dirac_matrix(model: ModelSpec, grid: Grid) -> np.ndarray:
    """Block Dirac operator [[m I, -i L], [i M, -m I]] on the doubled grid.

    Its square is block-diag(L M, M L) + m^2 I exactly, so upper components
    carry sector-1 levels and lower components sector-2 levels.
    """
    if model.sector != PSEUDOSCALAR:
        raise ArgumentError("the block Dirac matrix is built for the "
                            "pseudoscalar sector; the scalar sector works "
                            "directly with the decoupled pair")
    n = grid.n_points
    l_op, m_op = first_order_ops(model, grid)
    out = np.zeros((2 * n, 2 * n), dtype=complex)
    idx = np.arange(n)
    out[idx, idx] = model.mass
    out[n + idx, n + idx] = -model.mass
    out[:n, n:] = -1j * l_op.to_dense()
    out[n:, :n] = 1j * m_op.to_dense()
    return out


def parity_matrix(grid: Grid) -> np.ndarray:
    """Node-reversal permutation; P^2 = I and P D P = -D exactly."""
    if np.any(grid.x + grid.x[::-1] != 0.0):
        raise ArgumentError("parity requires an exactly mirrored grid")
    return np.eye(grid.n_points)[::-1].copy()
