"""Linear algebra for SL(m,R) / SL(m,Z): group elements, roots, Cartan data,
distinguished subgroups, and the symmetric-space distance.

Real elements are float64 matrices renormalized to determinant one; integer
elements are exact (arbitrary-precision Python ints).  The distance is the
left-SO(m)-invariant proxy

    d(g, Id) = sqrt(2) * || (log sigma_1(g), ..., log sigma_m(g)) ||_2

computed from singular values, normalized so that diag(e^{t/2}, e^{-t/2})
moves at unit speed inside any embedded SL(2,R).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "RealGroupElement",
    "IntegerGroupElement",
    "Root",
    "CartanVector",
    "elementary",
    "exp_root",
    "cartan_element",
    "a_element",
    "b_element",
    "c_element",
    "sl2_embed",
    "symmetric_distance",
    "norm_conorm",
    "random_rotation",
    "random_element",
]

_DET_TOL = 1e-9


class GroupError(ValueError):
    """Raised when a construction violates a group-element invariant."""


class RealGroupElement:
    """An element of SL(m,R) stored as a float64 matrix.

    The constructor renormalizes by det^{1/m}; inputs whose determinant is
    non-positive or not finite are rejected rather than repaired.
    """

    __slots__ = ("mat", "dim")

    def __init__(self, entries):
        mat = np.array(entries, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise GroupError(f"expected a square matrix of size >= 2, got shape {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise GroupError("non-finite entries")
        det = float(np.linalg.det(mat))
        if not np.isfinite(det) or det <= 1e-300:
            raise GroupError(f"determinant {det} is not positive; not in SL(m,R)")
        m = mat.shape[0]
        mat = mat / det ** (1.0 / m)
        det = float(np.linalg.det(mat))
        if abs(det - 1.0) > _DET_TOL:
            raise GroupError(f"determinant {det} too far from 1 after renormalization")
        mat.setflags(write=False)
        self.mat = mat
        self.dim = m

    @classmethod
    def identity(cls, dim: int) -> "RealGroupElement":
        return cls(np.eye(dim))

    def __matmul__(self, other: "RealGroupElement") -> "RealGroupElement":
        return RealGroupElement(self.mat @ other.mat)

    def inverse(self) -> "RealGroupElement":
        return RealGroupElement(np.linalg.inv(self.mat))

    def __repr__(self) -> str:
        return f"RealGroupElement(dim={self.dim})"


class IntegerGroupElement:
    """An element of SL(m,Z): exact integer entries, determinant exactly 1."""

    __slots__ = ("rows", "dim")

    def __init__(self, entries):
        rows = tuple(tuple(int(v) for v in row) for row in entries)
        m = len(rows)
        if m < 2 or any(len(r) != m for r in rows):
            raise GroupError("expected a square integer matrix of size >= 2")
        if _int_det(rows) != 1:
            raise GroupError("integer matrix must have determinant exactly 1")
        self.rows = rows
        self.dim = m

    @classmethod
    def identity(cls, dim: int) -> "IntegerGroupElement":
        return cls(tuple(tuple(1 if i == j else 0 for j in range(dim)) for i in range(dim)))

    def __matmul__(self, other: "IntegerGroupElement") -> "IntegerGroupElement":
        a, b, m = self.rows, other.rows, self.dim
        return IntegerGroupElement(
            tuple(tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(m)) for i in range(m))
        )

    def inverse(self) -> "IntegerGroupElement":
        return IntegerGroupElement(_int_inverse(self.rows))

    def as_real(self) -> RealGroupElement:
        return RealGroupElement(np.array(self.rows, dtype=float))

    def as_array(self) -> np.ndarray:
        return np.array(self.rows, dtype=float)

    def op_norm(self) -> float:
        return float(np.linalg.norm(np.array(self.rows, dtype=float), 2))

    def __eq__(self, other) -> bool:
        return isinstance(other, IntegerGroupElement) and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __repr__(self) -> str:
        return f"IntegerGroupElement({list(map(list, self.rows))})"


def _int_det(rows) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    m = len(rows)
    a = [list(r) for r in rows]
    sign = 1
    prev = 1
    for k in range(m - 1):
        if a[k][k] == 0:
            for i in range(k + 1, m):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, m):
            for j in range(k + 1, m):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[m - 1][m - 1]


def _int_inverse(rows):
    """Exact inverse of a determinant-1 integer matrix (adjugate)."""
    m = len(rows)
    out = []
    for i in range(m):
        out_row = []
        for j in range(m):
            minor = [[rows[r][c] for c in range(m) if c != i] for r in range(m) if r != j]
            cof = _int_det(minor) if m > 1 else 1
            out_row.append(cof if (i + j) % 2 == 0 else -cof)
        out.append(tuple(out_row))
    return tuple(out)


@dataclass(frozen=True)
class Root:
    """The root beta_{i,j} sending diag(t_1..t_m) to t_i - t_j (1-indexed)."""

    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j or self.i < 1 or self.j < 1:
            raise GroupError(f"invalid root indices ({self.i},{self.j})")

    def evaluate(self, t: "CartanVector | Sequence[float]") -> float:
        vec = t.t if isinstance(t, CartanVector) else np.asarray(t, dtype=float)
        return float(vec[self.i - 1] - vec[self.j - 1])

    def negated(self) -> "Root":
        return Root(self.j, self.i)


def simple_root(j: int) -> Root:
    """alpha_j = beta_{j,j+1}."""
    return Root(j, j + 1)


def highest_root(dim: int) -> Root:
    """delta = beta_{1,m}."""
    return Root(1, dim)


@dataclass(frozen=True)
class CartanVector:
    """A trace-zero diagonal exponent vector (element of the Cartan algebra)."""

    t: np.ndarray

    def __init__(self, t):
        vec = np.array(t, dtype=float)
        if vec.ndim != 1 or vec.size < 2:
            raise GroupError("Cartan vector must be a 1-d array of size >= 2")
        if abs(float(vec.sum())) > 1e-12:
            raise GroupError(f"Cartan vector trace {vec.sum()} exceeds tolerance 1e-12")
        vec.setflags(write=False)
        object.__setattr__(self, "t", vec)

    @property
    def dim(self) -> int:
        return self.t.size


def elementary(i: int, j: int, k: int, dim: int) -> IntegerGroupElement:
    """E_{i,j}^k: identity with k in position (i,j), 1-indexed, i != j."""
    if i == j:
        raise GroupError("elementary matrix requires i != j")
    if not (1 <= i <= dim and 1 <= j <= dim):
        raise GroupError(f"indices ({i},{j}) out of range for dim {dim}")
    rows = [[1 if r == c else 0 for c in range(dim)] for r in range(dim)]
    rows[i - 1][j - 1] = int(k)
    return IntegerGroupElement(rows)


def exp_root(root: Root, s: float, dim: int) -> RealGroupElement:
    """One-parameter unipotent U^{beta_{i,j}}(s) = Id + s E_{i,j}."""
    if not np.isfinite(s):
        raise GroupError("exp_root requires finite parameter")
    if root.i > dim or root.j > dim:
        raise GroupError(f"root ({root.i},{root.j}) out of range for dim {dim}")
    mat = np.eye(dim)
    mat[root.i - 1, root.j - 1] = s
    return RealGroupElement(mat)


def cartan_element(v: CartanVector | Sequence[float]) -> RealGroupElement:
    """diag(e^{v_1}, ..., e^{v_m}) for trace-zero v."""
    vec = v if isinstance(v, CartanVector) else CartanVector(v)
    return RealGroupElement(np.diag(np.exp(vec.t)))


def a_element(t: float, dim: int) -> RealGroupElement:
    """a^t = diag(e^{t/2}, e^{-t/2}, 1, ..., 1): unit-speed geodesic direction."""
    v = np.zeros(dim)
    v[0] = t / 2.0
    v[1] = -t / 2.0
    return cartan_element(v)


def b_element(s: float, dim: int) -> RealGroupElement:
    """b^s = diag(e^s, ..., e^s, e^{-s(m-1)})."""
    v = np.full(dim, s, dtype=float)
    v[-1] = -s * (dim - 1)
    return cartan_element(v)


def c_element(i: int, s: float, dim: int) -> RealGroupElement:
    """c_i^s for i = 1..m-3; diagonal with exponent e_{i+1} - e_{i+2}.

    The (m,m)-entry of every c_i equals 1, and {a, b, c_1, ..., c_{m-3}}
    generates the full diagonal group.
    """
    if not (1 <= i <= dim - 3):
        raise GroupError(f"c_{i} undefined for dim {dim}")
    v = np.zeros(dim)
    v[i] = s
    v[i + 1] = -s
    return cartan_element(v)


def sl2_embed(a: float, b: float, c: float, d: float, i: int, j: int, dim: int) -> RealGroupElement:
    """Place the 2x2 block [[a,b],[c,d]] (ad - bc = 1) at rows/columns (i,j)."""
    if abs(a * d - b * c - 1.0) > _DET_TOL:
        raise GroupError(f"block determinant {a*d - b*c} not 1 within {_DET_TOL}")
    if i == j or not (1 <= i <= dim and 1 <= j <= dim):
        raise GroupError(f"invalid block position ({i},{j})")
    mat = np.eye(dim)
    mat[i - 1, i - 1] = a
    mat[i - 1, j - 1] = b
    mat[j - 1, i - 1] = c
    mat[j - 1, j - 1] = d
    return RealGroupElement(mat)


def _as_mat(g) -> np.ndarray:
    if isinstance(g, RealGroupElement):
        return g.mat
    if isinstance(g, IntegerGroupElement):
        return g.as_array()
    return np.asarray(g, dtype=float)


def symmetric_distance(g, h=None) -> float:
    """d(g, h) = sqrt(2) * ||log sigma(g h^{-1})||_2; d(g) means d(g, Id)."""
    mat = _as_mat(g)
    if h is not None:
        mat = mat @ np.linalg.inv(_as_mat(h))
    sigma = np.linalg.svd(mat, compute_uv=False)
    return float(np.sqrt(2.0) * np.linalg.norm(np.log(sigma)))


def norm_conorm(g) -> tuple[float, float]:
    """(operator norm ||g||, conorm m(g) = ||g^{-1}||^{-1}) via singular values."""
    sigma = np.linalg.svd(_as_mat(g), compute_uv=False)
    return float(sigma[0]), float(sigma[-1])


def random_rotation(rng: np.random.Generator, dim: int) -> RealGroupElement:
    """Haar-random element of SO(m)."""
    a = rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(a)
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return RealGroupElement(q)


def random_element(rng: np.random.Generator, dim: int, spread: float = 1.0) -> RealGroupElement:
    """Random element of SL(m,R): Gaussian entries scaled by `spread`, renormalized."""
    while True:
        a = rng.standard_normal((dim, dim)) * spread
        if abs(np.linalg.det(a)) > 1e-6:
            if np.linalg.det(a) < 0:
                a[:, 0] = -a[:, 0]
            return RealGroupElement(a)
