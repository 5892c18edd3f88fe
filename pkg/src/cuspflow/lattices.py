"""Unimodular lattices g Z^m: basis reduction, exact systole, sublattice
covolumes, and the cusp-depth functional depth = max(0, -log systole).

Reduction runs an exact all-integer LLL (Lovasz parameter 0.99) on a scaled
copy of the basis, so it stays reliable even for the badly conditioned bases
produced by long diagonal flows (entry ratios far beyond float precision).
The systole is then found by exact enumeration inside the radius given by the
shortest reduced vector, with a hard candidate budget.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .grouplin import IntegerGroupElement

__all__ = [
    "UnimodularLattice",
    "SublatticeSpec",
    "EnumerationBudgetError",
    "systole",
    "reduce_basis",
    "sublattice_covolume",
    "depth",
    "shortest_vector",
    "shortest_independent_vectors",
]

ENUMERATION_BUDGET = 10**8
_LLL_DELTA_NUM = 99
_LLL_DELTA_DEN = 100


class EnumerationBudgetError(RuntimeError):
    """Shortest-vector enumeration exceeded the candidate budget."""


class LatticeError(ValueError):
    pass


class UnimodularLattice:
    """Determinant-1 lattice given by an m x m basis (columns are generators).

    The reduced basis, the unimodular change of basis with
    ``basis @ change = reduced``, and the systole are computed lazily and
    cached; instances are immutable after construction.
    """

    __slots__ = ("basis", "dim", "_reduced", "_change", "_shortest")

    def __init__(self, basis):
        mat = np.array(basis, dtype=float)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] < 2:
            raise LatticeError(f"basis must be square of size >= 2, got {mat.shape}")
        if not np.all(np.isfinite(mat)):
            raise LatticeError("basis has non-finite entries")
        det = float(np.linalg.det(mat))
        if abs(det) < 1e-9:
            raise LatticeError(f"degenerate basis, |det| = {abs(det)}")
        if det < 0:
            mat = mat.copy()
            mat[:, 0] = -mat[:, 0]
            det = -det
        m = mat.shape[0]
        mat = mat / det ** (1.0 / m)
        if abs(np.linalg.det(mat) - 1.0) > 1e-9:
            raise LatticeError("could not renormalize basis to determinant 1")
        mat.setflags(write=False)
        self.basis = mat
        self.dim = m
        self._reduced = None
        self._change = None
        self._shortest = None

    @classmethod
    def standard(cls, dim: int) -> "UnimodularLattice":
        return cls(np.eye(dim))

    @property
    def reduced(self) -> np.ndarray:
        if self._reduced is None:
            self._reduce()
        return self._reduced

    @property
    def change(self) -> IntegerGroupElement:
        if self._change is None:
            self._reduce()
        return self._change

    def _reduce(self):
        reduced, change = _lll_reduce(self.basis)
        reduced.setflags(write=False)
        self._reduced = reduced
        self._change = IntegerGroupElement(change)

    def depth(self) -> float:
        return depth(self)

    def __repr__(self) -> str:
        return f"UnimodularLattice(dim={self.dim})"


@dataclass(frozen=True)
class SublatticeSpec:
    """k linearly independent lattice vectors, as integer coordinates w.r.t.
    the ambient basis."""

    vectors: tuple[tuple[int, ...], ...]

    def __init__(self, vectors: Sequence[Sequence[int]]):
        vecs = tuple(tuple(int(c) for c in v) for v in vectors)
        if not vecs:
            raise LatticeError("sublattice needs at least one vector")
        object.__setattr__(self, "vectors", vecs)

    @property
    def rank(self) -> int:
        return len(self.vectors)


# ---------------------------------------------------------------------------
# exact integer LLL


def _scale_bits(mat: np.ndarray) -> int:
    # det = 1 gives sigma_min >= max|entry|^{-(m-1)}; keep 64 bits below that.
    m = mat.shape[0]
    max_entry = float(np.max(np.abs(mat)))
    if max_entry < 1.0:
        max_entry = 1.0
    return 64 + (m - 1) * int(np.ceil(np.log2(max_entry + 2.0)))


def _lll_integer(cols: list[list[int]]) -> list[list[int]]:
    """All-integer LLL on integer columns; returns the unimodular transform U
    (as columns) with ``cols @ U`` reduced.  Lovasz parameter 99/100."""
    n = len(cols)
    b = [list(c) for c in cols]
    u = [[1 if i == j else 0 for i in range(n)] for j in range(n)]  # columns

    def dot(x, y):
        return sum(p * q for p, q in zip(x, y))

    d = [1] * (n + 1)
    lam = [[0] * n for _ in range(n)]

    def init_gs():
        for i in range(n):
            for j in range(i + 1):
                val = dot(b[i], b[j])
                for k in range(j):
                    val = (d[k + 1] * val - lam[i][k] * lam[j][k]) // d[k]
                if j < i:
                    lam[i][j] = val
                else:
                    d[i + 1] = val
                    if val <= 0:
                        raise LatticeError("linearly dependent basis in integer LLL")

    def redi(k, l):
        if 2 * abs(lam[k][l]) > d[l + 1]:
            q = (2 * lam[k][l] + d[l + 1]) // (2 * d[l + 1])
            for r in range(len(b[k])):
                b[k][r] -= q * b[l][r]
            for r in range(n):
                u[k][r] -= q * u[l][r]
            lam[k][l] -= q * d[l + 1]
            for i in range(l):
                lam[k][i] -= q * lam[l][i]

    def swapi(k):
        b[k], b[k - 1] = b[k - 1], b[k]
        u[k], u[k - 1] = u[k - 1], u[k]
        for j in range(k - 1):
            lam[k][j], lam[k - 1][j] = lam[k - 1][j], lam[k][j]
        lam_ = lam[k][k - 1]
        bnew = (d[k - 1] * d[k + 1] + lam_ * lam_) // d[k]
        for i in range(k + 1, n):
            t = lam[i][k]
            lam[i][k] = (d[k + 1] * lam[i][k - 1] - lam_ * t) // d[k]
            lam[i][k - 1] = (bnew * t + lam_ * lam[i][k]) // d[k + 1]
        d[k] = bnew

    init_gs()
    k = 1
    while k < n:
        redi(k, k - 1)
        if _LLL_DELTA_DEN * d[k + 1] * d[k - 1] < (
            _LLL_DELTA_NUM * d[k] * d[k] - _LLL_DELTA_DEN * lam[k][k - 1] * lam[k][k - 1]
        ):
            swapi(k)
            k = max(k - 1, 1)
        else:
            for l in range(k - 2, -1, -1):
                redi(k, l)
            k += 1
    return u


def _transform_det(u: list[list[int]]) -> int:
    n = len(u)
    rows = tuple(tuple(u[j][i] for j in range(n)) for i in range(n))
    from .grouplin import _int_det

    return _int_det(rows)


def _lll_reduce(basis: np.ndarray) -> tuple[np.ndarray, tuple]:
    """Reduce a float basis exactly: scale to integers, run integer LLL,
    rebuild the reduced float basis from exact integer arithmetic."""
    m = basis.shape[0]
    p = _scale_bits(basis)
    scale = 1 << p
    cols_int = [[int(round(basis[r, c] * scale)) for r in range(m)] for c in range(m)]
    u = _lll_integer(cols_int)
    if _transform_det(u) == -1:
        u[-1] = [-x for x in u[-1]]
    reduced_int = [
        [sum(cols_int[c][r] * u[j][c] for c in range(m)) for r in range(m)] for j in range(m)
    ]
    reduced = np.array(
        [[reduced_int[j][r] / scale for j in range(m)] for r in range(m)], dtype=float
    )
    change_rows = tuple(tuple(u[j][i] for j in range(m)) for i in range(m))
    return reduced, change_rows


# ---------------------------------------------------------------------------
# shortest-vector enumeration (Fincke-Pohst on the reduced basis)


def _enumerate_shortest(reduced: np.ndarray, budget: int) -> tuple[float, np.ndarray]:
    """Exact shortest nonzero vector of the lattice spanned by the (already
    reduced) columns.  Returns (norm, integer coefficients w.r.t. reduced)."""
    m = reduced.shape[0]
    gram = reduced.T @ reduced
    # Cholesky gram = R^T R, R upper triangular
    r = np.linalg.cholesky(gram).T
    best2 = float(np.min(np.sum(reduced**2, axis=0))) * (1.0 + 1e-9)
    best_coeff = np.zeros(m, dtype=np.int64)
    best_coeff[int(np.argmin(np.sum(reduced**2, axis=0)))] = 1

    coeff = np.zeros(m, dtype=np.int64)
    count = 0

    def dfs(level: int, partial: np.ndarray, acc2: float):
        # partial: contributions r[level+1:,:] already fixed; acc2 their norm^2
        nonlocal best2, best_coeff, count
        if level < 0:
            if acc2 > 1e-18 and acc2 < best2:
                best2 = acc2
                best_coeff = coeff.copy()
            return
        rem = best2 - acc2
        if rem < 0:
            return
        center = -partial[level] / r[level, level]
        half = np.sqrt(rem) / abs(r[level, level])
        lo = int(np.ceil(center - half - 1e-12))
        hi = int(np.floor(center + half + 1e-12))
        for z in range(lo, hi + 1):
            count += 1
            if count > budget:
                raise EnumerationBudgetError(
                    f"enumeration exceeded budget of {budget} candidates"
                )
            t = (z - center) * r[level, level]
            new_acc2 = acc2 + t * t
            if new_acc2 >= best2 * (1.0 + 1e-12):
                continue
            coeff[level] = z
            dfs(level - 1, partial + z * r[:, level], new_acc2)
        coeff[level] = 0

    dfs(m - 1, np.zeros(m), 0.0)
    return float(np.sqrt(best2 / (1.0 + 1e-9))), best_coeff


def shortest_vector(lat: UnimodularLattice) -> tuple[np.ndarray, np.ndarray]:
    """(vector, coefficients w.r.t. the original basis) of a shortest nonzero
    lattice vector."""
    if lat._shortest is None:
        norm, coeff_red = _enumerate_shortest(lat.reduced, ENUMERATION_BUDGET)
        change = np.array(lat.change.rows, dtype=object)
        coeff = change @ coeff_red.astype(object)
        vec = lat.reduced @ coeff_red.astype(float)
        lat._shortest = (norm, vec, np.array([int(c) for c in coeff], dtype=np.int64))
    _, vec, coeff = lat._shortest
    return vec, coeff


def systole(lat: UnimodularLattice) -> float:
    """Exact minimum Euclidean norm over nonzero lattice vectors."""
    if lat._shortest is None:
        shortest_vector(lat)
    return lat._shortest[0]


def reduce_basis(lat: UnimodularLattice) -> UnimodularLattice:
    """The same lattice, presented by its LLL-reduced basis."""
    return UnimodularLattice(lat.reduced)


def sublattice_covolume(lat: UnimodularLattice, spec: SublatticeSpec) -> float:
    """sqrt(det Gram) of the sublattice spanned by the given integer
    coordinate vectors."""
    coords = np.array(spec.vectors, dtype=float).T  # m x k
    if coords.shape[0] != lat.dim:
        raise LatticeError("coordinate length does not match lattice dimension")
    vecs = lat.basis @ coords
    gram = vecs.T @ vecs
    g = float(np.linalg.det(gram))
    if g <= 1e-12:
        raise LatticeError(f"dependent vectors: Gram determinant {g} <= 1e-12")
    return float(np.sqrt(g))


def depth(lat: UnimodularLattice) -> float:
    """Cusp-distance proxy: max(0, -log systole)."""
    return max(0.0, -float(np.log(systole(lat))))


def shortest_independent_vectors(lat: UnimodularLattice, k: int, radius_factor: float = 2.0):
    """Greedy short, linearly independent vectors (used to probe minimal
    covolumes of rank-k sublattices).  Returns a list of k float vectors."""
    red = lat.reduced
    m = lat.dim
    norms = np.sqrt(np.sum(red**2, axis=0))
    radius = radius_factor * float(np.max(norms))
    # enumerate all vectors within `radius` via DFS on the reduced basis
    gram = red.T @ red
    r = np.linalg.cholesky(gram).T
    found = []

    def dfs(level, partial, acc2, coeff):
        if level < 0:
            if acc2 > 1e-18:
                found.append((acc2, tuple(coeff)))
            return
        rem = radius**2 - acc2
        if rem < 0:
            return
        center = -partial[level] / r[level, level]
        half = np.sqrt(rem) / abs(r[level, level])
        for z in range(int(np.ceil(center - half)), int(np.floor(center + half)) + 1):
            t = (z - center) * r[level, level]
            coeff[level] = z
            dfs(level - 1, partial + z * r[:, level], acc2 + t * t, coeff)
        coeff[level] = 0

    dfs(m - 1, np.zeros(m), 0.0, [0] * m)
    found.sort(key=lambda p: p[0])
    picked = []
    picked_coeffs = []
    for _, c in found:
        cand = red @ np.array(c, dtype=float)
        trial = picked + [cand]
        if np.linalg.matrix_rank(np.array(trial).T, tol=1e-10) == len(trial):
            picked.append(cand)
            picked_coeffs.append(c)
            if len(picked) == k:
                break
    if len(picked) < k:
        raise LatticeError(f"could not find {k} independent vectors within radius")
    return picked
