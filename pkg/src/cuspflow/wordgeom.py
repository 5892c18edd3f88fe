"""Word geometry of SL(m,Z): exact word evaluation, decomposition into
elementary letters by integer row/column reduction with continued-fraction
pivoting, logarithmic-length unipotent words, and the quasi-isometry check
for the return cocycle.

A word is a sequence of letters (i, j, k) standing for E_{i,j}^k; evaluation
is exact over Python integers.  Two costs are tracked: ``letter_count`` (the
number of letters) and ``log_cost`` = sum of 1 + log2(1 + |k|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .grouplin import IntegerGroupElement
from .modular import ModularPoint, return_cocycle
from .grouplin import symmetric_distance

__all__ = [
    "GroupWord",
    "DecompositionReport",
    "word_eval",
    "lmr_decompose",
    "unipotent_short_word",
    "fromlmr_check",
    "semidirect_conjugate",
    "word_to_text",
    "word_from_text",
]


@dataclass(frozen=True)
class GroupWord:
    """Sequence of elementary letters E_{i,j}^k in SL(m,Z)."""

    letters: tuple[tuple[int, int, int], ...]
    dim: int

    def __init__(self, letters: Iterable[Sequence[int]], dim: int):
        ls = tuple((int(i), int(j), int(k)) for i, j, k in letters)
        for i, j, _ in ls:
            if i == j or not (1 <= i <= dim and 1 <= j <= dim):
                raise ValueError(f"invalid letter ({i},{j}) for dim {dim}")
        object.__setattr__(self, "letters", ls)
        object.__setattr__(self, "dim", int(dim))

    @property
    def letter_count(self) -> int:
        return len(self.letters)

    @property
    def log_cost(self) -> float:
        return sum(1.0 + math.log2(1.0 + abs(k)) for _, _, k in self.letters)

    def __add__(self, other: "GroupWord") -> "GroupWord":
        if other.dim != self.dim:
            raise ValueError("cannot concatenate words of different dimension")
        return GroupWord(self.letters + other.letters, self.dim)

    def inverse(self) -> "GroupWord":
        return GroupWord(tuple((i, j, -k) for i, j, k in reversed(self.letters)), self.dim)

    def __len__(self) -> int:
        return len(self.letters)


def word_eval(w: GroupWord) -> IntegerGroupElement:
    """Exact ordered product of the letters (arbitrary precision)."""
    m = w.dim
    rows = [[1 if r == c else 0 for c in range(m)] for r in range(m)]
    # A <- A * E_{i,j}^k is the column operation col_j += k * col_i
    for i, j, k in w.letters:
        if k == 0:
            continue
        i0, j0 = i - 1, j - 1
        for r in range(m):
            rows[r][j0] += k * rows[r][i0]
    return IntegerGroupElement(rows)


@dataclass(frozen=True)
class DecompositionReport:
    word: GroupWord
    factor_count: int
    log_cost: float
    input_log_norm: float


def _minus_identity_letters(i: int, j: int) -> list[tuple[int, int, int]]:
    # (E_ij E_ji^{-1} E_ij)^2 = -Id on the (i,j) block, identity elsewhere
    s = [(i, j, 1), (j, i, -1), (i, j, 1)]
    return s + s


def _iround(x: int, y: int) -> int:
    """round(x / y) to the nearest integer, exact for big integers."""
    if y < 0:
        x, y = -x, -y
    return (2 * x + y) // (2 * y)


def lmr_decompose(gamma: IntegerGroupElement) -> DecompositionReport:
    """Write gamma in SL(m,Z), m >= 3, as an exact product of elementary
    letters, by integer column reduction with continued-fraction pivoting.

    The returned word evaluates to gamma exactly; letter count and log-cost
    are reported (the sharp block-count bound of the quasi-isometry theory is
    validated statistically in tests, not asserted here).
    """
    m = gamma.dim
    if m < 3:
        raise ValueError("decomposition requires dimension >= 3")
    a = [list(r) for r in gamma.rows]
    ops: list[tuple[int, int, int]] = []  # letters applied on the right, in order

    def colop(i0: int, j0: int, k: int):
        # A <- A * E_{i0+1,j0+1}^k : col_j0 += k * col_i0 (0-indexed args)
        if k == 0:
            return
        for r in range(m):
            a[r][j0] += k * a[r][i0]
        ops.append((i0 + 1, j0 + 1, k))

    def negate_pair(i0: int, j0: int):
        # right-multiply by -Id on the (i0, j0) coordinate pair (6 unit letters)
        for li, lj, lk in _minus_identity_letters(i0 + 1, j0 + 1):
            colop(li - 1, lj - 1, lk)

    # Stage R (0-indexed row, from m-1 down to 2): clear row R to e_R using
    # column operations among columns 0..R; rows below are e-rows already.
    for R in range(m - 1, 1, -1):
        while True:
            nz = sorted((abs(a[R][c]), c) for c in range(R + 1) if a[R][c] != 0)
            if not nz:
                raise ValueError("zero row; input not in SL(m,Z)")
            if len(nz) == 1:
                break
            piv = nz[0][1]
            pv = a[R][piv]
            for _, c in nz[1:]:
                colop(piv, c, -_iround(a[R][c], pv))
        piv = nz[0][1]
        pv = a[R][piv]
        if abs(pv) != 1:
            raise ValueError("row gcd != 1; input not unimodular")
        if piv != R:
            colop(piv, R, pv)  # a[R][R] becomes pv^2 = 1
            colop(R, piv, -pv)  # clear the old pivot position
        elif pv == -1:
            negate_pair(R, R - 1)  # flips a[R][R] to +1, keeps zeros zero

    # Top-left 2x2 block (det 1): continued fractions on the bottom row.
    while a[1][0] != 0:
        p, q, r, s = a[0][0], a[0][1], a[1][0], a[1][1]
        if s == 0:
            colop(0, 1, 1)  # make the (1,1) entry nonzero: s <- s + r
            continue
        qq = _iround(r, s)
        if qq == 0:
            qq = 1 if (r > 0) == (s > 0) else -1
        colop(1, 0, -qq)
    if a[1][1] == -1:
        negate_pair(0, 1)
    if a[0][1] != 0:
        colop(0, 1, -a[0][1])

    # Clear the strictly upper-triangular remainder, left to right.
    for col in range(2, m):
        for row in range(col):
            colop(row, col, -a[row][col])

    assert all(
        a[r][c] == (1 if r == c else 0) for r in range(m) for c in range(m)
    ), "reduction did not reach the identity"

    # gamma * (product of ops) = Id  =>  gamma = product of inverted ops, reversed
    letters = tuple((i, j, -k) for i, j, k in reversed(ops))
    word = GroupWord(letters, m)
    return DecompositionReport(
        word=word,
        factor_count=word.letter_count,
        log_cost=word.log_cost,
        input_log_norm=_log_norm_rows(gamma.rows),
    )


def _log_norm_rows(rows) -> float:
    """log of the Frobenius norm of an integer matrix, overflow-safe."""
    biggest = max((abs(v) for row in rows for v in row), default=0)
    if biggest == 0:
        return 0.0
    shift = max(0, biggest.bit_length() - 500)
    total = sum((abs(v) >> shift) ** 2 for row in rows for v in row)
    return 0.5 * math.log(total) + shift * math.log(2.0)


def _power_word(i: int, j: int, e: int, aux: int, dim: int) -> list[tuple[int, int, int]]:
    """Unit-letter word for E_{i,j}^{2^e} via E_{i,j}^{ab} = [E_{i,aux}^a, E_{aux,j}^b]."""
    if e == 0:
        return [(i, j, 1)]
    ea = (e + 1) // 2
    eb = e // 2
    aux2 = _pick_aux(i, aux, dim)
    aux3 = _pick_aux(aux, j, dim)
    wa = _power_word(i, aux, ea, aux2, dim)
    wb = _power_word(aux, j, eb, aux3, dim)
    wa_inv = [(p, q, -k) for p, q, k in reversed(wa)]
    wb_inv = [(p, q, -k) for p, q, k in reversed(wb)]
    return wa + wb + wa_inv + wb_inv


def _general_word(i: int, j: int, k: int, dim: int) -> list[tuple[int, int, int]]:
    """Unit-letter word for E_{i,j}^k, k >= 0, via k = a*b + r with a = 2^e."""
    if k == 0:
        return []
    if k == 1:
        return [(i, j, 1)]
    e_total = k.bit_length() - 1
    ea = (e_total + 1) // 2
    a = 1 << ea
    b = k // a
    r = k - a * b
    aux = _pick_aux(i, j, dim)
    wa = _power_word(i, aux, ea, _pick_aux(i, aux, dim), dim)
    wb = _general_word(aux, j, b, dim)
    wa_inv = [(p, q, -kk) for p, q, kk in reversed(wa)]
    wb_inv = [(p, q, -kk) for p, q, kk in reversed(wb)]
    return wa + wb + wa_inv + wb_inv + _general_word(i, j, r, dim)


def _pick_aux(i: int, j: int, dim: int) -> int:
    for l in range(1, dim + 1):
        if l != i and l != j:
            return l
    raise ValueError("no auxiliary index available (dimension must be >= 3)")


def unipotent_short_word(i: int, j: int, k: int, m: int) -> GroupWord:
    """A word with unit-exponent letters only, evaluating exactly to E_{i,j}^k.

    Uses base-2 recursion on the commutator identity
    E_{i,j}^{ab} = E_{i,l}^{a} E_{l,j}^{b} E_{i,l}^{-a} E_{l,j}^{-b};
    the length is O((1 + log2 |k|)^2).  Requires m >= 3 (in SL(2,Z) the word
    length of E^k over unit letters grows linearly in k).
    """
    if m < 3:
        raise ValueError(
            "unipotent_short_word needs m >= 3; in SL(2,Z) unit-letter words "
            "for E^k have length proportional to k"
        )
    if i == j or not (1 <= i <= m and 1 <= j <= m):
        raise ValueError(f"invalid indices ({i},{j})")
    letters = _general_word(i, j, abs(int(k)), m)
    if k < 0:
        letters = [(p, q, -kk) for p, q, kk in reversed(letters)]
    return GroupWord(letters, m)


@dataclass(frozen=True)
class FromLmrFit:
    constant: float
    worst_index: int
    proxies: tuple  # log(1 + ||beta||) per sample
    bounds: tuple  # d(g,Id) + depth(x) + 1 per sample


def fromlmr_check(samples: Sequence[tuple]) -> FromLmrFit:
    """Fit the smallest C with log(1 + ||beta(g,x)||) <= C (d(g,Id) + depth(x) + 1)
    over samples of (g, x); g a 2x2 element, x a ModularPoint.

    The left side is the word-length proxy for beta justified by the
    quasi-isometry between word length and log-norm in SL(m,Z).
    """
    proxies, bounds = [], []
    for g, x in samples:
        beta = return_cocycle(g, x)
        proxies.append(math.log1p(beta.op_norm()))
        bounds.append(symmetric_distance(g) + x.depth + 1.0)
    ratios = [p / b for p, b in zip(proxies, bounds)]
    worst = int(np.argmax(ratios))
    return FromLmrFit(
        constant=float(ratios[worst]),
        worst_index=worst,
        proxies=tuple(proxies),
        bounds=tuple(bounds),
    )


def semidirect_conjugate(a: IntegerGroupElement, v: tuple[int, int]) -> tuple[int, int]:
    """In SL(2,Z) semidirect Z^2 inside SL(3,Z) (Z^2 spanned by E_{1,3}, E_{2,3}),
    verify the exact identity  sl3(A) u_v sl3(A)^{-1} = u_{A v}  and return A v."""
    if a.dim != 2:
        raise ValueError("expected a 2x2 integer element")
    (p, q), (r, s) = a.rows
    v1, v2 = int(v[0]), int(v[1])
    av = (p * v1 + q * v2, r * v1 + s * v2)
    sl3a = IntegerGroupElement(((p, q, 0), (r, s, 0), (0, 0, 1)))
    uv = IntegerGroupElement(((1, 0, v1), (0, 1, v2), (0, 0, 1)))
    lhs = sl3a @ uv @ sl3a.inverse()
    rhs = IntegerGroupElement(((1, 0, av[0]), (0, 1, av[1]), (0, 0, 1)))
    assert lhs == rhs, "semidirect conjugation identity failed"
    return av


def word_to_text(w: GroupWord) -> str:
    """Serialize as lines 'i j k'."""
    return "\n".join(f"{i} {j} {k}" for i, j, k in w.letters) + ("\n" if w.letters else "")


def word_from_text(text: str, dim: int) -> GroupWord:
    letters = []
    for line in text.splitlines():
        line = line.strip()
        if not line:
            continue
        i, j, k = line.split()
        letters.append((int(i), int(j), int(k)))
    return GroupWord(letters, dim)
