"""Dynamics on SL(2,R)/SL(2,Z): fundamental-domain reduction with exact deck
bookkeeping, geodesic and horocycle flows, the return cocycle, orbit-segment
statistics, and the thick/cusp excursion decomposition.

A point x = g SL(2,Z) is the unimodular lattice spanned by the columns of g.
Its shape coordinate is

    z(g) = (<v1, v2> + i) / |v2|^2        (v1, v2 the columns of g),

which is invariant under left rotations and transforms under the right deck
action by integer Moebius moves: right multiplication by E_{2,1}^k translates
z by k, and by [[0,1],[-1,0]] inverts z to -1/z.  A representative is reduced
when z lies in the standard domain |Re z| <= 1/2, |z| >= 1; then the second
column is a shortest lattice vector, so depth = max(0, log(Im z)/2).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Literal, Optional, Sequence

import numpy as np

from .grouplin import IntegerGroupElement, RealGroupElement

__all__ = [
    "ModularPoint",
    "OrbitSegment",
    "ExcursionDecomposition",
    "ReduceError",
    "THICK_DEPTH",
    "reduce",
    "flow_orbit",
    "return_cocycle",
    "decompose_excursions",
    "excursion_deck_class",
    "chi_stats",
    "geodesic_step",
    "horocycle_step",
    "orbit_to_csv",
    "count_integer_ball",
]

#: Thick part is {depth <= THICK_DEPTH}; matches an imaginary-part cutoff of
#: 17 in the upper half plane (depth = log(Im z)/2).
THICK_DEPTH = math.log(17.0) / 2.0

REDUCE_CAP = 10**4
_BOUNDARY_TOL = 1e-9

FlowTag = Literal["geodesic", "horocycle"]


class ReduceError(RuntimeError):
    """Fundamental-domain reduction failed to terminate (degenerate input)."""


# 2x2 matrices are handled as row-major 4-tuples (a, b, c, d) = [[a,b],[c,d]]
# in the hot path; columns are v1 = (a, c), v2 = (b, d).


def _mul(x, y):
    return (
        x[0] * y[0] + x[1] * y[2],
        x[0] * y[1] + x[1] * y[3],
        x[2] * y[0] + x[3] * y[2],
        x[2] * y[1] + x[3] * y[3],
    )


def _inv_int(d):
    # determinant is +1 for all deck words we build
    return (d[3], -d[1], -d[2], d[0])


def _z_parts(g):
    a, b, c, d = g
    n2 = b * b + d * d
    ip = a * b + c * d
    return ip, n2


_W = (0, 1, -1, 0)  # z -> -1/z
_IDENT = (1, 0, 0, 1)


def _reduce_tuple(g, cap=REDUCE_CAP):
    """Core reduction: returns (rep, delta, iterations) with rep = g @ delta,
    delta an exact integer 2x2 (det 1), and z(rep) in the closed domain."""
    delta = _IDENT
    for it in range(cap):
        ip, n2 = _z_parts(g)
        if not (math.isfinite(ip) and n2 > 5e-324 and math.isfinite(n2)):
            raise ReduceError(
                "orbit left the float range (depth beyond ~350); input degenerate or divergent"
            )
        k = round(ip / n2)
        if k:
            # right-multiply by E21^{-k}: v1 -= k v2
            g = (g[0] - k * g[1], g[1], g[2] - k * g[3], g[3])
            delta = (delta[0] - k * delta[1], delta[1], delta[2] - k * delta[3], delta[3])
        a, b, c, d = g
        n1 = a * a + c * c
        n2 = b * b + d * d
        if n1 < n2 * (1.0 - 1e-14):
            # right-multiply by W: (v1, v2) -> (-v2, v1)
            g = (-b, a, -d, c)
            delta = (-delta[1], delta[0], -delta[3], delta[2])
        else:
            return g, delta, it + 1
    raise ReduceError(f"reduction did not terminate within {cap} iterations")


_BOUNDARY_MOVES = None


def _boundary_moves():
    global _BOUNDARY_MOVES
    if _BOUNDARY_MOVES is None:
        letters = [
            (1, 0, 1, 1),  # E21
            (1, 0, -1, 1),  # E21^{-1}
            _W,
            (0, -1, 1, 0),  # W^{-1}
        ]
        moves = {_IDENT}
        for x in letters:
            moves.add(x)
            for y in letters:
                moves.add(_mul(x, y))
        _BOUNDARY_MOVES = sorted(moves)
    return _BOUNDARY_MOVES


def _in_domain(g, tol=_BOUNDARY_TOL):
    ip, n2 = _z_parts(g)
    a, _, c, _ = g
    n1 = a * a + c * c
    re = ip / n2
    return abs(re) <= 0.5 + tol and n1 >= n2 * (1.0 - 2.0 * tol)


def _canonical_key(g, delta):
    ip, n2 = _z_parts(g)
    re = ip / n2
    clamp = 1e150  # avoid float overflow for reps deep in the cusp
    frob_dist = sum(min(abs(v), clamp) ** 2 for v in (g[0] - 1.0, g[1], g[2], g[3] - 1.0))
    # prefer Re z <= 0, then rep closest to the identity, then a fixed
    # lexicographic order on the deck word
    return (re > _BOUNDARY_TOL, round(frob_dist, 9), delta)


def _canonicalize(g, delta):
    """Deterministic tie-break on the domain boundary (|z| = 1 or |Re z| = 1/2).

    Interior points pass through unchanged; on the boundary the finite set of
    short deck moves (and the overall sign) is searched for the preferred
    representative."""
    ip, n2 = _z_parts(g)
    a, _, c, _ = g
    n1 = a * a + c * c
    re = ip / n2
    on_circle = abs(n1 - n2) <= _BOUNDARY_TOL * n2
    on_strip = abs(abs(re) - 0.5) <= _BOUNDARY_TOL
    if not (on_circle or on_strip):
        if g[0] * delta[0] < 0 or (g[0] == 0 and g[1] * delta[1] < 0):
            pass
        return g, delta
    best = None
    for mv in _boundary_moves():
        cand_g = _mul(g, tuple(float(x) for x in mv))
        cand_d = _mul(delta, mv)
        if not _in_domain(cand_g):
            continue
        for sign in (1, -1):
            gg = tuple(sign * x for x in cand_g)
            dd = tuple(sign * x for x in cand_d)
            key = _canonical_key(gg, dd)
            if best is None or key < best[0]:
                best = (key, gg, dd)
    if best is None:
        return g, delta
    return best[1], best[2]


class ModularPoint:
    """A reduced point of SL(2,R)/SL(2,Z) with exact deck bookkeeping.

    ``rep`` is the reduced representative, ``deck`` the integer element with
    ``rep @ deck`` equal to the matrix the point was constructed from.
    """

    __slots__ = ("_rep", "_deck")

    def __init__(self, rep: tuple, deck: tuple):
        self._rep = rep
        self._deck = deck

    @property
    def rep(self) -> RealGroupElement:
        a, b, c, d = self._rep
        return RealGroupElement(np.array([[a, b], [c, d]]))

    @property
    def rep_tuple(self) -> tuple:
        return self._rep

    @property
    def deck(self) -> IntegerGroupElement:
        a, b, c, d = self._deck
        return IntegerGroupElement(((a, b), (c, d)))

    @property
    def z(self) -> complex:
        ip, n2 = _z_parts(self._rep)
        return complex(ip / n2, 1.0 / n2)

    @property
    def depth(self) -> float:
        return max(0.0, 0.5 * math.log(self.z.imag))

    def is_thick(self, cutoff: float = THICK_DEPTH) -> bool:
        return self.depth <= cutoff

    def basis(self) -> np.ndarray:
        a, b, c, d = self._rep
        return np.array([[a, b], [c, d]])

    def __repr__(self) -> str:
        return f"ModularPoint(z={self.z:.6g}, depth={self.depth:.4f})"


def _as_tuple2(g) -> tuple:
    if isinstance(g, ModularPoint):
        return g.rep_tuple
    if isinstance(g, tuple) and len(g) == 4:
        return tuple(float(v) for v in g)
    if isinstance(g, RealGroupElement):
        m = g.mat
    elif isinstance(g, IntegerGroupElement):
        m = g.as_array()
    else:
        m = np.asarray(g, dtype=float)
    if m.shape != (2, 2):
        raise ReduceError(f"expected a 2x2 matrix, got {m.shape}")
    return (float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1]))


def reduce(g) -> ModularPoint:
    """Reduce g to the fundamental domain.

    Returns a ModularPoint holding the reduced representative ``rep`` and the
    deck element gamma with ``g @ gamma^{-1} = rep`` (so rep . deck = g).
    """
    gt = _as_tuple2(g)
    det = gt[0] * gt[3] - gt[1] * gt[2]
    if not math.isfinite(det) or det <= 0:
        raise ReduceError(f"determinant {det} not positive")
    s = 1.0 / math.sqrt(det)
    gt = tuple(x * s for x in gt)
    rep, delta, _ = _reduce_tuple(gt)
    rep, delta = _canonicalize(rep, delta)
    deck = _inv_int(delta)
    return ModularPoint(rep, deck)


def geodesic_step(h: float) -> tuple:
    e = math.exp(h / 2.0)
    return (e, 0.0, 0.0, 1.0 / e)


def horocycle_step(h: float) -> tuple:
    return (1.0, h, 0.0, 1.0)


@dataclass(frozen=True)
class OrbitSegment:
    """A sampled flow trajectory with per-step deck increments.

    ``times`` are the sample times (strictly increasing, starting at 0),
    ``depths`` the sampled cusp depths, ``increments[i]`` the deck increment
    picked up between samples i-1 and i (``increments[0]`` is the identity).
    """

    start: ModularPoint
    direction: FlowTag
    duration: float
    step: float
    times: np.ndarray
    depths: np.ndarray
    increments: tuple
    end: ModularPoint

    @property
    def length(self) -> float:
        return self.duration

    @property
    def max_depth(self) -> float:
        return float(np.max(self.depths))

    def total_deck(self) -> tuple:
        total = _IDENT
        for inc in self.increments:
            total = _mul(inc, total)
        return total

    def __len__(self) -> int:
        return len(self.times)


def flow_orbit(x: ModularPoint, direction: FlowTag, t: float, h: float) -> OrbitSegment:
    """Sample the orbit of x under the chosen flow at step h, re-reducing at
    every step and recording depth and the exact deck increments."""
    if t <= 0:
        raise ValueError("flow duration must be positive")
    if not (0 < h <= 0.1):
        raise ValueError("step must satisfy 0 < h <= 0.1")
    n = max(1, int(round(t / h)))
    h_eff = t / n
    if direction == "geodesic":
        stepm = geodesic_step(h_eff)
    elif direction == "horocycle":
        stepm = horocycle_step(h_eff)
    else:
        raise ValueError(f"unknown flow direction {direction!r}")

    cur = x.rep_tuple
    times = np.empty(n + 1)
    depths = np.empty(n + 1)
    incs = [_IDENT]
    times[0] = 0.0
    depths[0] = x.depth
    for i in range(1, n + 1):
        moved = _mul(stepm, cur)
        rep, delta, _ = _reduce_tuple(moved)
        rep, delta = _canonicalize(rep, delta)
        cur = rep
        times[i] = i * h_eff
        _, n2 = _z_parts(rep)
        depths[i] = max(0.0, -0.5 * math.log(n2))
        incs.append(_inv_int(delta))
    times.setflags(write=False)
    depths.setflags(write=False)
    end = ModularPoint(cur, _IDENT)
    return OrbitSegment(
        start=x,
        direction=direction,
        duration=n * h_eff,
        step=h_eff,
        times=times,
        depths=depths,
        increments=tuple(incs),
        end=end,
    )


def return_cocycle(g, x: ModularPoint) -> IntegerGroupElement:
    """beta(g, x): the deck element with g . rep(x) . beta^{-1} reduced."""
    gt = _as_tuple2(g)
    moved = _mul(gt, x.rep_tuple)
    return reduce(moved).deck


@dataclass(frozen=True)
class SubSegment:
    """A contiguous index range [i0, i1] of an OrbitSegment's samples."""

    parent: OrbitSegment
    i0: int
    i1: int
    kind: Literal["thick", "cusp"]

    @property
    def duration(self) -> float:
        return float(self.parent.times[self.i1] - self.parent.times[self.i0])

    @property
    def max_depth(self) -> float:
        return float(np.max(self.parent.depths[self.i0 : self.i1 + 1]))

    def increments(self) -> tuple:
        return self.parent.increments[self.i0 + 1 : self.i1 + 1]


@dataclass(frozen=True)
class ExcursionDecomposition:
    alphas: tuple
    omegas: tuple
    threshold: float

    def all_segments(self) -> list:
        return sorted(self.alphas + self.omegas, key=lambda s: s.i0)


def decompose_excursions(seg: OrbitSegment, threshold: float) -> ExcursionDecomposition:
    """Split an orbit into maximal cusp excursions above `threshold` (omegas)
    and the complementary thick pieces (alphas).  Adjacent pieces share their
    boundary sample, so durations add up to the total duration exactly."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    speed = 0.5 if seg.direction == "geodesic" else 1.0
    if threshold < seg.step * speed:
        raise ValueError(
            f"threshold {threshold} below sampling noise floor {seg.step * speed}"
        )
    deep = seg.depths > threshold
    n = len(seg.times) - 1
    alphas, omegas = [], []
    i = 0
    while i <= n:
        if deep[i]:
            j = i
            while j <= n and deep[j]:
                j += 1
            i0 = max(0, i - 1)
            i1 = min(n, j)
            omegas.append(SubSegment(seg, i0, i1, "cusp"))
            i = j
        else:
            j = i
            while j <= n and not deep[j]:
                j += 1
            i0 = max(0, i - 1) if (alphas or omegas) else 0
            i1 = min(n, j - 1) if j <= n else n
            # extend to the entry sample of the following excursion
            alphas.append(SubSegment(seg, i0, i1, "thick"))
            i = j
    # stitch: ensure consecutive pieces share endpoints
    pieces = sorted(alphas + omegas, key=lambda s: s.i0)
    fixed = []
    prev_end = 0
    for p in pieces:
        i0 = prev_end
        fixed.append(SubSegment(seg, i0, p.i1, p.kind))
        prev_end = p.i1
    alphas = tuple(p for p in fixed if p.kind == "thick")
    omegas = tuple(p for p in fixed if p.kind == "cusp")
    return ExcursionDecomposition(alphas=alphas, omegas=omegas, threshold=threshold)


def _parabolic_data(minc):
    """For an integer 2x2 m = +-(I + k N0) with N0 primitive nilpotent, return
    (N0, signed exponent k); None if m is not of that form."""
    a, b, c, d = minc
    tr = a + d
    if tr == 2:
        sign = 1
    elif tr == -2:
        sign = -1
    else:
        return None
    na, nb, nc, nd = a - sign, b, c, d - sign
    if (na, nb, nc, nd) == (0, 0, 0, 0):
        return ((0, 0, 0, 0), 0)
    # nilpotency: N^2 = 0 <=> trace 0 and det 0
    if na + nd != 0 or na * nd - nb * nc != 0:
        return None
    g = math.gcd(math.gcd(abs(na), abs(nb)), math.gcd(abs(nc), abs(nd)))
    n0 = (na // g, nb // g, nc // g, nd // g)
    for v in n0:
        if v != 0:
            if v < 0:
                n0 = tuple(-x for x in n0)
                g = -g
            break
    return (n0, g)


@dataclass(frozen=True)
class DeckClassVerdict:
    is_parabolic_class: bool
    parabolic: Optional[IntegerGroupElement]
    exponents: tuple


def excursion_deck_class(omega: SubSegment) -> DeckClassVerdict:
    """Check that every deck increment of a cusp excursion is +- a power of a
    single parabolic element; return that parabolic and the exponent run."""
    base = None
    exponents = []
    for inc in omega.increments():
        data = _parabolic_data(inc)
        if data is None:
            return DeckClassVerdict(False, None, tuple(exponents))
        n0, k = data
        if k == 0:
            exponents.append(0)
            continue
        if base is None:
            base = n0
        elif n0 != base:
            return DeckClassVerdict(False, None, tuple(exponents))
        exponents.append(k)
    if base is None:
        return DeckClassVerdict(True, None, tuple(exponents))
    para = IntegerGroupElement(((1 + base[0], base[1]), (base[2], 1 + base[3])))
    return DeckClassVerdict(True, para, tuple(exponents))


@dataclass(frozen=True)
class ChiStats:
    chi_max: float
    rows: tuple  # (length, fiber_log_norm, ratio) per segment


def chi_stats(segments: Sequence[OrbitSegment], cocycle, thick_cutoff: float = THICK_DEPTH) -> ChiStats:
    """Per-segment fiberwise growth ratios c(zeta)/l(zeta) and their running
    supremum, the empirical estimator of the maximal thick-to-thick growth
    rate.  `cocycle` must expose segment_log_norm(OrbitSegment) -> float."""
    rows = []
    chi = -math.inf
    for seg in segments:
        if seg.depths[0] > thick_cutoff or seg.depths[-1] > thick_cutoff:
            raise ValueError("chi_stats requires segments with thick endpoints")
        c = float(cocycle.segment_log_norm(seg))
        ratio = c / seg.duration
        rows.append((seg.duration, c, ratio))
        chi = max(chi, ratio)
    return ChiStats(chi_max=chi, rows=tuple(rows))


def _encode_increment(inc) -> tuple:
    """(i, j, k, flag) letter encoding of a deck increment for CSV dumps."""
    if inc == (1, 0, 0, 1):
        return (0, 0, 0, "")
    if inc == (-1, 0, 0, -1):
        return (0, 0, 0, "neg")
    a, b, c, d = inc
    if a == 1 and d == 1 and c == 0:
        return (1, 2, b, "")
    if a == 1 and d == 1 and b == 0:
        return (2, 1, c, "")
    if a == -1 and d == -1 and c == 0:
        return (1, 2, -b, "neg")
    if a == -1 and d == -1 and b == 0:
        return (2, 1, -c, "neg")
    return (0, 0, 0, "word")


def orbit_to_csv(seg: OrbitSegment, path) -> None:
    """Dump an orbit: columns time, depth, deck_i, deck_j, deck_k, flags."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["time", "depth", "deck_i", "deck_j", "deck_k", "flags"])
        for t, dep, inc in zip(seg.times, seg.depths, seg.increments):
            i, j, k, flag = _encode_increment(inc)
            w.writerow([f"{t:.10g}", f"{dep:.10g}", i, j, k, flag])


def count_integer_ball(radius: float, search_margin: float = 1.5) -> dict:
    """|T_k| = |B_k(Id) cap SL(2,Z)| for k <= radius, by breadth-first closure
    over the generators {S, T, T^{-1}} with a norm cutoff.

    Returns {k: count} for integer k in 1..floor(radius).  The symmetric-space
    distance of an SL(2) matrix is 2 log sigma_max, so elements are kept while
    sigma_max <= search_margin * e^{radius/2}; the margin leaves room for BFS
    paths that overshoot the ball before coming back (continued-fraction paths
    stay within a small constant factor of the endpoint norm).
    """
    cap = search_margin * math.exp(radius / 2.0)
    cap2 = cap * cap
    qcap = cap2 + 1.0 / cap2  # sigma_max^2 <= cap2  <=>  q <= cap2 + 1/cap2
    gens = [(0, -1, 1, 0), (0, 1, -1, 0), (1, 1, 0, 1), (1, -1, 0, 1)]
    seen = {(1, 0, 0, 1)}
    frontier = [(1, 0, 0, 1)]
    while frontier:
        nxt = []
        for g in frontier:
            for e in gens:
                h = _mul(g, e)
                if h in seen:
                    continue
                a, b, c, d = h
                if a * a + b * b + c * c + d * d > qcap:
                    continue
                seen.add(h)
                nxt.append(h)
        frontier = nxt
    dists = []
    for a, b, c, d in seen:
        q = a * a + b * b + c * c + d * d
        smax2 = (q + math.sqrt(max(0.0, float(q) * q - 4.0))) / 2.0
        dists.append(math.log(smax2))  # = 2 log sigma_max
    dists = np.sort(np.array(dists))
    counts = {}
    for k in range(1, int(math.floor(radius)) + 1):
        counts[k] = int(np.searchsorted(dists, k + 1e-12, side="right"))
    return counts
