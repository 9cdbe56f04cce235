"""Finite probabilistic metric spaces under the strong topology.

Ground sets are finite, so every "for all t > 0" predicate reduces to a finite
t-grid: membership of ``y`` in the strong neighborhood of ``x`` is monotone in
``t`` and changes only at the values ``d_L(F_xy, eps_0)``.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Hashable, Iterable, Mapping

from ._num import as_ext
from .distfn import EPS0, StepDistFn, distance_to_eps0, pointwise_leq
from .triangle import TriangleFn


class AxiomError(ValueError):
    def __init__(self, report: AxiomReport):
        super().__init__(report.detail)
        self.report = report


@dataclass(frozen=True)
class AxiomReport:
    ok: bool
    axiom: int | None = None
    witness: tuple | None = None
    detail: str = "all axioms hold"

    def to_json(self) -> dict:
        return {"ok": self.ok, "axiom": self.axiom,
                "witness": list(self.witness) if self.witness is not None else None,
                "detail": self.detail}


@dataclass(frozen=True, eq=False)
class PMSpace:
    """Finite PM space ``(X, F, tau)``.

    ``dist`` may omit the diagonal (filled with ``eps_0``) and one orientation of
    each pair (filled symmetrically). The constructor does not check the Menger
    axioms; use :func:`verify_axioms` or one of the ``build_*`` helpers.
    """

    points: tuple
    dist: Mapping[tuple, StepDistFn]
    tau: TriangleFn

    def __post_init__(self):
        pts = tuple(self.points)
        if not pts:
            raise ValueError("a PM space needs at least one point")
        if len(set(pts)) != len(pts):
            raise ValueError("point labels must be distinct")
        table = {}
        for (p, q), f in self.dist.items():
            if p not in pts or q not in pts:
                raise KeyError(f"unknown point in pair {(p, q)!r}")
            table[(p, q)] = f
        for p in pts:
            table.setdefault((p, p), EPS0)
        for p, q in itertools.permutations(pts, 2):
            if (p, q) not in table:
                if (q, p) not in table:
                    raise ValueError(f"no distance distribution given for {(p, q)!r}")
                table[(p, q)] = table[(q, p)]
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dist", table)
        object.__setattr__(self, "_index", {p: i for i, p in enumerate(pts)})

    def F(self, p, q) -> StepDistFn:
        return self.dist[(p, q)]

    def index(self, p) -> int:
        try:
            return self._index[p]
        except KeyError:
            raise KeyError(f"unknown point {p!r}") from None

    def __contains__(self, p) -> bool:
        return p in self._index

    def __len__(self) -> int:
        return len(self.points)

    @cached_property
    def dist0(self) -> dict:
        """Exact ``d_L(F_xy, eps_0)`` for every ordered pair."""
        return {pq: distance_to_eps0(f) for pq, f in self.dist.items()}

    @cached_property
    def t_star(self) -> Fraction:
        """Smallest off-diagonal ``d_L(F_xy, eps_0)``; 1 for a one-point space."""
        off = [d for (p, q), d in self.dist0.items() if p != q]
        return min(off) if off else Fraction(1)

    def t_grid(self) -> tuple[Fraction, ...]:
        return t_grid(self)

    def near(self, p, q, t) -> bool:
        """``F_pq(t) > 1 - t``."""
        t = as_ext(t)
        return self.F(p, q)(t) > 1 - t

    def to_json(self) -> dict:
        pairs = []
        for p, q in itertools.combinations(self.points, 2):
            pairs.append([p, q, self.F(p, q).to_json()])
            if self.F(q, p) != self.F(p, q):
                pairs.append([q, p, self.F(q, p).to_json()])
        return {"points": list(self.points), "tau": self.tau.name, "dist": pairs}

    @classmethod
    def from_json(cls, obj: dict) -> PMSpace:
        points = tuple(obj["points"])
        dist = {}
        for p, q, f in obj.get("dist", []):
            dist[(p, q)] = StepDistFn.from_json(f)
        return cls(points, dist, TriangleFn.named(obj.get("tau", "min")))

    @classmethod
    def load(cls, path) -> PMSpace:
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


@dataclass(frozen=True)
class Vicinity:
    r: Fraction
    pairs: frozenset = field(default_factory=frozenset)

    def __contains__(self, pair) -> bool:
        return tuple(pair) in self.pairs

    def compose(self, other: Vicinity) -> frozenset:
        """``{(x, z) : (x, y) in self and (y, z) in other for some y}``."""
        succ: dict = {}
        for y, z in other.pairs:
            succ.setdefault(y, set()).add(z)
        return frozenset((x, z) for x, y in self.pairs for z in succ.get(y, ()))


# --------------------------------------------------------------------------
# construction


def verify_axioms(space: PMSpace) -> AxiomReport:
    """Exhaustive check of the four Menger conditions (axiom 0 is D+ membership)."""
    pts = space.points
    for p, q in itertools.product(pts, repeat=2):
        if not space.F(p, q).in_dplus:
            return AxiomReport(False, 0, (p, q), f"F({p!r},{q!r}) is not in D+")
    for p in pts:
        if space.F(p, p) != EPS0:
            return AxiomReport(False, 1, (p, p), f"F({p!r},{p!r}) differs from eps_0")
    for p, q in itertools.permutations(pts, 2):
        if space.F(p, q) == EPS0:
            return AxiomReport(False, 2, (p, q), f"F({p!r},{q!r}) = eps_0 for distinct points")
    for p, q in itertools.combinations(pts, 2):
        if space.F(p, q) != space.F(q, p):
            return AxiomReport(False, 3, (p, q), f"F({p!r},{q!r}) != F({q!r},{p!r})")
    memo: dict = {}
    for x, y, z in itertools.product(pts, repeat=3):
        key = (space.F(x, y), space.F(y, z))
        if key not in memo:
            memo[key] = space.tau(*key)
        if not pointwise_leq(space.F(x, z), memo[key]):
            return AxiomReport(False, 4, (x, y, z),
                               f"F({x!r},{z!r}) is not >= tau(F({x!r},{y!r}), F({y!r},{z!r}))")
    return AxiomReport(True)


def _checked(space: PMSpace) -> PMSpace:
    report = verify_axioms(space)
    if not report.ok:
        raise AxiomError(report)
    return space


def build_equilateral(points: Iterable[Hashable], F0: StepDistFn, tau: TriangleFn) -> PMSpace:
    """Every pair of distinct points gets the same distance distribution ``F0``."""
    pts = tuple(points)
    if not pts:
        raise ValueError("need at least one point")
    dist = {(p, q): F0 for p, q in itertools.combinations(pts, 2)}
    return _checked(PMSpace(pts, dist, tau))


def build_simple(points: Iterable[Hashable], rho, G: StepDistFn, tau: TriangleFn) -> PMSpace:
    """Simple space generated by an ordinary metric: ``F_pq(x) = G(x / rho(p, q))``.

    ``rho`` is a mapping on pairs (either orientation), a square matrix, or a
    callable. Step functions scale exactly, so no discretization is needed.
    """
    pts = tuple(points)
    if G == EPS0 or not G.in_dplus:
        raise ValueError("G must be a distance distribution function other than eps_0")
    d = _metric_table(pts, rho)
    dist = {(p, q): G.scaled(d[(p, q)]) for p, q in itertools.combinations(pts, 2)}
    return _checked(PMSpace(pts, dist, tau))


def _metric_table(pts, rho) -> dict:
    if callable(rho):
        get = rho
    elif isinstance(rho, Mapping):
        def get(p, q):
            return rho[(p, q)] if (p, q) in rho else rho[(q, p)]
    else:
        idx = {p: i for i, p in enumerate(pts)}

        def get(p, q):
            return rho[idx[p]][idx[q]]
    d = {}
    for p, q in itertools.product(pts, repeat=2):
        d[(p, q)] = Fraction(0) if p == q else as_ext(get(p, q))
    for p, q in itertools.permutations(pts, 2):
        if not d[(p, q)] > 0:
            raise ValueError(f"metric must be positive off the diagonal: rho{(p, q)!r} = {d[(p, q)]}")
        if d[(p, q)] != d[(q, p)]:
            raise ValueError(f"metric must be symmetric at {(p, q)!r}")
    for x, y, z in itertools.permutations(pts, 3):
        if d[(x, z)] > d[(x, y)] + d[(y, z)]:
            raise ValueError(f"triangle inequality fails for {(x, y, z)!r}")
    return d


# --------------------------------------------------------------------------
# strong topology


def t_grid(space: PMSpace) -> tuple[Fraction, ...]:
    """``t*/2, t*, 2t*, 4t*, ...`` up to 2."""
    ts = space.t_star
    grid = [ts / 2, ts]
    t = ts * 2
    while t < 2:
        grid.append(t)
        t *= 2
    grid.append(Fraction(2))
    return tuple(grid)


def strong_neighborhood(space: PMSpace, x, r) -> frozenset:
    """``{y : F_xy(r) > 1 - r}``."""
    space.index(x)
    r = as_ext(r)
    if not r > 0:
        raise ValueError("r must be positive")
    return frozenset(y for y in space.points if space.near(x, y, r))


def strong_closure(space: PMSpace, A: Iterable) -> frozenset:
    A = frozenset(A)
    if not A:
        raise ValueError("closure of the empty set is not defined here")
    for a in A:
        space.index(a)
    grid = (space.t_star,) + t_grid(space)
    return frozenset(
        a for a in space.points
        if all(any(space.near(a, b, t) for b in A) for t in grid)
    )


def vicinity(space: PMSpace, r) -> Vicinity:
    r = as_ext(r)
    if not r > 0:
        raise ValueError("r must be positive")
    pairs = frozenset((x, y) for x, y in itertools.product(space.points, repeat=2) if space.near(x, y, r))
    return Vicinity(r, pairs)


def find_eta(space: PMSpace, r, grid: Iterable | None = None) -> Fraction | None:
    """Largest grid value ``eta`` with ``V(eta) o V(eta)`` inside ``V(r)``.

    The default grid halves ``r`` down to below ``t*/4``; any ``eta < t*`` makes
    ``V(eta)`` the diagonal, so it always succeeds on a finite space.
    """
    r = as_ext(r)
    target = vicinity(space, r).pairs
    if grid is None:
        grid = []
        eta = r
        while eta >= space.t_star / 4:
            grid.append(eta)
            eta /= 2
        grid.append(eta)
    for eta in sorted((as_ext(g) for g in grid), reverse=True):
        V = vicinity(space, eta)
        if V.compose(V) <= target:
            return eta
    return None
