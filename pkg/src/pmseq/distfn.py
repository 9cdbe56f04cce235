"""Step distribution functions and the modified Levy metric.

A :class:`StepDistFn` is a left-continuous, nondecreasing step function on the
extended real line with value 0 at -inf and 1 at +inf. Jump locations and
values are kept as exact fractions, so evaluation and order comparisons are
exact; only the Levy distance (computed by bisection) is reported as a float
together with the half-width of its final bracket.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from ._num import INF, NEG_INF, Ext, as_ext, as_unit, encode

MAX_TOL = 1e-6
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class StepDistFn:
    """Left-continuous step distribution function.

    ``jumps`` holds ``(location, value_after)`` pairs with strictly increasing
    locations and strictly increasing values. ``f(x)`` is the value of the last
    jump located strictly below ``x``. Jumps at ``+inf`` are dropped on
    construction (``f(inf) = 1`` regardless), which makes the representation
    canonical: two functions are equal iff their ``jumps`` tuples are.

    ``distance=True`` declares membership in D+ (support in ``[0, inf]``) and
    is validated.
    """

    jumps: tuple[tuple[Ext, Fraction], ...] = ()
    distance: bool = field(default=False, compare=False)

    def __post_init__(self):
        canon = []
        prev_loc = None
        prev_val = Fraction(0)
        for loc, val in self.jumps:
            loc, val = as_ext(loc), as_unit(val)
            if prev_loc is not None and not loc > prev_loc:
                raise ValueError(f"jump locations must strictly increase: {prev_loc} then {loc}")
            if val < prev_val:
                raise ValueError(f"values must be nondecreasing: {prev_val} then {val}")
            prev_loc = loc
            if loc == INF or val == prev_val:
                continue
            canon.append((loc, val))
            prev_val = val
        object.__setattr__(self, "jumps", tuple(canon))
        if self.distance and not self.in_dplus:
            raise ValueError("distance distribution functions need support in [0, inf]")
        object.__setattr__(self, "_locs", tuple(loc for loc, _ in canon))

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence], distance: bool = False) -> StepDistFn:
        return cls(tuple((p[0], p[1]) for p in pairs), distance=distance)

    @property
    def in_dplus(self) -> bool:
        return all(loc >= 0 for loc, _ in self.jumps)

    @property
    def locations(self) -> tuple[Ext, ...]:
        return self._locs

    def __call__(self, x) -> Fraction:
        x = as_ext(x)
        if x == NEG_INF:
            return Fraction(0)
        if x == INF:
            return Fraction(1)
        i = bisect.bisect_left(self._locs, x)
        return self.jumps[i - 1][1] if i else Fraction(0)

    def scaled(self, factor) -> StepDistFn:
        """``x -> f(x / factor)`` for a positive factor."""
        factor = as_ext(factor)
        if not 0 < factor < INF:
            raise ValueError("scale factor must be positive and finite")
        return StepDistFn(tuple((loc * factor, v) for loc, v in self.jumps), distance=self.distance)

    def to_json(self) -> dict:
        return {"jumps": [[encode(l), encode(v)] for l, v in self.jumps], "distance": self.distance}

    @classmethod
    def from_json(cls, obj: dict) -> StepDistFn:
        return cls.from_pairs(obj.get("jumps", []), distance=bool(obj.get("distance", False)))

    def __repr__(self) -> str:
        body = ", ".join(f"({encode(l)}, {encode(v)})" for l, v in self.jumps)
        return f"StepDistFn([{body}]{', distance' if self.distance else ''})"


def unit_step(q) -> StepDistFn:
    """The unit step at ``q``: 0 up to and including ``q``, 1 after it."""
    q = as_ext(q)
    if q == INF:
        return StepDistFn((), distance=True)
    return StepDistFn(((q, 1),), distance=q >= 0)


EPS0 = unit_step(0)


def evaluate(f: StepDistFn, x) -> Fraction:
    return f(x)


def _probe_points(fs: Sequence[StepDistFn]) -> list[Ext]:
    """One point in every maximal interval where all of ``fs`` are constant."""
    locs = sorted({l for f in fs for l in f.locations if l != NEG_INF})
    if not locs:
        return [Fraction(0)]
    pts = [locs[0] - 1]
    pts.extend((a + b) / 2 for a, b in zip(locs, locs[1:]))
    pts.append(locs[-1] + 1)
    return pts


def pointwise_leq(f: StepDistFn, g: StepDistFn, tol=0) -> bool:
    """Truth of ``g <= f`` everywhere on the extended line.

    Both functions are left-continuous, so comparing one interior point of each
    piece of the merged jump grid decides the question exactly.
    """
    return all(g(x) <= f(x) + tol for x in _probe_points((f, g)))


def pointwise_max(f: StepDistFn, g: StepDistFn) -> StepDistFn:
    return _combine(f, g, max)


def pointwise_min(f: StepDistFn, g: StepDistFn) -> StepDistFn:
    return _combine(f, g, min)


def _combine(f, g, op) -> StepDistFn:
    locs = sorted(set(f.locations) | set(g.locations))
    jumps = []
    for i, loc in enumerate(locs):
        # value just right of loc
        right = locs[i + 1] if i + 1 < len(locs) else None
        if loc == NEG_INF:
            probe = (right - 1) if right is not None else Fraction(0)
        elif right is None:
            probe = loc + 1
        else:
            probe = (loc + right) / 2
        jumps.append((loc, op(f(probe), g(probe))))
    return StepDistFn(tuple(jumps), distance=f.distance and g.distance)


# --------------------------------------------------------------------------
# Levy distance


@dataclass(frozen=True)
class LevyDistance:
    value: float
    tolerance: float

    def __float__(self) -> float:
        return self.value


def _half_dominated(f: StepDistFn, g: StepDistFn, w: Fraction) -> bool:
    """``f(x-w) - w <= g(x) <= f(x+w) + w`` for every ``x`` in ``(-1/w, 1/w)``."""
    lo, hi = -1 / w, 1 / w
    cuts = {lo, hi}
    for a in g.locations:
        if a != NEG_INF and lo < a < hi:
            cuts.add(a)
    for a in f.locations:
        if a == NEG_INF:
            continue
        for b in (a + w, a - w):
            if lo < b < hi:
                cuts.add(b)
    cuts = sorted(cuts)
    # every map below is left-continuous in x, so interior points of the pieces suffice
    for a, b in zip(cuts, cuts[1:]):
        x = (a + b) / 2
        gx = g(x)
        if f(x - w) - w > gx or gx > f(x + w) + w:
            return False
    return True


def levy_feasible(f: StepDistFn, g: StepDistFn, w) -> bool:
    """Whether ``w`` satisfies both Levy inequalities for ``(f, g)``."""
    w = as_ext(w)
    if not 0 < w <= 1:
        raise ValueError("w must lie in (0, 1]")
    return _half_dominated(f, g, w) and _half_dominated(g, f, w)


def levy_distance(f: StepDistFn, g: StepDistFn, tol: float = DEFAULT_TOL) -> LevyDistance:
    """Modified Levy distance by bisection on ``w``.

    The feasibility predicate is monotone in ``w`` and always holds at ``w = 1``,
    so the infimum lies in ``[0, 1]``. Returns the midpoint of the final bracket.
    """
    if not (isinstance(tol, (int, float, Fraction)) and 0 < tol <= MAX_TOL):
        raise ValueError(f"tol must lie in (0, {MAX_TOL}], got {tol!r}")
    if f.jumps == g.jumps:
        return LevyDistance(0.0, 0.0)
    lo, hi = Fraction(0), Fraction(1)
    tol = Fraction(tol)
    while (hi - lo) / 2 > tol:
        mid = (lo + hi) / 2
        if levy_feasible(f, g, mid):
            hi = mid
        else:
            lo = mid
    return LevyDistance(float((lo + hi) / 2), float((hi - lo) / 2))


def distance_to_eps0(h: StepDistFn) -> Fraction:
    """Exact ``d_L(h, eps_0)`` for ``h`` in D+, as ``inf{t : h(t) > 1 - t}`` capped at 1.

    On the piece ``(a_i, a_{i+1}]`` where ``h = p_i`` the condition holds for
    ``t > max(a_i, 1 - p_i)``.
    """
    if not h.in_dplus:
        raise ValueError("distance_to_eps0 needs a distance distribution function")
    best = Fraction(1)
    locs = h.locations
    for i, (a, p) in enumerate(h.jumps):
        c = max(a, 1 - p)
        nxt = locs[i + 1] if i + 1 < len(locs) else INF
        if c < nxt and c < best:
            best = c
    return best


def near_eps0(h: StepDistFn, t) -> bool:
    """``h(t) > 1 - t``; equivalently ``d_L(h, eps_0) < t``."""
    if not h.in_dplus:
        raise ValueError("near_eps0 needs a distance distribution function")
    t = as_ext(t)
    if not t > 0:
        raise ValueError("t must be positive")
    return h(t) > 1 - t


def random_dplus(rng: random.Random, max_jumps: int = 4, denom: int = 20, span: int = 3,
                 defective: float = 0.1) -> StepDistFn:
    """Random member of D+ with rational jumps on ``[0, span]``.

    With probability ``defective`` the last value stays below 1 (mass at +inf).
    """
    k = rng.randint(1, max_jumps)
    locs = sorted(rng.sample(range(0, span * denom + 1), k))
    vals = sorted(rng.sample(range(1, denom + 1), k))
    if rng.random() >= defective:
        vals[-1] = denom
    return StepDistFn(tuple((Fraction(l, denom), Fraction(v, denom)) for l, v in zip(locs, vals)),
                      distance=True)


__all__ = [
    "DEFAULT_TOL",
    "EPS0",
    "LevyDistance",
    "MAX_TOL",
    "StepDistFn",
    "distance_to_eps0",
    "evaluate",
    "levy_distance",
    "levy_feasible",
    "near_eps0",
    "pointwise_leq",
    "pointwise_max",
    "pointwise_min",
    "random_dplus",
    "unit_step",
]