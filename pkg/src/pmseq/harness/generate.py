"""Seeded generators for PM spaces, null and non-null index sets, and planted sequences."""

from __future__ import annotations

import random
from dataclasses import dataclass

from ..analysis import Pattern, SymbolicSequence
from ..density import (
    AP,
    CEIL_SQRT,
    DEFAULT_EPS,
    DEFAULT_HORIZON,
    EMPTY,
    Finite,
    LambdaSeq,
    Powers,
    SetDescription,
    Squares,
    Union,
    Windows,
    as_lambda,
    set_from_json,
)
from ..distfn import EPS0, StepDistFn, distance_to_eps0, random_dplus
from ..pmspace import PMSpace, build_equilateral, build_simple
from ..triangle import TAU_LUK, TAU_MIN, TAU_PROD, TriangleFn

TAUS = (TAU_MIN, TAU_PROD, TAU_LUK)
LAMBDA_NAMES = ("identity", "ceil-sqrt", "half")


def labels(n: int) -> tuple[str, ...]:
    return tuple(f"p{i}" for i in range(n))


def random_distance_fn(rng: random.Random) -> StepDistFn:
    """Random member of D+ other than ``eps_0``."""
    while True:
        f = random_dplus(rng, max_jumps=3, denom=10, span=2)
        if f != EPS0 and distance_to_eps0(f) > 0:
            return f


def random_equilateral(rng: random.Random, n: int, tau: TriangleFn | None = None) -> PMSpace:
    """Equilateral spaces are Menger spaces for every t-norm below min."""
    return build_equilateral(labels(n), random_distance_fn(rng), tau or rng.choice(TAUS))


def random_simple(rng: random.Random, n: int) -> PMSpace:
    """Simple space over distinct integer points on a line, under ``tau_min``."""
    coords = rng.sample(range(0, 3 * n + 1), n)
    G = random_distance_fn(rng)
    return build_simple(labels(n), lambda p, q: abs(coords[int(p[1:])] - coords[int(q[1:])]), G, TAU_MIN)


def random_space(rng: random.Random, min_points: int = 2, max_points: int = 5) -> PMSpace:
    n = rng.randint(min_points, max_points)
    return random_equilateral(rng, n) if rng.random() < 0.5 else random_simple(rng, n)


def random_lambda(rng: random.Random) -> LambdaSeq:
    return as_lambda(rng.choice(LAMBDA_NAMES))


def random_null_set(rng: random.Random, lam: LambdaSeq) -> SetDescription:
    """A set that is lambda-null for the given ``lam``.

    Finite sets, squares and powers are null for every lambda in Delta-infinity;
    the ceil-sqrt windows around powers of 4 are null for the other families only.
    """
    kinds = ["finite", "squares", "powers", "union"]
    if lam != CEIL_SQRT:
        kinds.append("windows")
    kind = rng.choice(kinds)
    if kind == "finite":
        return Finite(tuple(rng.sample(range(1, 200), rng.randint(1, 8))))
    if kind == "squares":
        return Squares()
    if kind == "powers":
        return Powers(rng.choice((2, 3, 5)))
    if kind == "windows":
        return Windows(CEIL_SQRT, 4)
    return Union((Squares(), Powers(rng.choice((2, 3))), Finite(tuple(rng.sample(range(1, 100), 3)))))


def random_nonnull_set(rng: random.Random) -> SetDescription:
    """A set of positive density for every lambda: an AP with step <= 5."""
    d = rng.randint(1, 5)
    return AP(rng.randint(1, d), d)


def random_values(rng: random.Random, pool, length: int | None = None) -> Pattern:
    pool = list(pool)
    k = length or rng.randint(1, 3)
    return Pattern(tuple(rng.choice(pool) for _ in range(k)))


@dataclass(frozen=True)
class PlantSpec:
    """Recipe for a planted sequence.

    ``space`` is a :class:`PMSpace`, a PM-space JSON object, or
    ``{"kind": "random", "points": n}`` (drawn from ``seed``). With a ``limit``
    the sequence equals the limit off ``exceptions``; without one, ``base`` is
    the periodic pattern off the exceptions. ``exception_values`` is a label
    pattern or ``"random:<len>"``.
    """

    space: object
    limit: str | None
    exceptions: SetDescription = EMPTY
    exception_values: tuple | str = ()
    base: tuple = ()
    lam: str = "identity"
    horizon: int = DEFAULT_HORIZON
    eps: float = DEFAULT_EPS
    seed: int = 0

    def __post_init__(self):
        if self.horizon < 1000:
            raise ValueError("horizon must be >= 1000")
        if not 0 < self.eps <= 0.1:
            raise ValueError("eps must lie in (0, 0.1]")
        if isinstance(self.exceptions, dict):
            object.__setattr__(self, "exceptions", set_from_json(self.exceptions))

    @property
    def lambda_seq(self) -> LambdaSeq:
        return as_lambda(self.lam)

    @classmethod
    def from_json(cls, obj: dict) -> PlantSpec:
        return cls(
            space=obj["space"],
            limit=obj.get("limit"),
            exceptions=set_from_json(obj["exceptions"]) if obj.get("exceptions") else EMPTY,
            exception_values=(obj.get("exception_values") if isinstance(obj.get("exception_values"), str)
                              else tuple(obj.get("exception_values", ()))),
            base=tuple(obj.get("base", ())),
            lam=obj.get("lambda", "identity"),
            horizon=int(obj.get("horizon", DEFAULT_HORIZON)),
            eps=float(obj.get("eps", DEFAULT_EPS)),
            seed=int(obj.get("seed", 0)),
        )


def _space(spec, rng: random.Random) -> PMSpace:
    if isinstance(spec, PMSpace):
        return spec
    if isinstance(spec, dict) and spec.get("kind") == "random":
        n = int(spec.get("points", 3))
        return random_space(rng, n, n)
    return PMSpace.from_json(spec)


def generate(spec: PlantSpec) -> SymbolicSequence:
    """Deterministic sequence from ``spec``; raises ``ValueError`` on an inconsistent spec."""
    rng = random.Random(spec.seed)
    space = _space(spec.space, rng)
    vals = spec.exception_values
    if isinstance(vals, str):
        if not vals.startswith("random:"):
            raise ValueError(f"exception_values must be labels or 'random:<len>', got {vals!r}")
        pool = [p for p in space.points if p != spec.limit]
        if not pool:
            raise ValueError("no label differs from the limit")
        vals = random_values(rng, pool, int(vals.split(":", 1)[1])).cycle
    vals = tuple(vals)
    if spec.exceptions != EMPTY and not vals:
        raise ValueError("exceptions need exception values")
    if spec.limit is not None:
        if spec.limit in vals:
            raise ValueError(f"exception value equals the limit {spec.limit!r}")
        base = Pattern.const(spec.limit)
    else:
        if not spec.base:
            raise ValueError("a spec without a limit needs a base pattern")
        base = Pattern(tuple(spec.base))
    if spec.exceptions == EMPTY:
        return SymbolicSequence(space, base)
    return SymbolicSequence(space, base, spec.exceptions, Pattern(vals))


def planted_convergent(rng: random.Random, space: PMSpace, lam: LambdaSeq) -> tuple[SymbolicSequence, str]:
    """Sequence equal to a random limit off a random lambda-null set."""
    limit = rng.choice(space.points)
    others = [p for p in space.points if p != limit]
    null = random_null_set(rng, lam)
    seq = SymbolicSequence(space, Pattern.const(limit), null, random_values(rng, others))
    return seq, limit


def random_sequence(rng: random.Random, space: PMSpace, lam: LambdaSeq) -> SymbolicSequence:
    """Planted convergent, periodic, or periodic with positive or null overrides."""
    kind = rng.choice(("planted", "periodic", "layered"))
    if kind == "planted":
        return planted_convergent(rng, space, lam)[0]
    base = SymbolicSequence(space, random_values(rng, space.points, rng.randint(1, 4)))
    if kind == "periodic":
        return base
    where = random_nonnull_set(rng) if rng.random() < 0.5 else random_null_set(rng, lam)
    return base.with_override(where, random_values(rng, space.points))


def eventually_constant(rng: random.Random, space: PMSpace) -> tuple[SymbolicSequence, str]:
    y = rng.choice(space.points)
    prefix = tuple(rng.choice(space.points) for _ in range(rng.randint(0, 50)))
    return SymbolicSequence(space, Pattern((y,), prefix)), y


__all__ = [
    "PlantSpec",
    "eventually_constant",
    "generate",
    "planted_convergent",
    "random_distance_fn",
    "random_equilateral",
    "random_lambda",
    "random_nonnull_set",
    "random_null_set",
    "random_sequence",
    "random_simple",
    "random_space",
    "random_values",
]

