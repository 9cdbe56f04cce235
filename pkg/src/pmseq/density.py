"""lambda-density over the natural numbers.

``LambdaSeq`` covers the integer-valued families used throughout the package.
Subsets of N are described symbolically (:class:`SetDescription` and its
subclasses) so that membership is decidable and, for the periodic-modulo-null
fragment, the lambda-density is exact. Everything else falls back to a finite
horizon: counts ``|M n I_n|`` are taken for every ``n`` in the top decade of the
horizon through one prefix-sum array.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache, reduce
from typing import Callable, Iterable

import numpy as np

DEFAULT_HORIZON = 10**6
DEFAULT_EPS = 0.02
MAX_PERIOD = 10**6

FAMILIES = ("identity", "ceil-sqrt", "half", "custom")


class LambdaError(ValueError):
    """A candidate lambda sequence breaks one of the Delta-infinity conditions."""

    def __init__(self, condition: str, n: int, detail: str = ""):
        super().__init__(f"{condition} fails at n={n}" + (f": {detail}" if detail else ""))
        self.condition = condition
        self.n = n


def _isqrt_array(n: np.ndarray) -> np.ndarray:
    r = np.floor(np.sqrt(n.astype(np.float64))).astype(np.int64)
    r -= (r * r > n)
    r += ((r + 1) * (r + 1) <= n)
    return r


@dataclass(frozen=True)
class LambdaSeq:
    """An integer-valued member of Delta-infinity; ``table[i]`` is ``lambda_{i+1}``."""

    family: str
    table: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown lambda family {self.family!r}; expected one of {FAMILIES}")
        if (self.family == "custom") != (self.table is not None):
            raise ValueError("a table is given exactly for the custom family")

    def __call__(self, n: int) -> int:
        if n < 1:
            raise ValueError("lambda is indexed from 1")
        if self.family == "identity":
            return n
        if self.family == "ceil-sqrt":
            return math.isqrt(n - 1) + 1
        if self.family == "half":
            return n // 2 + 1
        if n > len(self.table):
            raise IndexError(f"custom lambda table ends at n={len(self.table)}")
        return self.table[n - 1]

    @property
    def limit(self) -> int | None:
        return len(self.table) if self.table is not None else None

    def values(self, horizon: int) -> np.ndarray:
        """``lambda_n`` for ``n = 0..horizon`` (entry 0 is 0)."""
        return _lambda_values(self, horizon)

    def window(self, n: int) -> tuple[int, int]:
        return window(self, n)

    def to_json(self):
        return self.family if self.table is None else {"family": "custom", "table": list(self.table)}

    def __str__(self) -> str:
        return self.family


@lru_cache(maxsize=16)
def _lambda_values(lam: LambdaSeq, horizon: int) -> np.ndarray:
    n = np.arange(horizon + 1, dtype=np.int64)
    if lam.family == "identity":
        out = n.copy()
    elif lam.family == "ceil-sqrt":
        out = _isqrt_array(np.maximum(n - 1, 0)) + 1
    elif lam.family == "half":
        out = n // 2 + 1
    else:
        if horizon > len(lam.table):
            raise IndexError(f"custom lambda table ends at n={len(lam.table)}, need {horizon}")
        out = np.concatenate([[0], np.asarray(lam.table[:horizon], dtype=np.int64)])
    out[0] = 0
    out.setflags(write=False)
    return out


IDENTITY = LambdaSeq("identity")
CEIL_SQRT = LambdaSeq("ceil-sqrt")
HALF = LambdaSeq("half")


def validate_lambda(spec, horizon: int = DEFAULT_HORIZON) -> LambdaSeq:
    """Build a ``LambdaSeq`` and check lambda_1 = 1, monotonicity, unit increments and growth.

    ``spec`` may be a family name, a ``LambdaSeq``, a ``{"family": ...}`` dict, a
    list (custom table) or a callable ``n -> lambda_n`` evaluated up to ``horizon``.
    Raises :class:`LambdaError` naming the first violated condition.
    """
    if isinstance(spec, LambdaSeq):
        lam = spec
    elif isinstance(spec, str):
        lam = LambdaSeq(spec)
    elif isinstance(spec, dict):
        fam = spec.get("family", "custom")
        lam = LambdaSeq(fam, tuple(int(v) for v in spec["table"]) if fam == "custom" else None)
    elif callable(spec):
        lam = LambdaSeq("custom", _table_from_callable(spec, horizon))
    else:
        lam = LambdaSeq("custom", _int_table(spec))
    if lam.table is not None:
        horizon = len(lam.table)
    if horizon < 2:
        raise LambdaError("growth", horizon, "need at least two terms")
    v = lam.values(horizon)[1:]
    if v[0] != 1:
        raise LambdaError("lambda_1 = 1", 1, f"lambda_1 = {v[0]}")
    if (v < 1).any():
        n = int(np.argmax(v < 1)) + 1
        raise LambdaError("positivity", n, f"lambda_{n} = {v[n - 1]}")
    inc = np.diff(v)
    if (inc < 0).any():
        n = int(np.argmax(inc < 0)) + 1
        raise LambdaError("nondecreasing", n, f"lambda_{n + 1} < lambda_{n}")
    if (inc > 1).any():
        n = int(np.argmax(inc > 1)) + 1
        raise LambdaError("lambda_{n+1} <= lambda_n + 1", n, f"increment {inc[n - 1]}")
    # finite surrogate for lambda_n -> infinity: still growing over the last decade
    if not v[-1] > v[max(horizon // 10, 1) - 1]:
        raise LambdaError("unbounded", horizon, "no growth over the last decade of the horizon")
    return lam


def _int_table(values) -> tuple[int, ...]:
    out = []
    for x in values:
        if x != int(x):
            raise ValueError(f"lambda values must be integers, got {x!r}")
        out.append(int(x))
    return tuple(out)


def _table_from_callable(fn: Callable[[int], float], horizon: int) -> tuple[int, ...]:
    return _int_table(fn(n) for n in range(1, horizon + 1))


def window(lam: LambdaSeq, n: int) -> tuple[int, int]:
    """``I_n = [n - lambda_n + 1, n]`` as an inclusive integer pair."""
    if n < 1:
        raise ValueError("windows are indexed from 1")
    return n - lam(n) + 1, n


# --------------------------------------------------------------------------
# set descriptions


class SetDescription:
    """Symbolic subset of N = {1, 2, ...}.

    Subclasses implement ``contains``, ``_build_mask`` and ``to_json``;
    ``skeleton`` returns ``(period, residues)`` when the set equals a periodic
    set up to a lambda-null set for every lambda in Delta-infinity, else None.
    """

    kind = "abstract"

    def contains(self, k: int) -> bool:
        raise NotImplementedError

    def __contains__(self, k: int) -> bool:
        return k >= 1 and self.contains(k)

    def mask(self, horizon: int) -> np.ndarray:
        """Boolean membership for ``0..horizon``; index 0 is always False."""
        return _cached_mask(self, horizon)

    def _build_mask(self, horizon: int) -> np.ndarray:
        raise NotImplementedError

    def skeleton(self):
        return None

    def to_json(self) -> dict:
        raise NotImplementedError

    def __or__(self, other: SetDescription) -> SetDescription:
        return Union((self, other))

    def __and__(self, other: SetDescription) -> SetDescription:
        return Inter((self, other))

    def __invert__(self) -> SetDescription:
        return Compl(self)

    def __sub__(self, other: SetDescription) -> SetDescription:
        return Inter((self, Compl(other)))

    def members(self, horizon: int) -> np.ndarray:
        return np.flatnonzero(self.mask(horizon))


@lru_cache(maxsize=64)
def _cached_mask(desc: SetDescription, horizon: int) -> np.ndarray:
    m = desc._build_mask(horizon)
    m[0] = False
    m.setflags(write=False)
    return m


def _empty(horizon: int) -> np.ndarray:
    return np.zeros(horizon + 1, dtype=bool)


@dataclass(frozen=True)
class Finite(SetDescription):
    elements: tuple[int, ...] = ()
    kind = "finite"

    def __post_init__(self):
        els = tuple(sorted(set(int(e) for e in self.elements)))
        if els and els[0] < 1:
            raise ValueError("elements of N start at 1")
        object.__setattr__(self, "elements", els)

    def contains(self, k):
        return k in self.elements

    def _build_mask(self, horizon):
        m = _empty(horizon)
        els = [e for e in self.elements if e <= horizon]
        m[els] = True
        return m

    def skeleton(self):
        return 1, frozenset()

    def to_json(self):
        return {"kind": "finite", "elements": list(self.elements)}


EMPTY = Finite(())


@dataclass(frozen=True)
class AP(SetDescription):
    """``{start + k * step : k >= 0}``."""

    start: int
    step: int
    kind = "ap"

    def __post_init__(self):
        if self.start < 1 or self.step < 1:
            raise ValueError("arithmetic progressions need start >= 1 and step >= 1")

    def contains(self, k):
        return k >= self.start and (k - self.start) % self.step == 0

    def _build_mask(self, horizon):
        m = _empty(horizon)
        m[self.start::self.step] = True
        return m

    def skeleton(self):
        return self.step, frozenset({self.start % self.step})

    def to_json(self):
        return {"kind": "ap", "start": self.start, "step": self.step}


@dataclass(frozen=True)
class Interval(SetDescription):
    """``[lo, hi]``; ``hi=None`` means unbounded."""

    lo: int = 1
    hi: int | None = None
    kind = "interval"

    def contains(self, k):
        return k >= self.lo and (self.hi is None or k <= self.hi)

    def _build_mask(self, horizon):
        m = _empty(horizon)
        hi = horizon if self.hi is None else min(self.hi, horizon)
        if hi >= self.lo:
            m[max(self.lo, 1):hi + 1] = True
        return m

    def skeleton(self):
        return (1, frozenset({0})) if self.hi is None else (1, frozenset())

    def to_json(self):
        return {"kind": "interval", "lo": self.lo, "hi": self.hi}


NATURALS = Interval(1, None)


@dataclass(frozen=True)
class Squares(SetDescription):
    kind = "squares"

    def contains(self, k):
        r = math.isqrt(k)
        return r * r == k

    def _build_mask(self, horizon):
        m = _empty(horizon)
        r = np.arange(1, math.isqrt(horizon) + 1)
        m[r * r] = True
        return m

    def skeleton(self):
        # at most sqrt(L) + 1 squares in any window of length L
        return 1, frozenset()

    def to_json(self):
        return {"kind": "squares"}


@dataclass(frozen=True)
class Powers(SetDescription):
    """``{base**j : j >= 0}``."""

    base: int = 2
    kind = "powers"

    def __post_init__(self):
        if self.base < 2:
            raise ValueError("powers need base >= 2")

    def contains(self, k):
        while k % self.base == 0:
            k //= self.base
        return k == 1

    def _build_mask(self, horizon):
        m = _empty(horizon)
        p = 1
        while p <= horizon:
            m[p] = True
            p *= self.base
        return m

    def skeleton(self):
        return 1, frozenset()

    def to_json(self):
        return {"kind": "powers", "base": self.base}


@dataclass(frozen=True)
class Windows(SetDescription):
    """``U_{j >= start} I_{base**j}`` with the windows of a fixed ``lam``.

    The windows belong to the description, not to whatever lambda later measures
    the set: the same set can be lambda-null for one family and not another.
    """

    lam: LambdaSeq
    base: int = 4
    start: int = 1
    kind = "windows"

    def _centres(self, upto: int):
        m = self.base ** self.start
        while m <= upto:
            yield m
            m *= self.base

    def contains(self, k):
        # window starts are nondecreasing in the centre
        m = self.base ** self.start
        while True:
            lo, hi = window(self.lam, m)
            if lo > k:
                return False
            if k <= hi:
                return True
            m *= self.base

    def _build_mask(self, horizon):
        out = _empty(horizon)
        # windows end at their centre, so only centres <= horizon matter
        for m in self._centres(horizon):
            lo, hi = window(self.lam, m)
            out[lo:hi + 1] = True
        return out

    def to_json(self):
        return {"kind": "windows", "lambda": self.lam.to_json(), "base": self.base, "start": self.start}


@dataclass(frozen=True)
class Union(SetDescription):
    parts: tuple[SetDescription, ...]
    kind = "union"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, k):
        return any(p.contains(k) for p in self.parts)

    def _build_mask(self, horizon):
        return reduce(np.logical_or, (p.mask(horizon) for p in self.parts), _empty(horizon))

    def skeleton(self):
        sks = [p.skeleton() for p in self.parts]
        known = [s for s in sks if s is not None]
        if any(len(r) == per for per, r in known):
            return 1, frozenset({0})
        if len(known) < len(sks):
            return None
        return _merge(known, any)

    def to_json(self):
        return {"kind": "union", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Inter(SetDescription):
    parts: tuple[SetDescription, ...]
    kind = "inter"

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))

    def contains(self, k):
        return all(p.contains(k) for p in self.parts)

    def _build_mask(self, horizon):
        return reduce(np.logical_and, (p.mask(horizon) for p in self.parts), ~_empty(horizon))

    def skeleton(self):
        sks = [p.skeleton() for p in self.parts]
        known = [s for s in sks if s is not None]
        if any(not r for _, r in known):
            return 1, frozenset()
        if len(known) < len(sks):
            return None
        return _merge(known, all)

    def to_json(self):
        return {"kind": "inter", "parts": [p.to_json() for p in self.parts]}


@dataclass(frozen=True)
class Compl(SetDescription):
    of: SetDescription
    kind = "compl"

    def contains(self, k):
        return not self.of.contains(k)

    def _build_mask(self, horizon):
        return ~self.of.mask(horizon)

    def skeleton(self):
        s = self.of.skeleton()
        if s is None:
            return None
        per, res = s
        return per, frozenset(range(per)) - res

    def to_json(self):
        return {"kind": "compl", "of": self.of.to_json()}


def _merge(skeletons, quantifier):
    period = 1
    for per, _ in skeletons:
        period = period * per // math.gcd(period, per)
        if period > MAX_PERIOD:
            return None
    res = frozenset(r for r in range(period) if quantifier(r % per in rs for per, rs in skeletons))
    return period, res


_PARSERS: dict[str, Callable[[dict], SetDescription]] = {
    "finite": lambda o: Finite(tuple(o.get("elements", ()))),
    "ap": lambda o: AP(int(o["start"]), int(o["step"])),
    "interval": lambda o: Interval(int(o.get("lo", 1)), None if o.get("hi") is None else int(o["hi"])),
    "squares": lambda o: Squares(),
    "powers": lambda o: Powers(int(o.get("base", 2))),
    "windows": lambda o: Windows(validate_lambda(o.get("lambda", "ceil-sqrt")), int(o.get("base", 4)),
                                 int(o.get("start", 1))),
    "union": lambda o: Union(tuple(set_from_json(p) for p in o["parts"])),
    "inter": lambda o: Inter(tuple(set_from_json(p) for p in o["parts"])),
    "compl": lambda o: Compl(set_from_json(o["of"])),
}


def set_from_json(obj: dict) -> SetDescription:
    kind = obj.get("kind")
    if kind not in _PARSERS:
        raise ValueError(f"unknown set kind {kind!r}")
    return _PARSERS[kind](obj)


# --------------------------------------------------------------------------
# density


@dataclass(frozen=True)
class DensityVerdict:
    """Outcome of a density computation.

    ``kind`` is ``exact`` (``value`` set), ``empirical`` (finite-horizon estimate
    that settled), or one of the null classifications ``null``, ``positive``,
    ``oscillating``. ``checkpoints`` rows are ``(n, count, lambda_n, ratio)``.
    """

    kind: str
    value: Fraction | float | None = None
    liminf: float | None = None
    limsup: float | None = None
    checkpoints: tuple = ()
    horizon: int | None = None

    @property
    def is_null(self) -> bool:
        if self.kind == "exact":
            return self.value == 0
        return self.kind == "null"

    def to_json(self) -> dict:
        from ._num import encode

        return {
            "kind": self.kind,
            "value": encode(self.value) if isinstance(self.value, Fraction) else self.value,
            "liminf": self.liminf,
            "limsup": self.limsup,
            "horizon": self.horizon,
            "checkpoints": [list(row) for row in self.checkpoints],
        }


def _prefix(mask: np.ndarray) -> np.ndarray:
    return np.cumsum(mask, dtype=np.int64)


def window_counts(mask: np.ndarray, lam: LambdaSeq, lo: int, hi: int) -> tuple[np.ndarray, np.ndarray]:
    """``|M n I_n|`` and ``lambda_n`` for ``n = lo..hi``."""
    P = _prefix(mask[:hi + 1])
    n = np.arange(lo, hi + 1)
    lv = lam.values(hi)[lo:hi + 1]
    return P[n] - P[n - lv], lv


def window_ratios(mask: np.ndarray, lam: LambdaSeq, lo: int, hi: int) -> np.ndarray:
    counts, lv = window_counts(mask, lam, lo, hi)
    return counts / lv


def empirical_density(M: SetDescription, lam: LambdaSeq, n: int) -> Fraction:
    """Exact ``|M n I_n| / lambda_n``."""
    lo, hi = window(lam, n)
    count = int(M.mask(n)[lo:hi + 1].sum())
    return Fraction(count, lam(n))


def checkpoint_grid(horizon: int) -> list[int]:
    """Geometric (x2) checkpoints through the top decade, ending at the horizon."""
    n = max(horizon // 10, 1)
    out = []
    while n < horizon:
        out.append(n)
        n *= 2
    out.append(horizon)
    return out


def classify_mask(mask: np.ndarray, lam: LambdaSeq, horizon: int, eps: float = DEFAULT_EPS) -> DensityVerdict:
    """Finite-horizon nullity of the set with the given membership mask.

    Ratios are examined at every ``n`` of the top decade ``[horizon/10, horizon]``:
    ``null`` if all are ``<= eps``, ``positive`` if all exceed ``eps``,
    ``oscillating`` otherwise. The evidence table holds the geometric
    checkpoints plus the arg-max and arg-min indices.
    """
    if horizon < 1000:
        raise ValueError("classification needs horizon >= 1000")
    lo = horizon // 10
    counts, lv = window_counts(mask, lam, lo, horizon)
    ratios = counts / lv
    i_max, i_min = int(np.argmax(ratios)), int(np.argmin(ratios))
    sup, inf = float(ratios[i_max]), float(ratios[i_min])
    if sup <= eps:
        kind = "null"
    elif inf > eps:
        kind = "positive"
    else:
        kind = "oscillating"
    rows = sorted({*(n - lo for n in checkpoint_grid(horizon)), i_max, i_min})
    table = tuple((lo + i, int(counts[i]), int(lv[i]), float(ratios[i])) for i in rows)
    return DensityVerdict(kind, None, inf, sup, table, horizon)


def classify_null(M: SetDescription, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                  eps: float = DEFAULT_EPS) -> DensityVerdict:
    return classify_mask(M.mask(horizon), lam, horizon, eps)


def exact_density(M: SetDescription, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                  eps: float = DEFAULT_EPS) -> DensityVerdict:
    """lambda-density of ``M``: exact on the periodic-modulo-null fragment.

    Finite sets, squares and powers are null for every lambda in Delta-infinity,
    an AP with step d has density 1/d, and complements, unions and
    intersections are resolved residue-wise. Anything else (window unions,
    sequence fibres) is measured empirically; ``oscillating`` is returned when
    the top-decade liminf and limsup differ by more than ``eps``.
    """
    sk = M.skeleton()
    if sk is not None:
        per, res = sk
        return DensityVerdict("exact", Fraction(len(res), per))
    v = classify_null(M, lam, horizon, eps)
    if v.limsup - v.liminf > eps:
        return DensityVerdict("oscillating", None, v.liminf, v.limsup, v.checkpoints, horizon)
    last = v.checkpoints[-1] if v.checkpoints[-1][0] == horizon else None
    value = last[3] if last else (v.liminf + v.limsup) / 2
    return DensityVerdict("empirical", value, v.liminf, v.limsup, v.checkpoints, horizon)


def density_csv(M: SetDescription, lam: LambdaSeq, ns: Iterable[int]) -> str:
    """CSV report with columns ``n, count, lambda_n, ratio``."""
    ns = sorted(ns)
    mask = M.mask(ns[-1])
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "count", "lambda_n", "ratio"])
    for n in ns:
        lo, hi = window(lam, n)
        c = int(mask[lo:hi + 1].sum())
        w.writerow([n, c, lam(n), repr(c / lam(n))])
    return buf.getvalue()


def natural_density_count(M: SetDescription, n: int) -> Fraction:
    """``|M n [1, n]| / n``."""
    return Fraction(int(M.mask(n)[1:].sum()), n)


def as_lambda(spec) -> LambdaSeq:
    """Named families pass through; anything else goes through :func:`validate_lambda`."""
    if isinstance(spec, LambdaSeq):
        return spec
    if isinstance(spec, str):
        return LambdaSeq(spec)
    return validate_lambda(spec)
