"""Strong lambda-statistical convergence, Cauchyness and limit/cluster points.

Sequences live in finite PM spaces. Below ``t*`` every strong neighborhood is a
singleton, so every question here reduces to the lambda-density of a *fibre*
``{k : x_k in B}`` for some label set ``B``. Fibres are evaluated on a finite
horizon through :func:`pmseq.density.classify_mask`, and symbolically (exact
density) whenever the sequence structure allows it.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property, lru_cache
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

from ._num import as_ext, encode
from .density import (
    AP,
    DEFAULT_EPS,
    DEFAULT_HORIZON,
    EMPTY,
    NATURALS,
    Compl,
    DensityVerdict,
    Finite,
    Interval,
    LambdaSeq,
    SetDescription,
    Union,
    as_lambda,
    classify_mask,
    set_from_json,
    window_counts,
)
from .distfn import StepDistFn, levy_distance
from .pmspace import PMSpace, find_eta, t_grid

T_MAX = 16
CAUCHY_POOL = 100


class PropertyViolation(AssertionError):
    """A property that the theory guarantees failed on a concrete instance."""

    def __init__(self, message: str, witness: dict | None = None):
        super().__init__(message)
        self.witness = witness or {}


class UniquenessViolation(PropertyViolation):
    pass


class PreconditionError(ValueError):
    pass


class HorizonError(RuntimeError):
    def __init__(self, message: str, t: int | None = None):
        super().__init__(message)
        self.t = t


# --------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class Pattern:
    """Eventually periodic label pattern: ``prefix`` once, then ``cycle`` forever."""

    cycle: tuple
    prefix: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "cycle", tuple(self.cycle))
        object.__setattr__(self, "prefix", tuple(self.prefix))
        if not self.cycle:
            raise ValueError("a pattern needs a nonempty cycle")

    @classmethod
    def const(cls, label) -> Pattern:
        return cls((label,))

    @classmethod
    def periodic(cls, *labels, prefix=()) -> Pattern:
        return cls(tuple(labels), tuple(prefix))

    def at(self, i: int):
        """Label at 0-based position ``i``."""
        p = len(self.prefix)
        return self.prefix[i] if i < p else self.cycle[(i - p) % len(self.cycle)]

    def codes(self, positions: np.ndarray, code_of: dict) -> np.ndarray:
        cyc = np.array([code_of[c] for c in self.cycle], dtype=np.int16)
        p = len(self.prefix)
        out = cyc[np.maximum(positions - p, 0) % len(self.cycle)]
        if p:
            head = positions < p
            pre = np.array([code_of[c] for c in self.prefix], dtype=np.int16)
            out[head] = pre[positions[head]]
        return out

    def labels(self) -> set:
        return set(self.cycle) | set(self.prefix)

    def fibre(self, B: frozenset) -> SetDescription:
        """Positions ``k >= 1`` (1-based) whose label lies in ``B``."""
        p, c = len(self.prefix), len(self.cycle)
        head = Finite(tuple(i + 1 for i, lab in enumerate(self.prefix) if lab in B))
        tail = [AP(p + 1 + i, c) for i, lab in enumerate(self.cycle) if lab in B]
        parts = ([head] if head.elements else []) + tail
        if not parts:
            return EMPTY
        if len(tail) == c and not p:
            return NATURALS
        return parts[0] if len(parts) == 1 else Union(tuple(parts))

    def to_json(self) -> dict:
        if len(self.cycle) == 1 and not self.prefix:
            return {"kind": "const", "value": _enc(self.cycle[0])}
        out = {"kind": "periodic", "pattern": [_enc(c) for c in self.cycle]}
        if self.prefix:
            out["prefix"] = [_enc(c) for c in self.prefix]
        return out

    @classmethod
    def from_json(cls, obj) -> Pattern:
        if isinstance(obj, list):
            return cls(tuple(obj))
        if obj.get("kind") == "const":
            return cls.const(obj["value"])
        return cls(tuple(obj["pattern"]), tuple(obj.get("prefix", ())))


def _enc(label):
    return encode(label) if isinstance(label, (Fraction, float)) else label


@dataclass(frozen=True)
class SymbolicSequence:
    """``x_k`` = the exception pattern on ``exceptions``, the base elsewhere.

    The exception pattern is indexed by rank inside the exception set: the j-th
    exceptional index (j = 0, 1, ...) receives ``exception_values.at(j)``. The
    base is either a :class:`Pattern` or another sequence, which allows layered
    overrides.
    """

    space: PMSpace | None
    base: Pattern | SymbolicSequence
    exceptions: SetDescription = EMPTY
    exception_values: Pattern | None = None

    def __post_init__(self):
        if self.exception_values is None:
            if self.exceptions != EMPTY:
                raise ValueError("exceptions need exception_values")
        elif not isinstance(self.exception_values, Pattern):
            object.__setattr__(self, "exception_values", Pattern(tuple(self.exception_values)))
        if self.space is not None:
            for lab in self.labels():
                self.space.index(lab)

    @classmethod
    def constant(cls, space, label) -> SymbolicSequence:
        return cls(space, Pattern.const(label))

    def labels(self) -> set:
        base = self.base.labels()
        return base | (self.exception_values.labels() if self.exception_values else set())

    @cached_property
    def alphabet(self) -> tuple:
        if self.space is not None:
            return self.space.points
        labs = self.labels()
        try:
            return tuple(sorted(labs))
        except TypeError:
            return tuple(sorted(labs, key=repr))

    @cached_property
    def code_of(self) -> dict:
        return {lab: i for i, lab in enumerate(self.alphabet)}

    def term(self, k: int):
        return term(self, k)

    def codes(self, horizon: int) -> np.ndarray:
        """Alphabet codes of ``x_0..x_horizon`` (entry 0 is -1)."""
        return _codes(self, horizon)

    def with_override(self, where: SetDescription, values) -> SymbolicSequence:
        vals = values if isinstance(values, Pattern) else Pattern(tuple(values))
        return SymbolicSequence(self.space, self, where, vals)

    def to_json(self, include_space: bool = True) -> dict:
        base = (self.base.to_json(include_space=False) | {"kind": "sequence"}
                if isinstance(self.base, SymbolicSequence) else self.base.to_json())
        out = {"base": base, "exceptions": self.exceptions.to_json(),
               "exception_values": self.exception_values.to_json() if self.exception_values else None}
        if include_space and self.space is not None:
            out = {"space": self.space.to_json(), **out}
        return out

    @classmethod
    def from_json(cls, obj: dict, space: PMSpace | None = None, base_dir=None) -> SymbolicSequence:
        if space is None and obj.get("space") is not None:
            ref = obj["space"]
            if isinstance(ref, str):
                import os

                path = ref if base_dir is None or os.path.isabs(ref) else os.path.join(base_dir, ref)
                space = PMSpace.load(path)
            else:
                space = PMSpace.from_json(ref)
        b = obj["base"]
        base = cls.from_json(b, space) if b.get("kind") == "sequence" else Pattern.from_json(b)
        exc = set_from_json(obj["exceptions"]) if obj.get("exceptions") else EMPTY
        vals = obj.get("exception_values")
        return cls(space, base, exc, Pattern.from_json(vals) if vals else None)


def _count_upto(desc: SetDescription, k: int) -> int:
    m = desc._build_mask(k)
    m[0] = False
    return int(np.count_nonzero(m))


def term(seq: SymbolicSequence, k: int):
    """``x_k`` for ``k >= 1``."""
    if k < 1:
        raise ValueError("sequences are indexed from 1")
    if seq.exception_values is not None and k in seq.exceptions:
        return seq.exception_values.at(_count_upto(seq.exceptions, k) - 1)
    if isinstance(seq.base, SymbolicSequence):
        return term(seq.base, k)
    return seq.base.at(k - 1)


@lru_cache(maxsize=24)
def _codes(seq: SymbolicSequence, horizon: int) -> np.ndarray:
    code_of = seq.code_of
    if isinstance(seq.base, SymbolicSequence):
        sub = seq.base.codes(horizon)
        if seq.base.alphabet != seq.alphabet:
            remap = np.array([code_of[l] for l in seq.base.alphabet], dtype=np.int16)
            sub = np.where(sub >= 0, remap[np.maximum(sub, 0)], -1).astype(np.int16)
        out = sub.copy()
    else:
        out = np.empty(horizon + 1, dtype=np.int16)
        out[1:] = seq.base.codes(np.arange(horizon), code_of)
    if seq.exception_values is not None:
        m = seq.exceptions.mask(horizon)
        idx = np.flatnonzero(m)
        out[idx] = seq.exception_values.codes(np.arange(len(idx)), code_of)
    out[0] = -1
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Fibre(SetDescription):
    """``{k : x_k in labels}`` for a concrete sequence."""

    seq: SymbolicSequence
    labels: frozenset
    kind = "fibre"

    def contains(self, k):
        return term(self.seq, k) in self.labels

    def _build_mask(self, horizon):
        codes = [self.seq.code_of[l] for l in self.labels if l in self.seq.code_of]
        return np.isin(self.seq.codes(horizon), codes)

    def to_json(self):
        return {"kind": "fibre", "labels": sorted((_enc(l) for l in self.labels), key=str)}


def symbolic_fibre(seq: SymbolicSequence, B: Iterable) -> SetDescription:
    """``{k : x_k in B}`` as a symbolic description where the structure allows it."""
    B = frozenset(B)
    if isinstance(seq.base, SymbolicSequence):
        base_part = symbolic_fibre(seq.base, B)
    else:
        base_part = seq.base.fibre(B)
    if seq.exception_values is None or seq.exceptions == EMPTY:
        return base_part
    vals = seq.exception_values.labels()
    E = seq.exceptions
    if vals <= B:
        exc_part = E
    elif not vals & B:
        exc_part = EMPTY
    else:
        return Fibre(seq, B)
    return _simplify_union(exc_part, _simplify_inter(Compl(E), base_part))


def _simplify_inter(a: SetDescription, b: SetDescription) -> SetDescription:
    if b == EMPTY or a == EMPTY:
        return EMPTY
    if b == NATURALS:
        return a
    if a == NATURALS:
        return b
    return a & b


def _simplify_union(a: SetDescription, b: SetDescription) -> SetDescription:
    if a == EMPTY:
        return b
    if b == EMPTY:
        return a
    if isinstance(b, Compl) and b.of == a:
        return NATURALS
    return a | b


# --------------------------------------------------------------------------
# fibre nullity


@lru_cache(maxsize=8192)
def _fibre_verdict(seq: SymbolicSequence, B: frozenset, lam: LambdaSeq, horizon: int,
                   eps: float) -> DensityVerdict:
    codes = [seq.code_of[l] for l in B]
    return classify_mask(np.isin(seq.codes(horizon), codes), lam, horizon, eps)


def fibre_verdict(seq, B, lam, horizon=DEFAULT_HORIZON, eps=DEFAULT_EPS) -> DensityVerdict:
    lam = as_lambda(lam)
    return _fibre_verdict(seq, frozenset(B), lam, horizon, eps)


def _far_labels(space: PMSpace, centre, t) -> frozenset:
    """Labels ``y`` with ``F(y, centre)(t) <= 1 - t``."""
    return frozenset(y for y in space.points if not space.near(y, centre, t))


def _near_labels(space: PMSpace, centre, t) -> frozenset:
    return frozenset(y for y in space.points if space.near(y, centre, t))


def _need_space(seq: SymbolicSequence) -> PMSpace:
    if seq.space is None:
        raise ValueError("this analysis needs a sequence in a PM space")
    return seq.space


# --------------------------------------------------------------------------
# convergence


@dataclass(frozen=True)
class TEvidence:
    t: Fraction
    labels: frozenset
    exception_set: dict
    verdict: DensityVerdict
    exact: Fraction | None = None
    dl_form_agrees: bool = True

    def to_json(self) -> dict:
        return {
            "t": encode(self.t),
            "labels": sorted((_enc(l) for l in self.labels), key=str),
            "exception_set": self.exception_set,
            "verdict": self.verdict.to_json(),
            "exact_density": encode(self.exact) if self.exact is not None else None,
            "dl_form_agrees": self.dl_form_agrees,
        }


@dataclass(frozen=True)
class ConvergenceReport:
    verdict: str  # converges | diverges | inconclusive
    candidate: Hashable
    lam: LambdaSeq
    horizon: int
    eps: float
    evidence: tuple[TEvidence, ...] = ()

    @property
    def converges(self) -> bool:
        return self.verdict == "converges"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "candidate": _enc(self.candidate),
            "lambda": self.lam.to_json(),
            "horizon": self.horizon,
            "eps": self.eps,
            "evidence": [e.to_json() for e in self.evidence],
        }


def _exact_if_symbolic(desc: SetDescription) -> Fraction | None:
    sk = desc.skeleton()
    if sk is None:
        return None
    per, res = sk
    return Fraction(len(res), per)


def check_convergence(seq: SymbolicSequence, L, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                      eps: float = DEFAULT_EPS) -> ConvergenceReport:
    """Strong lambda-statistical convergence of ``seq`` to ``L`` on the t-grid.

    For each grid ``t`` the exception set ``{j : F(x_j, L)(t) <= 1 - t}`` is the
    fibre of the labels far from ``L``. Its d_L form ``{j : d_L(F(x_j, L), eps_0)
    >= t}`` is computed separately and must coincide. When the fibre has a
    symbolic description with exact density, that value is reported too; a
    disagreement between the exact value and the horizon verdict makes the
    result ``inconclusive``.
    """
    lam = as_lambda(lam)
    space = _need_space(seq)
    space.index(L)
    evidence = []
    null_all, conflict = True, False
    for t in t_grid(space):
        B = _far_labels(space, L, t)
        B_dl = frozenset(y for y in space.points if space.dist0[(y, L)] >= t)
        desc = symbolic_fibre(seq, B)
        v = fibre_verdict(seq, B, lam, horizon, eps)
        exact = _exact_if_symbolic(desc)
        if exact is not None and (exact == 0) != v.is_null:
            conflict = True
        null_all &= v.is_null
        evidence.append(TEvidence(t, B, desc.to_json(), v, exact, B == B_dl))
    if not all(e.dl_form_agrees for e in evidence):
        raise PropertyViolation("exception sets disagree between the F and d_L forms",
                                {"candidate": _enc(L)})
    verdict = "inconclusive" if conflict else ("converges" if null_all else "diverges")
    return ConvergenceReport(verdict, L, lam, horizon, eps, tuple(evidence))


def find_limit(seq: SymbolicSequence, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
               eps: float = DEFAULT_EPS):
    """The unique strong lambda-statistical limit, or None.

    Two passing candidates would contradict uniqueness of limits and raise
    :class:`UniquenessViolation`.
    """
    lam = as_lambda(lam)
    space = _need_space(seq)
    passing = [L for L in space.points if check_convergence(seq, L, lam, horizon, eps).converges]
    if len(passing) > 1:
        raise UniquenessViolation(f"several strong lambda-statistical limits: {passing!r}",
                                  {"limits": [_enc(p) for p in passing], "sequence": seq.to_json()})
    return passing[0] if passing else None


# --------------------------------------------------------------------------
# Cauchy


def cauchy_pool(seq: SymbolicSequence, horizon: int) -> list[int]:
    """First indices outside the exception set, then powers of two."""
    exc = seq.exceptions.mask(horizon)
    outside = np.flatnonzero(~exc[1:])[:CAUCHY_POOL] + 1
    pool = [int(k) for k in outside]
    seen = set(pool)
    k = 1
    while k <= horizon:
        if k not in seen:
            pool.append(k)
            seen.add(k)
        k *= 2
    return pool


@dataclass(frozen=True)
class CauchyStep:
    t: Fraction
    witness: int | None
    label: Hashable | None
    verdict: DensityVerdict | None

    def to_json(self) -> dict:
        return {"t": encode(self.t), "N0": self.witness, "label": _enc(self.label),
                "verdict": self.verdict.to_json() if self.verdict else None}


@dataclass(frozen=True)
class CauchyReport:
    cauchy: bool
    steps: tuple[CauchyStep, ...]
    lam: LambdaSeq
    horizon: int
    eps: float

    def to_json(self) -> dict:
        return {"cauchy": self.cauchy, "lambda": self.lam.to_json(), "horizon": self.horizon,
                "eps": self.eps, "steps": [s.to_json() for s in self.steps]}


def _cauchy_witness(seq, t, lam, horizon, eps, pool):
    space = seq.space
    codes = seq.codes(horizon)
    tried: dict = {}
    for N0 in pool:
        y = seq.alphabet[codes[N0]]
        if y not in tried:
            tried[y] = fibre_verdict(seq, _far_labels(space, y, t), lam, horizon, eps)
        if tried[y].is_null:
            return N0, y, tried[y]
    return None, None, None


def check_cauchy(seq: SymbolicSequence, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                 eps: float = DEFAULT_EPS) -> CauchyReport:
    """Search a witness ``N0`` for every grid ``t`` with ``{k : F(x_k, x_N0)(t) <= 1 - t}`` null."""
    lam = as_lambda(lam)
    space = _need_space(seq)
    pool = cauchy_pool(seq, horizon)
    steps = []
    for t in t_grid(space):
        N0, y, v = _cauchy_witness(seq, t, lam, horizon, eps, pool)
        steps.append(CauchyStep(t, N0, y, v))
    return CauchyReport(all(s.witness is not None for s in steps), tuple(steps), lam, horizon, eps)


@dataclass(frozen=True)
class PairOff:
    t: Fraction
    eta: Fraction
    N0: int
    H: SetDescription
    G: SetDescription
    H_verdict: DensityVerdict
    G_verdict: DensityVerdict
    labels_outside: frozenset
    sampled_pairs: int

    def to_json(self) -> dict:
        return {"t": encode(self.t), "eta": encode(self.eta), "N0": self.N0,
                "H": self.H.to_json(), "G": self.G.to_json(),
                "H_verdict": self.H_verdict.to_json(), "G_verdict": self.G_verdict.to_json(),
                "labels_outside": sorted((_enc(l) for l in self.labels_outside), key=str),
                "sampled_pairs": self.sampled_pairs}


def pair_off_null_set(seq: SymbolicSequence, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                      eps: float = DEFAULT_EPS, samples: int = 10_000, seed: int = 0) -> list[PairOff]:
    """Null sets ``H_t`` off which every pair of terms is ``t``-close.

    ``eta`` comes from :func:`pmseq.pmspace.find_eta` so that two ``eta``-steps
    make at most one ``t``-step, and ``H_t`` is the ``eta``-exception set of a
    Cauchy witness. The complement ``G_t`` is returned alongside.
    """
    lam = as_lambda(lam)
    space = _need_space(seq)
    if not check_cauchy(seq, lam, horizon, eps).cauchy:
        raise PreconditionError("sequence is not strong lambda-statistically Cauchy")
    pool = cauchy_pool(seq, horizon)
    codes = seq.codes(horizon)
    rng = np.random.default_rng(seed)
    out = []
    for t in t_grid(space):
        eta = find_eta(space, t)
        N0, y, _ = _cauchy_witness(seq, eta, lam, horizon, eps, pool)
        if N0 is None:
            raise PropertyViolation("Cauchy at every grid t but no witness at eta",
                                    {"t": encode(t), "eta": encode(eta)})
        far = _far_labels(space, y, eta)
        H = symbolic_fibre(seq, far)
        G = Compl(H) if not isinstance(H, Compl) else H.of
        hv = fibre_verdict(seq, far, lam, horizon, eps)
        gv = fibre_verdict(seq, frozenset(space.points) - far, lam, horizon, eps)
        inside = np.flatnonzero(~H.mask(horizon)[1:]) + 1
        present = frozenset(seq.alphabet[c] for c in np.unique(codes[inside]))
        bad = [(a, b) for a, b in itertools.product(present, repeat=2) if not space.near(a, b, t)]
        n_pairs = 0
        if len(inside):
            ks = rng.choice(inside, size=(samples, 2))
            near_tab = np.array([[space.near(a, b, t) for b in seq.alphabet] for a in seq.alphabet])
            n_pairs = samples
            ok = near_tab[codes[ks[:, 0]], codes[ks[:, 1]]]
            if not ok.all():
                i = int(np.argmin(ok))
                bad.append((int(ks[i, 0]), int(ks[i, 1])))
        if bad or not hv.is_null:
            raise PropertyViolation("pairs off H_t are not t-close or H_t is not null",
                                    {"t": encode(t), "eta": encode(eta), "N0": N0,
                                     "bad": [list(map(_enc, p)) for p in bad[:5]],
                                     "H_verdict": hv.to_json()})
        out.append(PairOff(t, eta, N0, H, G, hv, gv, present, n_pairs))
    return out


# --------------------------------------------------------------------------
# full-density subsequence


@dataclass(frozen=True)
class Extraction:
    G: SetDescription
    limit: Hashable
    thresholds: tuple[tuple[int, int], ...]
    t_max: int
    checkpoints: tuple[tuple[int, float], ...]
    tails: tuple[tuple[Fraction, int, bool], ...]

    @property
    def converges_along_G(self) -> bool:
        return all(ok for _, _, ok in self.tails)

    def to_json(self) -> dict:
        return {"limit": _enc(self.limit), "G": self.G.to_json(), "t_max": self.t_max,
                "thresholds": [list(p) for p in self.thresholds],
                "checkpoints": [list(p) for p in self.checkpoints],
                "tails": [[encode(t), u, ok] for t, u, ok in self.tails],
                "converges_along_G": self.converges_along_G}


def extract_full_density_subsequence(seq: SymbolicSequence, L, lam: LambdaSeq,
                                     horizon: int = DEFAULT_HORIZON,
                                     eps: float = DEFAULT_EPS) -> Extraction:
    """Density-one index set along which the sequence strongly converges to ``L``.

    ``G_t = {q : d_L(F(x_q, L), eps_0) < 1/t}``; ``u_t`` is the least member of
    ``G_t`` beyond ``u_{t-1}`` from which ``|G_t n I_n| / lambda_n > (t-1)/t``
    holds at every ``n`` up to the horizon; then
    ``G = [1, u_1] u U_t ([u_t, u_{t+1}] n G_t)`` with the last block open-ended.
    ``t`` runs up to ``max(16, ceil(1/t*))`` so the last ``G_t`` is the fibre of
    ``L`` itself.
    """
    lam = as_lambda(lam)
    space = _need_space(seq)
    if not check_convergence(seq, L, lam, horizon, eps).converges:
        raise PreconditionError(f"sequence does not converge strongly lambda-statistically to {L!r}")
    t_max = max(T_MAX, math.ceil(1 / space.t_star))
    codes = seq.codes(horizon)
    lv = lam.values(horizon)
    n = np.arange(1, horizon + 1)
    G_sets, us = [], []
    prev_u = 0
    # G_t only changes when 1/t passes a distance value, so share the counting work
    shared: dict = {}
    for t in range(1, t_max + 1):
        labels = frozenset(y for y in space.points if space.dist0[(y, L)] < Fraction(1, t))
        if labels not in shared:
            mask = np.isin(codes, [seq.code_of[l] for l in labels])
            mask[0] = False
            P = np.cumsum(mask, dtype=np.int64)
            shared[labels] = (mask, lv[1:] - (P[n] - P[n - lv[1:]]))
        mask, missing = shared[labels]
        # exact form of counts / lambda_n > (t - 1) / t
        good = missing * t < lv[1:]
        bad = np.flatnonzero(~good)
        start = max(int(bad[-1]) + 2 if len(bad) else 1, prev_u + 1)
        members = np.flatnonzero(mask[start:]) + start
        if not len(members):
            raise HorizonError(f"horizon {horizon} too small to certify u_{t}", t)
        u = int(members[0])
        G_sets.append(symbolic_fibre(seq, labels))
        us.append(u)
        prev_u = u
    parts = [Interval(1, us[0])]
    for i in range(t_max):
        hi = us[i + 1] if i + 1 < t_max else None
        parts.append(_simplify_inter(Interval(us[i], hi), G_sets[i]))
    G = Union(tuple(parts))

    gmask = G.mask(horizon)
    checkpoints = []
    m = 1000
    while m <= horizon:
        c, l = window_counts(gmask, lam, m, m)
        checkpoints.append((m, float(c[0] / l[0])))
        m *= 10
    if checkpoints[-1][0] != horizon:
        c, l = window_counts(gmask, lam, horizon, horizon)
        checkpoints.append((horizon, float(c[0] / l[0])))

    tails = []
    for t in t_grid(space):
        s = min(t_max, math.ceil(1 / t))
        u = us[s - 1]
        near = _near_labels(space, L, t)
        tail = codes[u:][gmask[u:]]
        ok = set(np.unique(tail).tolist()) <= {seq.code_of[l] for l in near}
        tails.append((t, u, ok))
    return Extraction(G, L, tuple(zip(range(1, t_max + 1), us)), t_max, tuple(checkpoints), tuple(tails))


# --------------------------------------------------------------------------
# limit points and cluster points


@dataclass(frozen=True)
class PointSets:
    strong_limit_points: frozenset
    stat_limit_points: frozenset
    stat_cluster_points: frozenset

    def to_json(self) -> dict:
        def s(x):
            return sorted((_enc(l) for l in x), key=str)

        return {"strong_limit_points": s(self.strong_limit_points),
                "stat_limit_points": s(self.stat_limit_points),
                "stat_cluster_points": s(self.stat_cluster_points)}


def point_sets(seq: SymbolicSequence, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
               eps: float = DEFAULT_EPS) -> PointSets:
    """Strong limit points, strong lambda-statistical limit points and cluster points.

    A subsequence converges strongly to ``y`` iff it is eventually ``y`` (the
    topology is discrete below ``t*``). So ``y`` is a strong limit point iff it
    recurs (heuristically: occurs in the top decade of the horizon) and a
    lambda-statistical limit point iff its fibre is not null.
    """
    lam = as_lambda(lam)
    space = _need_space(seq)
    codes = seq.codes(horizon)
    recurring = frozenset(seq.alphabet[c] for c in np.unique(codes[max(horizon // 10, 1):]))
    lam_pts = frozenset(y for y in space.points if not fibre_verdict(seq, {y}, lam, horizon, eps).is_null)
    grid = t_grid(space)
    gam_pts = frozenset(
        y for y in space.points
        if all(not fibre_verdict(seq, _near_labels(space, y, t), lam, horizon, eps).is_null for t in grid)
    )
    if not (lam_pts <= gam_pts <= recurring):
        raise PropertyViolation("Lambda <= Gamma <= L fails",
                                {"L": sorted(map(str, recurring)), "Lambda": sorted(map(str, lam_pts)),
                                 "Gamma": sorted(map(str, gam_pts))})
    return PointSets(recurring, lam_pts, gam_pts)


# --------------------------------------------------------------------------
# sequences in ordinary metric spaces


@dataclass(frozen=True, eq=False)
class ValuedSequence:
    """Finitely-valued sequence in a metric space: ``x_k = values[codes[k]]``."""

    values: tuple
    metric: Callable
    code_fn: Callable[[int], np.ndarray]

    def codes(self, horizon: int) -> np.ndarray:
        return self.code_fn(horizon)

    @classmethod
    def from_symbolic(cls, seq: SymbolicSequence, metric: Callable | None = None) -> ValuedSequence:
        """Labels taken as points of a metric space (absolute value by default)."""
        return cls(seq.alphabet, metric or (lambda a, b: abs(as_ext(a) - as_ext(b))), seq.codes)

    @cached_property
    def _dist(self) -> dict:
        return {}

    def distance(self, i: int, j: int):
        if i == j:
            return 0
        key = (min(i, j), max(i, j))
        if key not in self._dist:
            self._dist[key] = self.metric(self.values[key[0]], self.values[key[1]])
        return self._dist[key]


def _levy_metric(f: StepDistFn, g: StepDistFn) -> float:
    return levy_distance(f, g).value


def pairwise_distance_sequence(x: SymbolicSequence, g: SymbolicSequence) -> ValuedSequence:
    """``k -> F(x_k, g_k)`` as a sequence in ``(D+, d_L)``."""
    if x.space is None or x.space is not g.space:
        raise ValueError("both sequences must live in the same PM space")
    space = x.space
    pts = space.points
    values = []
    index: dict = {}
    table = np.empty(len(pts) ** 2, dtype=np.int16)
    for i, a in enumerate(pts):
        for j, b in enumerate(pts):
            f = space.F(a, b)
            if f not in index:
                index[f] = len(values)
                values.append(f)
            table[i * len(pts) + j] = index[f]

    def code_fn(horizon: int) -> np.ndarray:
        xc, gc = x.codes(horizon), g.codes(horizon)
        out = table[np.maximum(xc, 0) * len(pts) + np.maximum(gc, 0)]
        out[0] = -1
        return out

    return ValuedSequence(tuple(values), _levy_metric, lru_cache(maxsize=4)(code_fn))


def _occurring(vs: ValuedSequence, horizon: int) -> list[int]:
    return [int(c) for c in np.unique(vs.codes(horizon)[1:])]


def eta_grid(vs: ValuedSequence, horizon: int) -> list:
    """Midpoints between consecutive distinct distances among occurring values, plus one above."""
    occ = _occurring(vs, horizon)
    ds = sorted({vs.distance(i, j) for i in occ for j in occ} | {0})
    grid = [(a + b) / 2 for a, b in zip(ds, ds[1:])]
    grid.append(ds[-1] + 1)
    return grid


@lru_cache(maxsize=4096)
def _value_verdict(vs: ValuedSequence, codes: frozenset, lam, horizon, eps) -> DensityVerdict:
    return classify_mask(np.isin(vs.codes(horizon), list(codes)), lam, horizon, eps)


@dataclass(frozen=True)
class MetricCauchyReport:
    cauchy: bool
    steps: tuple  # (eta, N0 value index or None)

    def to_json(self) -> dict:
        return {"cauchy": self.cauchy, "steps": [[float(e), w] for e, w in self.steps]}


def metric_cauchy(vs: ValuedSequence, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                  eps: float = DEFAULT_EPS, grid: Sequence | None = None) -> MetricCauchyReport:
    """lambda-statistical Cauchyness in a metric space: some ``N0`` per ``eta`` with
    ``{k : rho(x_k, x_N0) >= eta}`` null. Every occurring value is tried as ``x_N0``."""
    lam = as_lambda(lam)
    occ = _occurring(vs, horizon)
    steps = []
    for eta in grid if grid is not None else eta_grid(vs, horizon):
        hit = None
        for v in occ:
            far = frozenset(w for w in occ if vs.distance(v, w) >= eta)
            if _value_verdict(vs, far, lam, horizon, eps).is_null:
                hit = v
                break
        steps.append((eta, hit))
    return MetricCauchyReport(all(h is not None for _, h in steps), tuple(steps))


@dataclass(frozen=True)
class EquivalenceReport:
    verdicts: tuple[bool, bool, bool]
    per_eta: tuple  # (eta, c1, c2, c3)

    @property
    def cauchy(self) -> bool:
        return self.verdicts[0]

    def to_json(self) -> dict:
        return {"verdicts": list(self.verdicts),
                "per_eta": [[float(e), a, b, c] for e, a, b, c in self.per_eta]}


def check_cauchy_equivalences(vs: ValuedSequence, lam: LambdaSeq, horizon: int = DEFAULT_HORIZON,
                                 eps: float = DEFAULT_EPS) -> EquivalenceReport:
    """Evaluate three equivalent forms of metric lambda-statistical Cauchyness.

    (1) some ``N0`` with ``{k : rho(x_k, x_N0) >= eta}`` null;
    (2) a null ``G`` off which all terms are pairwise ``eta``-close;
    (3) the indices ``j`` whose ``D_j(eta) = {k : rho(x_k, x_j) >= eta}`` is
    non-null form a null set.
    The forms agree once quantified over every ``eta > 0``; a disagreement
    raises :class:`PropertyViolation`.
    """
    lam = as_lambda(lam)
    occ = _occurring(vs, horizon)

    def null(codes) -> bool:
        return _value_verdict(vs, frozenset(codes), lam, horizon, eps).is_null

    essential = [v for v in occ if not null({v})]
    rest = frozenset(occ) - set(essential)
    rows = []
    for eta in eta_grid(vs, horizon):
        c1 = any(null(w for w in occ if vs.distance(v, w) >= eta) for v in occ)
        c2 = null(rest) and all(vs.distance(a, b) < eta for a in essential for b in essential)
        bad = [v for v in occ if not null(w for w in occ if vs.distance(v, w) >= eta)]
        c3 = null(bad)
        rows.append((eta, c1, c2, c3))
    verdicts = tuple(all(r[i] for r in rows) for i in (1, 2, 3))
    if len(set(verdicts)) > 1:
        raise PropertyViolation("the three Cauchy forms disagree",
                                {"verdicts": list(verdicts),
                                 "per_eta": [[float(e), a, b, c] for e, a, b, c in rows]})
    return EquivalenceReport(verdicts, tuple(rows))


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


__all__ = [
    "CauchyReport",
    "ConvergenceReport",
    "Extraction",
    "Fibre",
    "HorizonError",
    "EquivalenceReport",
    "Pattern",
    "PointSets",
    "PreconditionError",
    "PropertyViolation",
    "SymbolicSequence",
    "UniquenessViolation",
    "ValuedSequence",
    "check_cauchy",
    "check_convergence",
    "check_cauchy_equivalences",
    "extract_full_density_subsequence",
    "find_limit",
    "metric_cauchy",
    "pair_off_null_set",
    "pairwise_distance_sequence",
    "point_sets",
    "symbolic_fibre",
    "term",
]

