"""t-norms and the triangle functions they induce on D+."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from ._num import as_ext
from .distfn import EPS0, StepDistFn, pointwise_leq, pointwise_max, random_dplus, unit_step

_TNORMS: dict[str, Callable[[Fraction, Fraction], Fraction]] = {
    "min": min,
    "prod": lambda a, b: a * b,
    "luk": lambda a, b: max(a + b - 1, Fraction(0)),
}

_ALIASES = {"minimum": "min", "product": "prod", "lukasiewicz": "luk"}


@dataclass(frozen=True)
class TNorm:
    kind: str

    def __post_init__(self):
        kind = _ALIASES.get(self.kind, self.kind)
        if kind not in _TNORMS:
            raise ValueError(f"unknown t-norm {self.kind!r}; expected one of {sorted(_TNORMS)}")
        object.__setattr__(self, "kind", kind)

    def __call__(self, a, b) -> Fraction:
        return _TNORMS[self.kind](a, b)


@dataclass(frozen=True)
class TriangleFn:
    """``tau_T(F, G)(x) = sup_{u + v = x} T(F(u), G(v))``."""

    tnorm: TNorm

    @classmethod
    def named(cls, name: str) -> TriangleFn:
        return cls(TNorm(name))

    @property
    def name(self) -> str:
        return self.tnorm.kind

    def __call__(self, F: StepDistFn, G: StepDistFn) -> StepDistFn:
        return apply_tau(self, F, G)


def apply_tau(tau: TriangleFn, F: StepDistFn, G: StepDistFn) -> StepDistFn:
    """Sup-convolution of two step functions in D+ under ``tau.tnorm``.

    ``F(u) = p_i`` needs ``u > a_i`` and ``G(v) = q_j`` needs ``v > b_j``, so the
    pair contributes ``T(p_i, q_j)`` exactly when ``x > a_i + b_j``.
    """
    if not (F.in_dplus and G.in_dplus):
        raise ValueError("triangle functions act on distance distribution functions only")
    T = tau.tnorm
    cands: dict = {}
    for a, p in F.jumps:
        for b, q in G.jumps:
            s, v = a + b, T(p, q)
            if v > cands.get(s, 0):
                cands[s] = v
    jumps = []
    running = Fraction(0)
    for s in sorted(cands):
        if cands[s] > running:
            running = cands[s]
            jumps.append((s, running))
    return StepDistFn(tuple(jumps), distance=True)


@dataclass
class LawReport:
    tau: str
    samples: int
    passed: dict
    counterexample: dict | None = None

    @property
    def ok(self) -> bool:
        return self.counterexample is None

    def to_json(self) -> dict:
        return {"tau": self.tau, "samples": self.samples, "passed": dict(self.passed), "ok": self.ok,
                "counterexample": self.counterexample}


def _equal(f, g, tol) -> bool:
    return pointwise_leq(f, g, tol) and pointwise_leq(g, f, tol)


def verify_triangle_laws(tau: TriangleFn, samples: int, seed: int = 0, tol=Fraction(1, 10**9)) -> LawReport:
    """Check commutativity, associativity, monotonicity and the identity on random triples."""
    if samples < 1:
        raise ValueError("samples must be >= 1")
    rng = random.Random(seed)
    passed = {"commutative": 0, "associative": 0, "monotone": 0, "identity": 0}
    for i in range(samples):
        F, G, H = (random_dplus(rng) for _ in range(3))
        bigger = pointwise_max(F, random_dplus(rng))
        checks = {
            "commutative": lambda: _equal(tau(F, G), tau(G, F), tol),
            "associative": lambda: _equal(tau(tau(F, G), H), tau(F, tau(G, H)), tol),
            "monotone": lambda: pointwise_leq(tau(bigger, G), tau(F, G), tol),
            "identity": lambda: tau(EPS0, F) == F and tau(F, EPS0) == F,
        }
        for law, check in checks.items():
            if not check():
                witness = {"law": law, "sample": i, "F": F.to_json(), "G": G.to_json(), "H": H.to_json()}
                if law == "monotone":
                    witness["F_bigger"] = bigger.to_json()
                return LawReport(tau.name, samples, passed, witness)
            passed[law] += 1
    return LawReport(tau.name, samples, passed)


def unit_steps_add(tau: TriangleFn, a, b) -> bool:
    """``tau(eps_a, eps_b) == eps_{a+b}`` exactly."""
    a, b = as_ext(a), as_ext(b)
    return tau(unit_step(a), unit_step(b)) == unit_step(a + b)


TAU_MIN = TriangleFn.named("min")
TAU_PROD = TriangleFn.named("prod")
TAU_LUK = TriangleFn.named("luk")
