"""Property-verification suite over seeded random instances.

Every entry draws ``instances`` independent instances from a ``random.Random``
seeded by ``(seed, entry id, instance index)``, so any single instance can be
replayed from its witness file. Reports contain no timing or host data and are
serialized with sorted keys, which makes them byte-identical across runs.
"""

from __future__ import annotations

import json
import os
import random
import traceback
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from ..analysis import (
    Pattern,
    PropertyViolation,
    SymbolicSequence,
    ValuedSequence,
    check_cauchy,
    check_convergence,
    check_cauchy_equivalences,
    extract_full_density_subsequence,
    fibre_verdict,
    find_limit,
    metric_cauchy,
    pair_off_null_set,
    pairwise_distance_sequence,
    point_sets,
)
from ..density import (
    AP,
    Compl,
    Union,
    as_lambda,
    classify_mask,
    empirical_density,
)
from ..distfn import EPS0, distance_to_eps0, levy_distance, near_eps0, random_dplus
from ..pmspace import PMSpace, strong_closure, strong_neighborhood, verify_axioms
from ..triangle import verify_triangle_laws
from .generate import (
    LAMBDA_NAMES,
    TAUS,
    eventually_constant,
    planted_convergent,
    random_equilateral,
    random_lambda,
    random_nonnull_set,
    random_null_set,
    random_sequence,
    random_simple,
    random_space,
    random_values,
)

SUITE_HORIZON = 10**5
DEFAULT_INSTANCES = 100
# entries whose stated invariant asks for a larger sample
DEFAULT_COUNTS = {"limit-uniqueness": 500, "point-set-chain": 500}


class Failure(Exception):
    """An expected property did not hold on the current instance."""


@dataclass
class Instance:
    rng: random.Random
    horizon: int
    eps: float
    config: dict
    inputs: dict = field(default_factory=dict)

    def record(self, **kw):
        for k, v in kw.items():
            self.inputs[k] = v.to_json() if hasattr(v, "to_json") else v

    def expect(self, cond: bool, message: str, **details):
        if not cond:
            raise Failure(json.dumps({"message": message, **details}, sort_keys=True, default=str))


@dataclass(frozen=True)
class Entry:
    id: str
    statement: str
    check: Callable[[Instance], None]


# --------------------------------------------------------------------------
# convergence


def _space_lam(inst: Instance, max_points: int = 5):
    space = random_space(inst.rng, 2, max_points)
    lam = random_lambda(inst.rng)
    inst.record(lam=lam.to_json())
    return space, lam


def limit_uniqueness(inst: Instance):
    space, lam = _space_lam(inst)
    if inst.rng.random() < 0.5:
        seq, L = planted_convergent(inst.rng, space, lam)
    else:
        seq, L = random_sequence(inst.rng, space, lam), None
    inst.record(sequence=seq, planted_limit=L)
    got = find_limit(seq, lam, inst.horizon, inst.eps)
    if L is not None:
        inst.expect(got == L, "planted limit not recovered", found=got)


def strong_implies_statistical(inst: Instance):
    space = random_space(inst.rng)
    seq, y = eventually_constant(inst.rng, space)
    inst.record(sequence=seq, limit=y)
    for name in LAMBDA_NAMES:
        r = check_convergence(seq, y, as_lambda(name), inst.horizon, inst.eps)
        inst.expect(r.converges, "eventually constant sequence fails to converge", lam=name, verdict=r.verdict)


def full_density_extraction(inst: Instance):
    space, lam = _space_lam(inst)
    seq, L = planted_convergent(inst.rng, space, lam)
    inst.record(sequence=seq, limit=L)
    ex = extract_full_density_subsequence(seq, L, lam, inst.horizon, inst.eps)
    inst.record(G=ex.G)
    last = ex.checkpoints[-1][1]
    inst.expect(last >= 1 - inst.eps, "extracted set is not of density close to 1", checkpoints=ex.checkpoints)
    inst.expect(ex.converges_along_G, "subsequence along G leaves a neighborhood", tails=str(ex.tails))


def full_density_sufficiency(inst: Instance):
    space, lam = _space_lam(inst)
    L = inst.rng.choice(space.points)
    G = Compl(random_null_set(inst.rng, lam))
    base = SymbolicSequence(space, random_values(inst.rng, space.points, inst.rng.randint(1, 4)))
    seq = base.with_override(G, [L])
    inst.record(sequence=seq, limit=L, G=G)
    r = check_convergence(seq, L, lam, inst.horizon, inst.eps)
    inst.expect(r.converges, "sequence converging along a density-one set is not convergent", verdict=r.verdict)


def almost_everywhere_agreement(inst: Instance):
    space, lam = _space_lam(inst)
    g, y = eventually_constant(inst.rng, space)
    x = g.with_override(random_null_set(inst.rng, lam), random_values(inst.rng, space.points))
    inst.record(sequence=x, limit=y)
    r = check_convergence(x, y, lam, inst.horizon, inst.eps)
    inst.expect(r.converges, "null perturbation of a convergent sequence diverges", verdict=r.verdict)


# --------------------------------------------------------------------------
# Cauchy


def convergent_implies_cauchy(inst: Instance):
    space, lam = _space_lam(inst)
    seq, L = planted_convergent(inst.rng, space, lam)
    inst.record(sequence=seq, limit=L)
    r = check_cauchy(seq, lam, inst.horizon, inst.eps)
    inst.expect(r.cauchy, "convergent sequence is not Cauchy", report=r.to_json())


def cauchy_pair_off(inst: Instance):
    space, lam = _space_lam(inst)
    seq, _ = planted_convergent(inst.rng, space, lam)
    inst.record(sequence=seq)
    for p in pair_off_null_set(seq, lam, inst.horizon, inst.eps, samples=10_000,
                               seed=inst.rng.randrange(2**32)):
        inst.expect(p.H_verdict.is_null, "H_t is not null", t=str(p.t))
        inst.expect(p.G_verdict.kind == "positive", "G_t is not of positive density", t=str(p.t))


def distance_sequence_cauchy(inst: Instance):
    space, lam = _space_lam(inst)
    x, _ = planted_convergent(inst.rng, space, lam)
    g, _ = planted_convergent(inst.rng, space, lam)
    inst.record(x=x, g=g)
    # off the union of two null exception sets; subadditivity gives the 2 * eps bound
    r = metric_cauchy(pairwise_distance_sequence(x, g), lam, inst.horizon, 2 * inst.eps)
    inst.expect(r.cauchy, "distance sequence of two Cauchy sequences is not Cauchy", report=r.to_json())


def _rational(rng: random.Random) -> Fraction:
    return Fraction(rng.randint(-20, 20), rng.randint(1, 6))


def cauchy_three_forms(inst: Instance):
    lam = random_lambda(inst.rng)
    inst.record(lam=lam.to_json())
    kind = inst.rng.choice(("constant", "planted", "alternating", "distances"))
    if kind == "distances":
        space = random_space(inst.rng)
        x, g = (random_sequence(inst.rng, space, lam) for _ in range(2))
        inst.record(x=x, g=g)
        vs, expected = pairwise_distance_sequence(x, g), None
    else:
        a = _rational(inst.rng)
        if kind == "constant":
            seq, expected = SymbolicSequence(None, Pattern.const(a)), True
        elif kind == "planted":
            vals = Pattern(tuple(a + 1 + _rational(inst.rng) ** 2 for _ in range(2)))
            seq, expected = SymbolicSequence(None, Pattern.const(a), random_null_set(inst.rng, lam), vals), True
        else:
            seq, expected = SymbolicSequence(None, Pattern.periodic(a, a + Fraction(1, inst.rng.randint(1, 9)))), False
        inst.record(sequence=seq)
        vs = ValuedSequence.from_symbolic(seq)
    rep = check_cauchy_equivalences(vs, lam, inst.horizon, inst.eps)
    if expected is not None:
        inst.expect(rep.cauchy == expected, "unexpected Cauchy verdict", kind=kind, verdicts=rep.verdicts)
    mc = metric_cauchy(vs, lam, inst.horizon, inst.eps)
    inst.expect(mc.cauchy == rep.cauchy, "metric Cauchy test disagrees with the three forms")


# --------------------------------------------------------------------------
# limit and cluster points


def point_set_chain(inst: Instance):
    space, lam = _space_lam(inst)
    seq = random_sequence(inst.rng, space, lam)
    inst.record(sequence=seq)
    point_sets(seq, lam, inst.horizon, inst.eps)


def convergent_point_sets(inst: Instance):
    space, lam = _space_lam(inst)
    seq, L = planted_convergent(inst.rng, space, lam)
    inst.record(sequence=seq, limit=L)
    ps = point_sets(seq, lam, inst.horizon, inst.eps)
    inst.expect(ps.stat_limit_points == ps.stat_cluster_points == {L},
                "limit and cluster points of a convergent sequence are not its limit", points=ps.to_json())


def null_perturbation_point_sets(inst: Instance):
    space, lam = _space_lam(inst)
    x = random_sequence(inst.rng, space, lam)
    y = x.with_override(random_null_set(inst.rng, lam), random_values(inst.rng, space.points))
    inst.record(x=x, y=y)
    # y's fibres add one more null set to x's, hence the 2 * eps bound
    px, py = point_sets(x, lam, inst.horizon, inst.eps), point_sets(y, lam, inst.horizon, 2 * inst.eps)
    inst.expect(px.stat_limit_points == py.stat_limit_points
                and px.stat_cluster_points == py.stat_cluster_points,
                "sequences differing on a null set have different point sets",
                x_points=px.to_json(), y_points=py.to_json())


def cluster_points_closed(inst: Instance):
    space, lam = _space_lam(inst)
    seq = random_sequence(inst.rng, space, lam)
    inst.record(sequence=seq)
    gamma = point_sets(seq, lam, inst.horizon, inst.eps).stat_cluster_points
    if gamma:
        closure = strong_closure(space, gamma)
        inst.expect(closure == gamma, "cluster point set is not closed",
                    gamma=sorted(gamma), closure=sorted(closure))


def _random_subset(rng: random.Random, pool) -> frozenset:
    pool = sorted(pool)
    return frozenset(rng.sample(pool, rng.randint(1, len(pool))))


def cluster_avoidance(inst: Instance):
    space, lam = _space_lam(inst)
    seq = random_sequence(inst.rng, space, lam)
    inst.record(sequence=seq)
    gamma = point_sets(seq, lam, inst.horizon, inst.eps).stat_cluster_points
    rest = set(space.points) - gamma
    if rest:
        C = _random_subset(inst.rng, rest)
        inst.record(C=sorted(C))
        v = fibre_verdict(seq, C, lam, inst.horizon, inst.eps)
        inst.expect(v.is_null, "a set avoiding every cluster point is visited non-thinly", verdict=v.to_json())


def nonthin_forces_cluster(inst: Instance):
    space, lam = _space_lam(inst)
    C = _random_subset(inst.rng, space.points)
    base = random_sequence(inst.rng, space, lam)
    seq = base.with_override(random_nonnull_set(inst.rng), random_values(inst.rng, sorted(C)))
    inst.record(sequence=seq, C=sorted(C))
    gamma = point_sets(seq, lam, inst.horizon, inst.eps).stat_cluster_points
    inst.expect(bool(gamma & C), "a non-thin visit to C leaves no cluster point in C", gamma=sorted(gamma))


def bounded_has_cluster(inst: Instance):
    space, lam = _space_lam(inst)
    C = _random_subset(inst.rng, space.points)
    base = SymbolicSequence(space, random_values(inst.rng, sorted(C), inst.rng.randint(1, 4)))
    seq = base.with_override(random_null_set(inst.rng, lam), random_values(inst.rng, space.points))
    inst.record(sequence=seq, C=sorted(C))
    gamma = point_sets(seq, lam, inst.horizon, inst.eps).stat_cluster_points
    inst.expect(bool(gamma) and gamma <= C, "bounded sequence has no cluster point inside its bound",
                gamma=sorted(gamma))


# --------------------------------------------------------------------------
# density, distance and space invariants


def density_progressions(inst: Instance):
    d = inst.rng.randint(1, 9)
    a = inst.rng.randint(1, d)
    lam = random_lambda(inst.rng)
    M = AP(a, d)
    inst.record(set=M, lam=lam.to_json())
    for n in (10**3, 10**4, min(10**5, inst.horizon)):
        got = empirical_density(M, lam, n)
        inst.expect(abs(got - Fraction(1, d)) <= Fraction(d, lam(n)), "AP window count off", n=n,
                    got=str(got))


def density_null_rules(inst: Instance):
    """Union and complement rules: exact on skeletons, window-by-window otherwise.

    Window counts are subadditive, so the union's ratio sup is bounded by the
    sum of the parts' sups at the same horizon.
    """
    lam = random_lambda(inst.rng)
    A, B = random_null_set(inst.rng, lam), random_null_set(inst.rng, lam)
    inst.record(A=A, B=B, lam=lam.to_json())
    va, vb = (classify_mask(S.mask(inst.horizon), lam, inst.horizon, inst.eps) for S in (A, B))
    inst.expect(va.is_null and vb.is_null, "catalog set is not null", A=va.to_json(), B=vb.to_json())
    vu = classify_mask(Union((A, B)).mask(inst.horizon), lam, inst.horizon, inst.eps)
    inst.expect(vu.limsup <= va.limsup + vb.limsup + 1e-12, "union exceeds the sum of its parts",
                union=vu.to_json())
    sk = Union((A, B)).skeleton()
    if sk is not None:
        inst.expect(not sk[1], "symbolic union of null sets has positive density")
    comp = classify_mask(Compl(A).mask(inst.horizon), lam, inst.horizon, inst.eps)
    inst.expect(abs(comp.liminf - (1 - va.limsup)) < 1e-9, "complement density is not 1 - density",
                complement=comp.to_json())
    sk = Compl(A).skeleton()
    if sk is not None:
        inst.expect(len(sk[1]) == sk[0], "symbolic complement density is not 1")


def space_axioms(inst: Instance):
    n = inst.rng.randint(1, 12)
    space = random_equilateral(inst.rng, n) if inst.rng.random() < 0.5 else random_simple(inst.rng, n)
    inst.record(space=space)
    rep = verify_axioms(space)
    inst.expect(rep.ok, "generated space violates an axiom", report=rep.to_json())


def neighborhoods_below_t_star(inst: Instance):
    space = random_space(inst.rng, 1, 8)
    inst.record(space=space)
    for x in space.points:
        for t in (space.t_star / 2, space.t_star):
            inst.expect(strong_neighborhood(space, x, t) == {x}, "neighborhood below t* is not a singleton",
                        x=x, t=str(t))


def triangle_laws(inst: Instance):
    tau = inst.rng.choice(TAUS)
    rep = verify_triangle_laws(tau, samples=2, seed=inst.rng.randrange(2**32))
    inst.expect(rep.ok, "triangle function law fails", report=rep.to_json())


def levy_threshold(inst: Instance):
    h = random_dplus(inst.rng)
    inst.record(h=h)
    d = levy_distance(h, EPS0)
    exact = distance_to_eps0(h)
    inst.expect(abs(d.value - float(exact)) <= 2e-9, "bisection and exact distance to eps_0 differ",
                bisection=d.value, exact=str(exact))
    for k in range(1, 20):
        t = Fraction(k, 20)
        if abs(float(t) - d.value) > 2e-9:
            inst.expect(near_eps0(h, t) == (d.value < t), "threshold equivalence fails", t=str(t))


def given_space_axioms(inst: Instance):
    """Configured spaces must satisfy the axioms (``extra_spaces`` in the config)."""
    spaces = inst.config.get("extra_spaces", [])
    for i, obj in enumerate(spaces):
        space = PMSpace.from_json(obj)
        rep = verify_axioms(space)
        inst.record(space_index=i, space=space)
        inst.expect(rep.ok, "configured space violates an axiom", report=rep.to_json())


ENTRIES: tuple[Entry, ...] = (
    Entry("limit-uniqueness", "a sequence has at most one strong lambda-statistical limit", limit_uniqueness),
    Entry("strong-implies-statistical", "strong convergence implies strong lambda-statistical convergence",
          strong_implies_statistical),
    Entry("full-density-extraction", "a convergent sequence converges strongly along a density-one set",
          full_density_extraction),
    Entry("full-density-sufficiency", "strong convergence along a density-one set implies convergence",
          full_density_sufficiency),
    Entry("almost-everywhere-agreement", "agreeing a.e. with a strongly convergent sequence implies convergence",
          almost_everywhere_agreement),
    Entry("convergent-implies-cauchy", "convergent sequences are Cauchy", convergent_implies_cauchy),
    Entry("cauchy-pair-off", "Cauchy sequences are pairwise close off a null set", cauchy_pair_off),
    Entry("distance-sequence-cauchy", "distance distributions of Cauchy sequences are Cauchy in (D+, d_L)",
          distance_sequence_cauchy),
    Entry("cauchy-three-forms", "three forms of metric lambda-statistical Cauchyness agree", cauchy_three_forms),
    Entry("point-set-chain", "stat. limit points <= stat. cluster points <= limit points", point_set_chain),
    Entry("convergent-point-sets", "a convergent sequence has its limit as only limit and cluster point",
          convergent_point_sets),
    Entry("null-perturbation-point-sets", "null perturbations keep limit and cluster points",
          null_perturbation_point_sets),
    Entry("cluster-points-closed", "the set of cluster points is closed", cluster_points_closed),
    Entry("cluster-avoidance", "sets avoiding all cluster points are visited thinly", cluster_avoidance),
    Entry("nonthin-forces-cluster", "a non-thin visit to C yields a cluster point in C", nonthin_forces_cluster),
    Entry("bounded-has-cluster", "statistically bounded sequences have cluster points in the bound",
          bounded_has_cluster),
    Entry("density-progressions", "arithmetic progressions with step d have density 1/d", density_progressions),
    Entry("density-null-rules", "null sets are closed under union; complements have density 1",
          density_null_rules),
    Entry("space-axioms", "generated equilateral and simple spaces satisfy the axioms", space_axioms),
    Entry("neighborhoods-below-t-star", "strong neighborhoods below t* are singletons",
          neighborhoods_below_t_star),
    Entry("triangle-laws", "triangle functions are commutative, associative, monotone, with identity eps_0",
          triangle_laws),
    Entry("levy-threshold", "h(t) > 1 - t iff d_L(h, eps_0) < t", levy_threshold),
    Entry("given-space-axioms", "configured spaces satisfy the axioms", given_space_axioms),
)

ENTRY_BY_ID = {e.id: e for e in ENTRIES}
SUITES = {
    "all": tuple(e.id for e in ENTRIES),
    "analysis": tuple(e.id for e in ENTRIES[:16]),
    "foundations": tuple(e.id for e in ENTRIES[16:]),
}


# --------------------------------------------------------------------------
# running


@dataclass(frozen=True)
class EntryResult:
    id: str
    statement: str
    instances: int
    passed: int
    counterexample: dict | None = None
    witness_file: str | None = None

    @property
    def ok(self) -> bool:
        return self.passed == self.instances

    def to_json(self) -> dict:
        return {"id": self.id, "statement": self.statement, "instances": self.instances,
                "passed": self.passed, "ok": self.ok, "first_counterexample": self.counterexample,
                "witness_file": self.witness_file}


@dataclass(frozen=True)
class SuiteReport:
    seed: int
    horizon: int
    eps: float
    entries: tuple[EntryResult, ...]

    @property
    def ok(self) -> bool:
        return all(e.ok for e in self.entries)

    def to_json(self) -> dict:
        return {"seed": self.seed, "horizon": self.horizon, "eps": self.eps, "ok": self.ok,
                "entries": [e.to_json() for e in self.entries]}

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, indent=2) + "\n"

    def table(self) -> str:
        width = max([len(e.id) for e in self.entries] + [5])
        lines = [f"{'entry'.ljust(width)}  passed  status"]
        for e in self.entries:
            lines.append(f"{e.id.ljust(width)}  {e.passed:>3}/{e.instances:<3} {'ok' if e.ok else 'FAIL'}")
        lines.append(f"overall: {'ok' if self.ok else 'FAIL'}")
        return "\n".join(lines) + "\n"


def instance_seed(seed: int, entry_id: str, index: int) -> str:
    return f"{seed}:{entry_id}:{index}"


def run_instance(entry_id: str, rng_seed: str, horizon: int, eps: float, config: dict | None = None):
    """Run one instance; return None on success or a witness dict on failure."""
    entry = ENTRY_BY_ID[entry_id]
    inst = Instance(random.Random(rng_seed), horizon, eps, config or {})
    try:
        entry.check(inst)
    except Failure as exc:
        return _witness(entry, rng_seed, horizon, eps, inst, json.loads(str(exc)))
    except PropertyViolation as exc:
        return _witness(entry, rng_seed, horizon, eps, inst,
                        {"message": str(exc), "witness": _jsonable(exc.witness)})
    except Exception as exc:  # noqa: BLE001 - failures are report entries, not crashes
        return _witness(entry, rng_seed, horizon, eps, inst,
                        {"message": f"{type(exc).__name__}: {exc}",
                         "traceback": traceback.format_exception_only(type(exc), exc)})
    return None


def _jsonable(obj):
    return json.loads(json.dumps(obj, sort_keys=True, default=str))


def _witness(entry, rng_seed, horizon, eps, inst, failure) -> dict:
    return _jsonable({"entry": entry.id, "statement": entry.statement, "rng_seed": rng_seed,
                      "horizon": horizon, "eps": eps, "config": inst.config, "inputs": inst.inputs,
                      "failure": failure})


def _run_entry(args) -> EntryResult:
    entry_id, seed, n, horizon, eps, config, witness_dir = args
    entry = ENTRY_BY_ID[entry_id]
    if entry_id == "given-space-axioms":
        n = 1 if config.get("extra_spaces") else 0
    passed, first, path = 0, None, None
    for i in range(n):
        rng_seed = instance_seed(seed, entry_id, i)
        w = run_instance(entry_id, rng_seed, horizon, eps, config)
        if w is None:
            passed += 1
            continue
        if witness_dir is not None:
            os.makedirs(witness_dir, exist_ok=True)
            name = f"{entry_id}-{i}.json"
            with open(os.path.join(witness_dir, name), "w", encoding="utf-8") as fh:
                json.dump(w, fh, sort_keys=True, indent=2)
            w = {**w, "file": name}
        if first is None:
            first, path = w, w.get("file")
    return EntryResult(entry_id, entry.statement, n, passed, first, path)


def run_suite(config: dict | None = None) -> SuiteReport:
    """Run the configured entries.

    ``config`` keys: ``suite`` (name in :data:`SUITES`) or ``entries`` (list of
    ids), ``seed`` (default 42), ``instances`` (an integer for every entry, or a
    per-entry mapping; default 100, and 500 for the entries in
    :data:`DEFAULT_COUNTS`), ``horizon`` (default 10**5), ``eps`` (default 0.02),
    ``extra_spaces`` (PM-space JSON objects that must satisfy the axioms),
    ``witness_dir`` (where failing instances are written) and ``jobs``.
    """
    config = dict(config or {})
    seed = int(config.get("seed", 42))
    horizon = int(config.get("horizon", SUITE_HORIZON))
    eps = float(config.get("eps", 0.02))
    if "entries" in config:
        ids = list(config["entries"])
    else:
        ids = list(SUITES[config.get("suite", "all")])
    unknown = [i for i in ids if i not in ENTRY_BY_ID]
    if unknown:
        raise KeyError(f"unknown suite entries: {unknown}")
    counts = config.get("instances")
    if counts is None:
        counts = DEFAULT_COUNTS
    elif not isinstance(counts, dict):
        counts = {i: int(counts) for i in ids}
    witness_dir = config.get("witness_dir")
    shared = {k: v for k, v in config.items() if k == "extra_spaces"}
    jobs = [(i, seed, int(counts.get(i, DEFAULT_INSTANCES)), horizon, eps, shared, witness_dir) for i in ids]
    n_jobs = int(config.get("jobs", 1))
    if n_jobs > 1 and len(jobs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(n_jobs) as pool:
            results = list(pool.map(_run_entry, jobs))
    else:
        results = [_run_entry(j) for j in jobs]
    return SuiteReport(seed, horizon, eps, tuple(results))


def replay(witness: dict) -> dict | None:
    """Re-run the instance a witness file was written for."""
    return run_instance(witness["entry"], witness["rng_seed"], witness["horizon"], witness["eps"],
                        witness.get("config"))


__all__ = ["ENTRIES", "SUITES", "SuiteReport", "EntryResult", "replay", "run_instance", "run_suite"]

