from fractions import Fraction

import pytest

from pmseq.analysis import (
    Fibre,
    Pattern,
    PreconditionError,
    PropertyViolation,
    SymbolicSequence,
    UniquenessViolation,
    ValuedSequence,
    check_cauchy,
    check_cauchy_equivalences,
    check_convergence,
    extract_full_density_subsequence,
    find_limit,
    metric_cauchy,
    pair_off_null_set,
    pairwise_distance_sequence,
    point_sets,
    symbolic_fibre,
)
from pmseq.density import (
    AP,
    CEIL_SQRT,
    EMPTY,
    HALF,
    IDENTITY,
    NATURALS,
    Compl,
    Finite,
    Squares,
    Windows,
    classify_mask,
)
from pmseq.distfn import EPS0, StepDistFn, unit_step
from pmseq.pmspace import build_equilateral, build_simple
from pmseq.triangle import TAU_MIN

H = 10**5


@pytest.fixture(scope="module")
def space():
    G = StepDistFn(((Fraction(1, 10), Fraction(1, 2)), (Fraction(1, 2), 1)), distance=True)
    return build_simple("abc", {("a", "b"): 1, ("b", "c"): 1, ("a", "c"): 2}, G, TAU_MIN)


def const(space, label):
    return SymbolicSequence.constant(space, label)


def squares_to_b(space):
    return SymbolicSequence(space, Pattern.const("a"), Squares(), ["b"])


def windows_to_b(space):
    return SymbolicSequence(space, Pattern.const("a"), Windows(CEIL_SQRT, 4), ["b"])


# --------------------------------------------------------------------------
# sequences


def test_terms(space):
    assert squares_to_b(space).term(9) == "b" and squares_to_b(space).term(10) == "a"
    alt = SymbolicSequence(space, Pattern.periodic("a", "b"))
    assert alt.term(4) == "b" and alt.term(1) == "a"


def test_exception_pattern_runs_by_rank(space):
    seq = SymbolicSequence(space, Pattern.const("a"), AP(2, 2), ["b", "c"])
    assert [seq.term(k) for k in range(1, 9)] == ["a", "b", "a", "c", "a", "b", "a", "c"]
    codes = seq.codes(8)
    assert [seq.alphabet[c] for c in codes[1:]] == [seq.term(k) for k in range(1, 9)]


def test_prefix_patterns(space):
    seq = SymbolicSequence(space, Pattern(("a",), ("c", "b")))
    assert [seq.term(k) for k in range(1, 5)] == ["c", "b", "a", "a"]


def test_layered_overrides(space):
    seq = SymbolicSequence(space, Pattern.periodic("a", "b")).with_override(AP(3, 3), ["c"])
    got = [seq.term(k) for k in range(1, 7)]
    assert got == ["a", "b", "c", "b", "a", "c"]
    assert [seq.alphabet[c] for c in seq.codes(6)[1:]] == got


def test_unknown_label_rejected(space):
    with pytest.raises(KeyError):
        SymbolicSequence.constant(space, "z")


def test_json_round_trip(space):
    seq = squares_to_b(space).with_override(AP(5, 7), Pattern.periodic("c", "a"))
    again = SymbolicSequence.from_json(seq.to_json())
    assert [again.term(k) for k in range(1, 60)] == [seq.term(k) for k in range(1, 60)]


def test_symbolic_fibres_are_exact(space):
    seq = squares_to_b(space)
    assert symbolic_fibre(seq, {"b"}) == Squares()
    assert symbolic_fibre(seq, {"a"}) == Compl(Squares())
    assert symbolic_fibre(seq, {"a", "b"}) == NATURALS
    assert symbolic_fibre(seq, {"c"}) == EMPTY
    mixed = SymbolicSequence(space, Pattern.const("a"), Squares(), ["b", "c"])
    assert isinstance(symbolic_fibre(mixed, {"b"}), Fibre)
    f = symbolic_fibre(SymbolicSequence(space, Pattern.periodic("a", "b", "a")), {"a"})
    assert list(f.members(9)) == [1, 3, 4, 6, 7, 9]


# --------------------------------------------------------------------------
# convergence


def test_constant_sequence_converges(space):
    r = check_convergence(const(space, "a"), "a", IDENTITY, H)
    assert r.converges and all(e.exact == 0 for e in r.evidence)


def test_square_exceptions_converge_under_identity(space):
    assert check_convergence(squares_to_b(space), "a", IDENTITY, H).converges


def test_window_exceptions_separate_lambda_families(space):
    seq = windows_to_b(space)
    assert check_convergence(seq, "a", CEIL_SQRT, H).verdict == "diverges"
    assert check_convergence(seq, "a", IDENTITY, H).converges
    assert check_convergence(seq, "a", HALF, H).converges


def test_unknown_candidate(space):
    with pytest.raises(KeyError):
        check_convergence(const(space, "a"), "z", IDENTITY, H)


def test_sparse_positive_set_is_inconclusive(space):
    # density 1/100 is positive but below eps at any finite horizon
    seq = SymbolicSequence(space, Pattern.const("a"), AP(1, 100), ["b"])
    assert check_convergence(seq, "a", IDENTITY, H).verdict == "inconclusive"


def test_find_limit(space):
    assert find_limit(const(space, "a"), IDENTITY, H) == "a"
    assert find_limit(squares_to_b(space), IDENTITY, H) == "a"
    assert not check_convergence(squares_to_b(space), "b", IDENTITY, H).converges
    assert find_limit(SymbolicSequence(space, Pattern.periodic("a", "b")), IDENTITY, H) is None


def test_close_points_are_still_separated(space):
    # distinct points are separated below t*, however close they are
    close = build_equilateral("ab", unit_step(Fraction(1, 10)), TAU_MIN)
    assert find_limit(SymbolicSequence(close, Pattern.periodic("a", "b")), IDENTITY, H) is None
    assert find_limit(SymbolicSequence.constant(close, "b"), IDENTITY, H) == "b"
    assert issubclass(UniquenessViolation, PropertyViolation)


# --------------------------------------------------------------------------
# Cauchy


def test_constant_is_cauchy_with_first_index(space):
    r = check_cauchy(const(space, "a"), IDENTITY, H)
    assert r.cauchy and all(s.witness == 1 for s in r.steps)


def test_planted_convergent_is_cauchy(space):
    r = check_cauchy(squares_to_b(space), IDENTITY, H)
    assert r.cauchy and all(s.label == "a" for s in r.steps)


def test_alternating_is_not_cauchy(space):
    r = check_cauchy(SymbolicSequence(space, Pattern.periodic("a", "b")), IDENTITY, H)
    assert not r.cauchy
    assert r.steps[0].witness is None


def test_pair_off_constant_is_empty(space):
    for p in pair_off_null_set(const(space, "a"), IDENTITY, H):
        assert p.H == EMPTY and p.H_verdict.is_null


def test_pair_off_planted_uses_exception_set(space):
    seq = squares_to_b(space)
    out = pair_off_null_set(seq, IDENTITY, H)
    assert all(p.H_verdict.is_null and p.G_verdict.kind == "positive" for p in out)
    small = [p for p in out if p.eta < space.t_star]
    assert small and all(p.H == Squares() for p in small)


def test_pair_off_requires_cauchy(space):
    with pytest.raises(PreconditionError):
        pair_off_null_set(SymbolicSequence(space, Pattern.periodic("a", "b")), IDENTITY, H)


# --------------------------------------------------------------------------
# full-density extraction


def test_extraction_constant_gives_all_indices(space):
    ex = extract_full_density_subsequence(const(space, "a"), "a", IDENTITY, H)
    assert ex.G.mask(1000)[1:].all()
    assert all(u == t for t, u in ex.thresholds)


def test_extraction_square_exceptions(space):
    seq = squares_to_b(space)
    ex = extract_full_density_subsequence(seq, "a", IDENTITY, H)
    assert all(d >= 0.98 for n, d in ex.checkpoints if n >= 10**4)
    assert ex.converges_along_G
    u1 = ex.thresholds[0][1]
    G = ex.G.mask(H)
    nonsq = Compl(Squares()).mask(H)
    assert (G[u1:] >= nonsq[u1:]).all()
    us = [u for _, u in ex.thresholds]
    assert us == sorted(set(us))


def test_extraction_requires_convergence(space):
    with pytest.raises(PreconditionError):
        extract_full_density_subsequence(windows_to_b(space), "a", CEIL_SQRT, H)


# --------------------------------------------------------------------------
# limit and cluster points


def test_points_of_convergent_sequence(space):
    ps = point_sets(squares_to_b(space), IDENTITY, H)
    assert ps.stat_limit_points == ps.stat_cluster_points == {"a"}
    assert ps.strong_limit_points == {"a", "b"}


def test_points_of_alternating_sequence(space):
    ps = point_sets(SymbolicSequence(space, Pattern.periodic("a", "b")), IDENTITY, H)
    assert ps.stat_limit_points == ps.stat_cluster_points == {"a", "b"}


def test_points_with_finite_exceptions(space):
    seq = SymbolicSequence(space, Pattern.const("a"), Finite((3, 7)), ["b"])
    ps = point_sets(seq, IDENTITY, H)
    assert ps.stat_limit_points == ps.stat_cluster_points == ps.strong_limit_points == {"a"}


# --------------------------------------------------------------------------
# metric-space sequences


def test_distance_sequence_of_constants(space):
    vs = pairwise_distance_sequence(const(space, "a"), const(space, "a"))
    codes = vs.codes(50)[1:]
    assert len(set(codes.tolist())) == 1 and vs.values[codes[0]] == EPS0
    assert metric_cauchy(vs, IDENTITY, H).cauchy


def test_distance_sequence_of_planted(space):
    x = squares_to_b(space)
    g = SymbolicSequence(space, Pattern.const("c"), AP(1, 10**6), ["a"])
    assert metric_cauchy(pairwise_distance_sequence(x, g), IDENTITY, H).cauchy


def test_distance_sequence_alternating(space):
    vs = pairwise_distance_sequence(SymbolicSequence(space, Pattern.periodic("a", "b")), const(space, "a"))
    assert not metric_cauchy(vs, IDENTITY, H).cauchy


def test_distance_sequence_needs_same_space(space):
    other = build_equilateral("ab", unit_step(1), TAU_MIN)
    with pytest.raises(ValueError):
        pairwise_distance_sequence(const(space, "a"), SymbolicSequence.constant(other, "a"))


def rational(seq_base, exceptions=EMPTY, values=None):
    return ValuedSequence.from_symbolic(SymbolicSequence(None, seq_base, exceptions, values))


def test_equivalences_constant():
    rep = check_cauchy_equivalences(rational(Pattern.const(Fraction(1, 2))), IDENTITY, H)
    assert rep.verdicts == (True, True, True)


def test_equivalences_planted():
    vs = rational(Pattern.const(Fraction(0)), Squares(), Pattern((Fraction(3), Fraction(5))))
    assert check_cauchy_equivalences(vs, IDENTITY, H).verdicts == (True, True, True)


def test_equivalences_alternating():
    vs = rational(Pattern.periodic(Fraction(0), Fraction(1)))
    rep = check_cauchy_equivalences(vs, IDENTITY, H)
    assert rep.verdicts == (False, False, False)
    small = rep.per_eta[0]
    assert small[1:] == (False, False, False)


def test_per_eta_forms_may_differ_but_aggregate_agrees():
    # 0 and 2 essential, 1 on a null set: at eta = 1.5 the middle value is a witness for form (1)
    vs = rational(Pattern.periodic(Fraction(0), Fraction(2)), Squares(), [Fraction(1)])
    rep = check_cauchy_equivalences(vs, IDENTITY, H)
    assert rep.verdicts == (False, False, False)
    assert any(c1 and not c2 for _, c1, c2, _ in rep.per_eta)


def test_fibre_mask_matches_terms(space):
    seq = SymbolicSequence(space, Pattern.const("a"), Squares(), ["b", "c"])
    f = Fibre(seq, frozenset({"c"}))
    m = f.mask(400)
    assert [bool(b) for b in m[1:]] == [seq.term(k) == "c" for k in range(1, 401)]
    assert classify_mask(f.mask(H), IDENTITY, H).is_null
