from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from findeg.errors import PreconditionError, ValidationError
from findeg.invariants import (
    InvariantTable,
    MuContext,
    ZeroChain,
    check_kernel_in_ideal_power,
    check_pullback_degree,
    check_wedge_alternating_sum,
    check_degree_comparison,
    pullback_triples,
    mu,
    nu,
    separate,
    simp_degree,
    stabilization_r,
    vertex_group,
)
from findeg.simplicial import operators as ops
from findeg.simplicial.constructions import power, sphere, wedge
from findeg.simplicial.function_complex import pi0
from findeg.simplicial.modules import em_module

PAIRS = {
    "circle/em21": (lambda: sphere(1), (2, 1)),
    "circle/em31": (lambda: sphere(1), (3, 1)),
    "sphere2/em22": (lambda: sphere(2), (2, 2)),
    "wedge/em21": (lambda: wedge([sphere(1), sphere(1)]), (2, 1)),
    "wedge/em31": (lambda: wedge([sphere(1), sphere(1)]), (3, 1)),
    "torus/em21": (lambda: power(sphere(1), 2), (2, 1)),
    "torus/em22": (lambda: power(sphere(1), 2), (2, 2)),
}
_cache: dict = {}


def ctx_for(name) -> MuContext:
    if name not in _cache:
        K, (p, n) = PAIRS[name][0](), PAIRS[name][1]
        _cache[name] = MuContext(pi0(K, em_module(p, n)))
    return _cache[name]


def degenerate_by_faces(T, xs):
    """A tuple of q-simplices is degenerate iff one s_j d_j fixes every entry."""
    q = T.elem_dim(xs[0])
    return any(all(T.pullback(T.face(x, j), ops.codegeneracy(q - 1, j)) == x for x in xs) for j in range(q))


def brute_mu_is_zero(ctx, r, coeffs):
    for q in range(ctx.top(r) + 1):
        for k in ctx.simplices(r, q):
            chain = Counter()
            for i, c in enumerate(coeffs):
                if c % ctx.p:
                    xs = tuple(ctx.vertices[i](x) for x in k)
                    if q == 0 or not degenerate_by_faces(ctx.T, xs):
                        chain[xs] += int(c)
            if any(v % ctx.p for v in chain.values()):
                return False
    return True


# mu and its kernel


def test_kernel_of_mu_zero_is_the_augmentation_ideal():
    ctx = ctx_for("circle/em21")
    K0 = ctx.kernel(0)
    assert K0.shape[0] == 1 and int(K0[0].sum()) % 2 == 0
    assert ctx.kernel(1).shape[0] == 0


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_kernel_agrees_with_direct_mu(name, r, seed):
    ctx = ctx_for(name)
    coeffs = np.random.default_rng(seed).integers(0, ctx.p, size=ctx.n)
    in_kernel = ctx.kernel_space(r).contains(coeffs)
    assert mu(ctx, r, coeffs).is_zero() == in_kernel
    assert brute_mu_is_zero(ctx, r, coeffs) == in_kernel


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_mu_is_linear(name, r, seed):
    ctx = ctx_for(name)
    rng = np.random.default_rng(seed)
    a, b = (rng.integers(0, ctx.p, size=ctx.n) for _ in range(2))
    assert mu(ctx, r, a) + mu(ctx, r, b) == mu(ctx, r, (a + b) % ctx.p)


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_kernels_shrink(name):
    ctx = ctx_for(name)
    for r in range(3):
        assert ctx.kernel_space(r + 1) <= ctx.kernel_space(r)


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_kernel_rows_have_augmentation_zero(name):
    ctx = ctx_for(name)
    for r in range(3):
        assert not np.any(ctx.kernel(r).sum(axis=1) % ctx.p)


def test_nu_sums_over_classes():
    ctx = ctx_for("torus/em22")
    B = ZeroChain.vertex(ctx.context, 3) - ZeroChain.vertex(ctx.context, 0)
    v = nu(ctx, B)
    assert v.shape == (2,)
    assert ctx.nu_kernel().contains(B.dense()) == (not np.any(v))


@pytest.mark.parametrize("name,expected", [
    ("circle/em21", 1), ("circle/em31", 1), ("sphere2/em22", 1), ("wedge/em21", 2),
    ("wedge/em31", 2), ("torus/em21", 1), ("torus/em22", 1),
])
def test_stabilization_radius(name, expected):
    assert stabilization_r(ctx_for(name)) == expected


def test_stabilization_not_reached_below_the_radius():
    assert stabilization_r(ctx_for("wedge/em21"), r_max=1) is None


# degrees


def test_identity_table_has_degree_one():
    ctx = ctx_for("circle/em21")
    res = simp_degree(ctx, InvariantTable(ctx.context, 2, (0, 1)))
    assert res.degree == 1 and res.functional and len(res.digest) == 64


def test_constant_table_has_degree_zero():
    ctx = ctx_for("circle/em31")
    assert simp_degree(ctx, InvariantTable(ctx.context, 3, (2, 2, 2))).degree == 0


def test_r_max_zero_reports_exceeded():
    ctx = ctx_for("circle/em21")
    res = simp_degree(ctx, InvariantTable(ctx.context, 2, (0, 1)), r_max=0)
    assert res.degree is None and res.to_json()["simplicial_degree"] == "exceeds r_max"


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.integers(0, 2**32 - 1))
def test_degree_is_invariant_under_constants_and_scaling(name, seed):
    ctx = ctx_for(name)
    rng = np.random.default_rng(seed)
    vals = rng.integers(0, ctx.p, size=len(ctx.context.classes))
    c = int(rng.integers(0, ctx.p))
    s = int(rng.integers(1, ctx.p))
    f = InvariantTable(ctx.context, ctx.p, tuple(vals))
    g = InvariantTable(ctx.context, ctx.p, tuple((vals + c) % ctx.p))
    h = InvariantTable(ctx.context, ctx.p, tuple((vals * s) % ctx.p))
    d = simp_degree(ctx, f).degree
    assert simp_degree(ctx, g).degree == d == simp_degree(ctx, h).degree


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.integers(0, 2**32 - 1))
def test_degree_of_a_sum_is_at_most_the_max(name, seed):
    ctx = ctx_for(name)
    rng = np.random.default_rng(seed)
    a, b = (rng.integers(0, ctx.p, size=len(ctx.context.classes)) for _ in range(2))
    da = simp_degree(ctx, InvariantTable(ctx.context, ctx.p, tuple(a))).degree
    db = simp_degree(ctx, InvariantTable(ctx.context, ctx.p, tuple(b))).degree
    ds = simp_degree(ctx, InvariantTable(ctx.context, ctx.p, tuple((a + b) % ctx.p))).degree
    assert ds <= max(da, db)


@settings(max_examples=30, deadline=None)
@given(st.sampled_from(sorted(PAIRS)), st.integers(0, 2**32 - 1))
def test_every_table_is_bounded_by_the_stabilization_radius(name, seed):
    ctx = ctx_for(name)
    vals = np.random.default_rng(seed).integers(0, ctx.p, size=len(ctx.context.classes))
    d = simp_degree(ctx, InvariantTable(ctx.context, ctx.p, tuple(vals))).degree
    assert d is not None and d <= stabilization_r(ctx)


# tables


def test_table_json_round_trip_and_errors():
    P = ctx_for("circle/em31").context
    t = InvariantTable(P, 3, (0, 2, 1))
    assert InvariantTable.from_json(P, t.to_json(), 3) == t
    with pytest.raises(ValidationError, match="misses classes"):
        InvariantTable.from_json(P, {"values": {"b0": 1}}, 3)
    with pytest.raises(ValidationError, match="unknown vertex"):
        InvariantTable.from_json(P, {"values": {"b0": 1, "b1": 0, "b2": 0, "b9": 1}}, 3)
    with pytest.raises(ValidationError):
        InvariantTable.from_json(P, {"wrong": {}}, 3)


def test_table_conflict_within_a_class():
    P = ctx_for("torus/em22").context
    a, b = P.classes[0][:2]
    with pytest.raises(ValidationError, match="conflicting"):
        InvariantTable.from_json(P, {"values": {f"b{a}": 0, f"b{b}": 1}}, 2)


# separation


def test_separate_two_classes_with_identity_table():
    ctx = ctx_for("circle/em21")
    r, t = separate(ctx, 0, 1)
    assert r == 1 and t.values == (0, 1)


@pytest.mark.parametrize("name", ["circle/em31", "sphere2/em22", "wedge/em31", "torus/em22"])
def test_separation_degree_is_at_most_the_radius(name):
    ctx = ctx_for(name)
    s = stabilization_r(ctx)
    for u2 in range(1, len(ctx.context.classes)):
        r, t = separate(ctx, 0, u2)
        assert r <= s and t(0) != t(u2)
        assert simp_degree(ctx, t).degree <= r


def test_separate_equal_classes_is_an_error():
    with pytest.raises(ValidationError):
        separate(ctx_for("circle/em21"), 1, 1)


# checks


def test_vertex_group_is_abelian_of_the_right_order():
    G = vertex_group(ctx_for("wedge/em31"))
    assert len(G) == 9 and G.is_abelian


@pytest.mark.parametrize("name", sorted(PAIRS))
def test_kernel_inside_augmentation_power(name):
    for r in range(3):
        assert check_kernel_in_ideal_power(ctx_for(name), r)


@pytest.mark.parametrize("r", [1, 2])
def test_wedge_alternating_sum_vanishes(r):
    v = check_wedge_alternating_sum([sphere(1)] * (r + 1), r, 2)
    assert v.holds and v.detail["checked"] > 0


def test_wedge_alternating_sum_needs_r_plus_one_summands():
    with pytest.raises(PreconditionError):
        check_wedge_alternating_sum([sphere(1)] * 2, 2, 2)


def test_gentle_degree_bounded_by_simplicial_degree_at_two():
    v = check_degree_comparison(2)
    assert v.holds and v.detail["tables"] == 4


def test_gentle_and_simplicial_degree_at_three_on_the_minimal_circle():
    # On the one-edge circle every table on Z_3 has simplicial degree <= 1 while
    # the nonaffine tables have gentle degree 2; the subdivided circle restores
    # the inequality.  See the acceptance suite and the decisions ledger.
    v = check_degree_comparison(3, diagnostic_edges=3)
    assert v.detail["tables"] == 27
    assert v.detail["violations"] == 18
    assert not v.holds
    assert v.detail["polygon_diagnostic"]["violations"] == 0
    for row in v.detail["rows"]:
        assert row["simplicial_degree"] <= 1


def test_pulled_back_invariants_do_not_gain_degree():
    for k, h, f, meta in pullback_triples(10, 7):
        assert check_pullback_degree(k, h, f), meta
