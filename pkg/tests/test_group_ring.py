import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from findeg.errors import CapExceeded, PreconditionError, StructuralError, ValidationError
from findeg.group_ring import (
    FinGroup,
    GroupFunction,
    GroupRingElt,
    aug_ideal_powers,
    augmentation,
    check_composition_bound,
    check_coprime_relation,
    check_integer_polynomial,
    check_ideal_nilpotence,
    check_projection_kernels,
    check_perfect_stability,
    check_product_gentle,
    check_pushforward_bound,
    gentle_defect,
    gentle_degree,
    pushforward,
    word_element,
)
from findeg.linalg_gf import subspace_leq


def alternating_sum_oracle(f, r):
    """+f on every (1-[g_1])...(1-[g_{r+1}]), expanded by inclusion-exclusion."""
    G = f.domain
    for gs in itertools.product(G.elements, repeat=r + 1):
        total = 0
        for mask in range(2 ** (r + 1)):
            x = G.identity
            for i, g in enumerate(gs):
                if mask >> i & 1:
                    x = G.mul(x, g)
            total += (-1) ** bin(mask).count("1") * int(f(x))
        if total % f.p:
            return False
    return True


def oracle_degree(f, rmax=8):
    for r in range(rmax + 1):
        if alternating_sum_oracle(f, r):
            return r
    return None


Z2, Z3 = FinGroup.cyclic_sum((2,)), FinGroup.cyclic_sum((3,))


# groups


def test_cyclic_sum_table_is_addition():
    G = FinGroup.cyclic_sum((2, 3))
    assert len(G) == 6
    assert G.mul((1, 2), (1, 2)) == (0, 1)
    assert G.identity == (0, 0)
    assert G.element_order((1, 1)) == 6


def test_rejects_non_group_tables():
    with pytest.raises(ValidationError):
        FinGroup(["a", "b"], [["a", "a"], ["a", "b"]])  # no identity
    # identity e, but x*x = y, y*y = x, x*y = x breaks inverses / associativity
    with pytest.raises(ValidationError):
        FinGroup("exy", [list("exy"), list("xyx"), list("yxe")])


def test_rejects_wrong_presentation():
    with pytest.raises(ValidationError):
        FinGroup([(0,), (1,)], [[(0,), (1,)], [(1,), (0,)]], orders=(3,))


def test_a5_is_nonabelian_of_order_60():
    A = FinGroup.alternating_group_5()
    assert len(A) == 60 and not A.is_abelian
    assert A.identity == (0, 1, 2, 3, 4)


def test_group_json_round_trip():
    G = FinGroup.cyclic_sum((2, 2))
    H = FinGroup.from_json(G.to_json())
    assert H == G


def test_size_cap():
    with pytest.raises(CapExceeded):
        FinGroup.cyclic_sum((17, 17))


# group ring


def test_augmentation_examples():
    g, h = GroupRingElt.basic(Z3, (1,), 3), GroupRingElt.basic(Z3, (2,), 3)
    assert augmentation(g) == 1
    assert augmentation(GroupRingElt.zero(Z3, 3)) == 0
    assert augmentation(g - h) == 0


def test_ring_product_matches_group_law():
    g = GroupRingElt.basic(Z3, (1,), 5)
    assert g * g == GroupRingElt.basic(Z3, (2,), 5)
    assert g * g * g == GroupRingElt.basic(Z3, (0,), 5)


def test_z2_over_f2_square_vanishes():
    F = aug_ideal_powers(Z2, 2)
    assert F.dims == (1, 0)
    assert F.stable_index == 2
    # (1-[g])^2 = 1 - 2[g] + [g^2] = 2 - 2[g] = 0 mod 2
    assert word_element(Z2, [(1,), (1,)], 2).is_zero()


def test_trivial_group_has_zero_ideal():
    F = aug_ideal_powers(FinGroup.trivial(), 2)
    assert F.dims == (0,)


def test_z3_over_f3_matches_truncated_polynomial_ring():
    # F_3[Z_3] = F_3[x]/(x^3) with x = [g]-1; I^s = (x^s) has dimension 3-s
    F = aug_ideal_powers(Z3, 3)
    assert F.dims == (2, 1, 0)


def test_s_max_truncates():
    F = aug_ideal_powers(FinGroup.cyclic_sum((3, 3)), 3, 2)
    assert len(F.powers) == 2 and F.stable_index is None


@pytest.mark.parametrize("p,m", [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2), (3, 3)])
def test_ideal_nilpotence_instances(p, m):
    v = check_ideal_nilpotence(p, m)
    assert v.holds and v.detail["sharp"]


def test_ideal_nilpotence_cap():
    with pytest.raises(CapExceeded):
        check_ideal_nilpotence(3, 6)


groups = st.sampled_from(
    [((2,), 2), ((3,), 3), ((2, 2), 2), ((4,), 2), ((2, 3), 2), ((2, 3), 3), ((3,), 2), ((2, 2), 3)]
)


@settings(max_examples=20, deadline=None)
@given(groups)
def test_filtration_descends_and_is_ideal(case):
    orders, p = case
    G = FinGroup.cyclic_sum(orders)
    F = aug_ideal_powers(G, p)
    for s in range(1, F.stable_index + 2):
        P, Q = F.power(s), F.power(s + 1)
        assert subspace_leq(Q, P)
        for g in G.elements:
            perm = G.right_perm(g)
            moved = np.empty_like(P.rows)
            moved[:, perm] = P.rows
            assert all(P.contains(r) for r in moved)
            assert all(Q.contains((r - m) % p) for r, m in zip(P.rows, moved))
    last = F.stable_index
    assert F.power(last) == F.power(last + 1)


# gentleness


def test_constant_is_zero_gentle():
    f = GroupFunction.constant(Z3, 3, 2)
    assert gentle_defect(f, 0)
    assert gentle_degree(f) == 0


def test_identity_on_z2():
    f = GroupFunction(Z2, 2, lambda g: g[0])
    res = gentle_defect(f, 0)
    assert not res and res.witness == ((1,),)
    assert gentle_defect(f, 1)


def test_square_on_z3():
    f = GroupFunction(Z3, 3, lambda g: g[0] ** 2)
    assert not gentle_defect(f, 1)
    assert gentle_defect(f, 2)
    assert gentle_degree(f) == 2 == oracle_degree(f)


def test_witness_is_a_real_generator():
    f = GroupFunction(Z3, 3, lambda g: g[0] ** 2)
    res = gentle_defect(f, 1)
    x = word_element(Z3, res.witness, 3)
    assert len(res.witness) == 2 and f.linear(x) != 0


def test_witness_length_past_stabilization():
    # over F_2 the group Z_3 has I = I^2, so nonconstant functions are never gentle
    f = GroupFunction(Z3, 2, lambda g: int(g[0] == 1))
    assert gentle_degree(f) is None
    res = gentle_defect(f, 4)
    assert not res and len(res.witness) == 5


@pytest.mark.parametrize("c", range(3))
def test_homomorphisms_z3_are_one_gentle(c):
    f = GroupFunction(Z3, 3, lambda g: c * g[0])
    assert gentle_degree(f) <= 1


def test_all_functions_on_z2_squared_have_degree_at_most_two():
    G = FinGroup.cyclic_sum((2, 2))
    for vals in itertools.product(range(2), repeat=4):
        f = GroupFunction(G, 2, vals)
        d = gentle_degree(f)
        assert d is not None and d <= 2
        assert d == oracle_degree(f)


def test_elementary_abelian_bound_z2_cubed():
    G = FinGroup.cyclic_sum((2, 2, 2))
    for vals in itertools.product(range(2), repeat=8):
        assert gentle_degree(GroupFunction(G, 2, vals)) <= 3


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(0, 2), min_size=9, max_size=9))
def test_elementary_abelian_bound_z3_squared(vals):
    G = FinGroup.cyclic_sum((3, 3))
    assert gentle_degree(GroupFunction(G, 3, vals)) <= 4


@settings(max_examples=40, deadline=None)
@given(groups, st.data())
def test_degree_matches_inclusion_exclusion_oracle(case, data):
    orders, p = case
    G = FinGroup.cyclic_sum(orders)
    vals = data.draw(st.lists(st.integers(0, p - 1), min_size=len(G), max_size=len(G)))
    f = GroupFunction(G, p, vals)
    d = gentle_degree(f)
    if d is None:
        # not gentle: fails at every r up to well past the stable index
        assert not any(alternating_sum_oracle(f, r) for r in range(4))
    else:
        assert d == oracle_degree(f)
        for r in range(d, d + 3):
            assert gentle_defect(f, r)
        if d == 0:
            assert len(set(f.vector.tolist())) == 1


# bounds


def z3_functions():
    return [GroupFunction(Z3, 3, vals) for vals in itertools.product(range(3), repeat=3)]


def test_composition_examples():
    sq = GroupFunction(Z3, 3, lambda g: g[0] ** 2)
    hom = GroupFunction(Z3, 3, lambda g: 2 * g[0])
    const = GroupFunction.constant(Z3, 3, 1)
    assert check_composition_bound(hom, hom)
    assert check_composition_bound(sq, sq).detail == {"r": 2, "s": 2}
    v = check_composition_bound(const, sq)
    assert v and v.detail["r"] == 0
    with pytest.raises(StructuralError):
        check_composition_bound(GroupFunction(Z3, 2, [0, 1, 1]), sq)


def test_composition_bound_exhaustive_z3():
    fs = z3_functions()
    for f in fs:
        for g in fs:
            assert check_composition_bound(f, g)


def test_pushforward_examples():
    ident = GroupFunction(Z3, 3, lambda g: g[0])
    assert np.array_equal(pushforward(ident, 3).matrix, np.eye(3, dtype=int))
    zero = GroupFunction.constant(Z3, 3, 0)
    F = pushforward(zero, 3)
    x = GroupRingElt.basic(Z3, (2,), 3)
    assert F(x) == GroupRingElt.basic(Z3, (0,), 3)
    sq = GroupFunction(Z3, 3, lambda g: g[0] ** 2)
    assert check_pushforward_bound(sq, 1)


def test_pushforward_bound_exhaustive_z3():
    for f in z3_functions():
        for s in range(3):
            assert check_pushforward_bound(f, s)


def test_pushforward_rejects_nonabelian():
    A = FinGroup.alternating_group_5()
    with pytest.raises(ValidationError):
        pushforward(GroupFunction.constant(A, 2), 2)


def test_product_gentle_examples():
    c = GroupFunction.constant(Z2, 2, 1)
    ident = GroupFunction(Z2, 2, lambda g: g[0])
    sq = GroupFunction(Z3, 3, lambda g: g[0] ** 2)
    assert check_product_gentle([c, c], 0)
    assert check_product_gentle([ident, ident], 1)
    assert check_product_gentle([sq, sq], 2)
    with pytest.raises(PreconditionError):
        check_product_gentle([sq, sq], 1)


def test_perfect_stability():
    A = FinGroup.alternating_group_5()
    for p in (2, 3, 5):
        assert check_perfect_stability(A, p)
    assert not check_perfect_stability(Z2, 2)


def test_coprime_relation():
    assert check_coprime_relation(FinGroup.cyclic_sum((2, 3)), (1, 0), (0, 1), 2)
    assert check_coprime_relation(FinGroup.cyclic_sum((2, 3)), (1, 0), (0, 0), 3)
    Z6 = FinGroup.cyclic_sum((6,))
    assert check_coprime_relation(Z6, (3,), (2,), 3)
    with pytest.raises(PreconditionError):
        check_coprime_relation(Z6, (3,), (3,), 2)


def test_integer_polynomial_window():
    cube = [0, 0, 0, 1]
    assert check_integer_polynomial(cube, 3)
    bad = check_integer_polynomial(cube, 2)
    assert not bad
    a = bad.witness
    # recompute the failing third difference by hand
    total = sum((-1) ** len(S) * sum(a[i] for i in S) ** 3
                for k in range(4) for S in itertools.combinations(range(3), k))
    assert total != 0
    assert check_integer_polynomial([7], 0)
    assert check_integer_polynomial(["1/2", "-1/2"], 1)  # q(q-1)/2 style rational coefficients


def test_integer_polynomial_overflow_falls_back_to_exact():
    big = 10**17  # values leave the int64 range
    assert check_integer_polynomial([big, 3, big], 2, window=(-2, 2))
    assert not check_integer_polynomial([big, 3, big], 1, window=(-2, 2))


def test_projection_kernels_two_factors():
    # [u] - [u_1] - [u_2] + [0] = ([u_1]-1)([u_2]-1) in I^2
    v = check_projection_kernels([2, 2], 2, 1, trials=20, seed=1)
    assert v and v.detail["identity"] is True


def test_projection_kernels_trivial_range():
    v = check_projection_kernels([2, 2], 2, 2, trials=5, seed=0)
    assert v and v.detail["kernel_dim"] == 0


@pytest.mark.parametrize("orders", [(2, 2, 2), (3, 2, 3)])
@pytest.mark.parametrize("p", [2, 3])
def test_projection_kernels_three_factors(orders, p):
    assert check_projection_kernels(orders, p, 1, trials=30, seed=3)
