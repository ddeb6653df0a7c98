import math
import random
from itertools import combinations, permutations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polygas.contour import enumerate_contours, is_positively_compatible, verify_hypotheses
from polygas.lattice import ModelParams, interior_energy, phi
from polygas.polymer import Polymer, positive_polymers
from polygas.trees import LabeledTree, labeled_trees
from polygas.treesum import (VertexSystem, contour_system, contracting, leaf_pruning, modified_vertex,
                             polymer_system, remove_vertex_expand, restricted_tree_count, restricted_trees,
                             toy_system, tree_sum_global, tree_sum_global_graded, tree_sum_local,
                             tree_sum_local_graded, two_vertex_decomposition, weighted_tree_sum)

import oracles

TOYS = ["triangle", "path", "square"]


def _const_system(n=3, e=1.0, value=0.5):
    verts = tuple(range(n))
    return VertexSystem(verts, lambda t, b: value, lambda a, b: e)


# -- vertex systems ----------------------------------------------------------------------

def test_vertex_system_validation():
    with pytest.raises(ValueError):
        VertexSystem((), lambda t, b: 1.0, lambda a, b: 1.0)
    with pytest.raises(ValueError):
        VertexSystem((0, 1), lambda t, b: 1.0, lambda a, b: -1.0)
    with pytest.raises(ValueError):
        VertexSystem((0, 1), lambda t, b: 1.0, lambda a, b: float(a))
    vs = VertexSystem((0, 1), lambda t, b: 0.0, lambda a, b: 1.0)
    with pytest.raises(ValueError):
        vs.v(0, 1.0)


def test_toy_pair_structure():
    for kind in TOYS:
        vs = toy_system(kind)
        assert vs.pairs_cover()
    path = toy_system("path")
    assert not path.compatible(("a", "c"))
    assert path.compatible(("a", "b"))
    assert not path.compatible(("a", "b", "c"))


# -- operators -----------------------------------------------------------------------------

def test_modified_vertex_examples():
    params = ModelParams(alpha=2.0)
    cs = [c for c in enumerate_contours(ModelParams.interval(0, 3), 3)]
    vs = contour_system(params, cs)
    for c in cs:
        h = interior_energy(tuple(c.interior), 2.0)
        assert modified_vertex(vs, c, 3.0) == pytest.approx(1.5 * h, rel=1e-12)
    assert modified_vertex(_const_system(), 0, 5.0) == 0.0


def test_modified_vertex_polymer_system():
    params = ModelParams.interval(0, 3, alpha=1.5, beta=4.0)
    pols = [p for p in positive_polymers(params)][:25]
    vs = polymer_system(params, pols)
    for p in pols:
        total_h = math.fsum(interior_energy(tuple(c.interior), 1.5) for c in p)
        assert modified_vertex(vs, p, 4.0) == pytest.approx(total_h, rel=1e-10)


def test_modified_vertex_increasing_and_unbounded():
    params = ModelParams(alpha=2.0)
    cs = list(enumerate_contours(ModelParams.interval(0, 5), 5))
    vs = contour_system(params, cs)
    grid = [1.5, 2.0, 4.0, 8.0, 16.0, 32.0]
    infs = []
    for b1, b2 in zip(grid, grid[1:]):
        for c in cs:
            assert modified_vertex(vs, c, b1) < modified_vertex(vs, c, b2)
    for b in grid:
        infs.append(min(modified_vertex(vs, c, b) for c in cs))
    assert all(x < y for x, y in zip(infs, infs[1:]))
    assert infs[-1] >= grid[-1]


def test_leaf_pruning_examples():
    zero = _const_system(e=0.0)
    assert leaf_pruning(zero, 0, 1.0) == 0.0
    two = VertexSystem(("x", "y"), lambda t, b: 0.3 if t == "y" else 2.0,
                       lambda a, b: 1.0 if a != b else 0.0)
    assert leaf_pruning(two, "x", 1.0) == pytest.approx(0.3)


def test_contracting_examples():
    vs = toy_system("square")
    for t in vs.vertices:
        assert contracting(vs, (t,), 1.2) == leaf_pruning(vs, t, 1.2)
    one = VertexSystem(("o",), lambda t, b: 0.7, lambda a, b: 0.5)
    assert contracting(one, ("o", "o", "o"), 2.0) == pytest.approx(0.7 * 0.125)
    expect = math.fsum(vs.v(t, 0.9) * vs.e(t, "a") * vs.e(t, "c") for t in vs.vertices)
    assert contracting(vs, ("a", "c"), 0.9) == pytest.approx(expect, rel=1e-14)
    with pytest.raises(ValueError):
        contracting(vs, (), 1.0)


def test_weighted_tree_sum_matches_enumeration():
    rng = np.random.default_rng(3)
    for n in range(1, 7):
        a = rng.uniform(0, 2, size=(n, n))
        w = (a + a.T) / 2
        brute = math.fsum(math.prod(w[i, j] for i, j in t) for t in oracles.spanning_trees(n))
        assert weighted_tree_sum(w) == pytest.approx(brute, rel=1e-12)


# -- tree sums ----------------------------------------------------------------------------

def test_tree_sum_trivial_cases():
    vs = toy_system("triangle")
    beta = 1.7
    assert tree_sum_local(vs, ("b",), beta, 1) == pytest.approx(vs.v("b", beta), rel=1e-15)
    assert tree_sum_local(vs, ("a", "c"), beta, 2) == pytest.approx(
        vs.v("a", beta) * vs.e("a", "c") * vs.v("c", beta), rel=1e-15)
    assert tree_sum_local_graded(vs, ("a", "b", "c"), beta, 2) == 0.0
    with pytest.raises(ValueError):
        tree_sum_local(vs, (), beta, 2)
    with pytest.raises(ValueError):
        tree_sum_local(vs, ("a",), beta, 9)


@pytest.mark.parametrize("kind", TOYS)
@pytest.mark.parametrize("beta", [0.4, 1.0, 2.5])
def test_tree_sums_match_brute_force(kind, beta):
    vs = toy_system(kind)
    verts = vs.vertices
    for m in (1, 2):
        for w in permutations(verts, m):
            for n in range(m, 5):
                local = tree_sum_local_graded(vs, w, beta, n)
                glob = tree_sum_global_graded(vs, w, beta, n)
                assert local == pytest.approx(oracles.tree_sum_brute(vs, w, beta, n), rel=1e-12, abs=1e-300)
                assert glob == pytest.approx(oracles.tree_sum_brute(vs, w, beta, n, True), rel=1e-12, abs=1e-300)
                assert glob <= local * (1 + 1e-12)
            if m == 1:
                for n in range(1, 4):
                    assert tree_sum_local_graded(vs, w, beta, n) == pytest.approx(
                        oracles.tree_sum_injections(vs, w, beta, n), rel=1e-12)


def test_toy_three_vertex_hand_values():
    vs = toy_system("triangle")
    beta = 1.0
    v = {t: vs.v(t, beta) for t in vs.vertices}
    e = vs.e
    # n = 2 with one fixed vertex: sum over the partner, both orders of the one edge tree
    expect2 = v["a"] * math.fsum(v[t] * e("a", t) for t in vs.vertices)
    assert tree_sum_local_graded(vs, ("a",), beta, 2) == pytest.approx(expect2, rel=1e-12)
    # the global sum keeps only admissible tuples; the triangle has no self-loops
    assert tree_sum_global_graded(vs, ("a",), beta, 2) == pytest.approx(expect2, rel=1e-12)


def test_global_with_trivial_predicate_equals_local():
    base = toy_system("path")
    free = VertexSystem(base.vertices, base.vertex_weight, base.edge_weight, global_compat=lambda t: True)
    for w in [("a",), ("b",), ("a", "c")]:
        assert tree_sum_global(free, w, 1.3, 4) == pytest.approx(tree_sum_local(free, w, 1.3, 4), rel=1e-13)


@given(st.sampled_from(TOYS), st.integers(2, 3), st.randoms(use_true_random=False),
       st.floats(0.2, 3.0))
def test_tree_sums_permutation_invariant(kind, m, rnd, beta):
    vs = toy_system(kind)
    w = tuple(rnd.choice(vs.vertices) for _ in range(m))
    perm = list(w)
    rnd.shuffle(perm)
    for fn in (tree_sum_local, tree_sum_global):
        a = fn(vs, w, beta, 4)
        b = fn(vs, tuple(perm), beta, 4)
        assert a == pytest.approx(b, rel=1e-12, abs=1e-300)


@pytest.mark.parametrize("kind", TOYS)
def test_two_vertex_decomposition(kind):
    vs = toy_system(kind)
    beta = 0.8
    for w1, w2 in permutations(vs.vertices, 2):
        for n in range(2, 6):
            exact = tree_sum_local_graded(vs, (w1, w2), beta, n)
            assert two_vertex_decomposition(vs, w1, w2, beta, n) == pytest.approx(exact, rel=1e-12, abs=1e-300)
            glob = tree_sum_global_graded(vs, (w1, w2), beta, n)
            assert glob <= two_vertex_decomposition(vs, w1, w2, beta, n, global_=True) * (1 + 1e-12) + 1e-300


# -- restricted trees ----------------------------------------------------------------------

def test_restricted_tree_examples():
    assert len(restricted_trees(5, 3)) == 0
    fam = restricted_trees(2, 2)
    assert [t.edges for t in fam] == [((0, 1),)]
    fam = restricted_trees(4, 3)
    assert len(fam) == len(oracles.restricted_by_filter(4, 3)) > 0
    with pytest.raises(ValueError):
        restricted_trees(3, 1)


@pytest.mark.parametrize("m", range(2, 6))
def test_restricted_trees_match_filter(m):
    for n in range(m, min(2 * m, 7) + 1):
        fam = restricted_trees(n, m)
        got = {frozenset(t.edges) for t in fam}
        expect = {frozenset(t) for t in oracles.restricted_by_filter(n, m)}
        assert got == expect
        assert len(fam) == len(got) == restricted_tree_count(n, m)
        for t in fam:
            assert all(t.degree(v) >= 3 for v in range(m, n))
            assert all(leaf < m for leaf in t.leaves())


@pytest.mark.parametrize("m", range(2, 7))
def test_restricted_trees_empty_beyond_bound(m):
    for n in range(2 * m - 1, 2 * m + 4):
        assert restricted_tree_count(n, m) == 0
    assert restricted_tree_count(2 * m - 2, m) > 0
    if 2 * m - 1 <= 12:
        assert len(restricted_trees(2 * m - 1, m)) == 0


def test_restricted_count_matches_cayley_when_unconstrained():
    for n in range(2, 9):
        assert restricted_tree_count(n, n) == n ** (n - 2)


# -- vertex removal --------------------------------------------------------------------

def test_remove_leaf():
    t = LabeledTree((0, 1, 2), ((0, 1), (1, 2)))
    [out] = remove_vertex_expand(t, 2)
    assert out.vertices == (0, 1) and out.edges == ((0, 1),)


def test_remove_degree_two_vertex():
    t = LabeledTree((0, 1, 2), ((0, 1), (1, 2)))
    outs = remove_vertex_expand(t, 1)
    assert len(outs) == 2
    assert outs[0] == outs[1]
    assert outs[0].edges == ((0, 1),)


def test_remove_star_centre():
    star = LabeledTree((0, 1, 2, 3), ((0, 1), (0, 2), (0, 3)))
    outs = remove_vertex_expand(star, 0)
    assert len(outs) == 6
    distinct = {o.edges for o in outs}
    assert len(distinct) == 3
    for e in distinct:
        assert sum(1 for o in outs if o.edges == e) == 2


def test_remove_vertex_preserves_other_degrees_and_leaves():
    rng = random.Random(11)
    trees = list(labeled_trees(6))
    for t in rng.sample(trees, 60):
        for vi in range(t.n):
            deg_before = {t.vertices[i]: t.degree(i) for i in range(t.n)}
            nbrs = {t.vertices[j] for j in t.neighbours(vi)}
            for out in remove_vertex_expand(t, t.vertices[vi]):
                for i, lab in enumerate(out.vertices):
                    d = out.degree(i)
                    if lab not in nbrs:
                        assert d == deg_before[lab]
                    else:
                        # a neighbour loses the edge to the removed vertex and gains at most two path edges
                        assert deg_before[lab] - 1 <= d <= deg_before[lab] + 1
                        if deg_before[lab] > 1:
                            assert d >= deg_before[lab] - 1 >= 1


# -- the contour instantiation ---------------------------------------------------------

BETAS = [2.0, 4.0, 6.0]


@pytest.fixture(scope="module", params=[1.5, 2.0])
def contour_setup(request):
    alpha = request.param
    params = ModelParams.interval(-10, 10, alpha=alpha, m_param=2.0)
    cs = list(enumerate_contours(params, 5))
    report = verify_hypotheses(ModelParams(alpha=alpha, m_param=2.0), 8, [2.0, 3.0, 4.0, 5.0, 6.0])
    return params, cs, contour_system(params, cs), report.c2_fit


def _H(c, alpha):
    return interior_energy(tuple(c.interior), alpha)


def test_contour_edge_weights(contour_setup):
    params, cs, vs, _ = contour_setup
    rng = random.Random(1)
    for a, b in [rng.sample(cs, 2) for _ in range(200)]:
        if is_positively_compatible(a, b, params):
            assert vs.e(a, b) == pytest.approx(phi(a.interior, b.interior, params.alpha), rel=1e-14)
        else:
            assert vs.e(a, b) == 0.0


def test_leaf_pruning_bound_on_contours(contour_setup):
    params, cs, vs, c2 = contour_setup
    assert c2 > 0
    alpha = float(params.alpha)
    for beta in BETAS:
        for g in cs[::7]:
            assert leaf_pruning(vs, g, beta) <= 2 * math.exp(-c2 * beta / 2) * _H(g, alpha)


def test_contracting_bound_on_contours(contour_setup):
    params, cs, vs, c2 = contour_setup
    alpha = float(params.alpha)
    rng = random.Random(5)
    checked = 0
    while checked < 40:
        k = rng.choice([2, 3])
        w = rng.sample(cs, k)
        if not all(is_positively_compatible(a, b, params) for a, b in combinations(w, 2)):
            continue
        checked += 1
        for beta in BETAS:
            rhs = math.fsum(
                _H(w[p[-1]], alpha) * math.prod(phi(w[p[i]].interior, w[p[i + 1]].interior, alpha) for i in range(k - 1))
                for p in permutations(range(k)))
            rhs *= 16 ** (alpha * k) * alpha / (alpha - 1) * math.exp(-c2 * beta / 4)
            assert contracting(vs, w, beta) <= rhs


def test_single_contour_tree_sum_bound(contour_setup):
    params, cs, vs, _ = contour_setup
    alpha = float(params.alpha)
    for beta in BETAS:
        for g in cs[::30]:
            assert tree_sum_global(vs, (g,), beta, 3) <= math.exp(-beta * _H(g, alpha) / 2)


def test_two_contour_tree_sum_bound(contour_setup):
    params, cs, vs, _ = contour_setup
    alpha = float(params.alpha)
    rng = random.Random(9)
    pairs = [p for p in (rng.sample(cs, 2) for _ in range(400)) if is_positively_compatible(*p, params)][:12]
    assert pairs
    for beta in BETAS:
        for g1, g2 in pairs:
            bound = phi(g1.interior, g2.interior, alpha) * math.exp(-beta * (_H(g1, alpha) + _H(g2, alpha)) / 4)
            assert tree_sum_global(vs, (g1, g2), beta, 3) <= bound
