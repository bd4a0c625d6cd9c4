import math
import random
from fractions import Fraction

import pytest

from arborcheck import dualgraph as dg
from arborcheck import lattice
from conftest import oracle_brackets

F = Fraction


def test_intersection_matrix(tetrahedron, chain23):
    m = lattice.intersection_matrix(tetrahedron)
    for i in range(4):
        for j in range(4):
            assert m[i][j] == (-4 if i == j else 1)
    assert lattice.intersection_matrix(dg.validate([("E1", -2)], [])) == [[-2]]
    assert lattice.intersection_matrix(chain23) == [[-2, 1], [1, -3]]


def test_dual_basis_single_vertex():
    g = dg.validate([("E1", -7)], [])
    assert lattice.dual_basis(g)["E1"] == {"E1": F(-1, 7)}


def test_dual_basis_tetrahedron(tetrahedron):
    duals = lattice.dual_basis(tetrahedron)
    for u in tetrahedron.vertex_ids:
        for v in tetrahedron.vertex_ids:
            assert duals[u][v] == (F(-2, 5) if u == v else F(-1, 5))


def test_dual_basis_a3(a3_chain):
    duals = lattice.dual_basis(a3_chain)
    assert duals["E2"] == {"E1": F(-1, 2), "E2": F(-1), "E3": F(-1, 2)}


def test_dual_basis_defining_property_and_negativity(corpus):
    for g in corpus:
        duals = lattice.dual_basis(g)
        for u in g.vertex_ids:
            assert all(c < 0 for c in duals[u].values())
            for v in g.vertex_ids:
                dot = lattice.divisor_dot(g, duals[u], {v: F(1)})
                assert dot == (1 if u == v else 0)


def test_brackets_match_cofactor_oracle(corpus):
    for g in corpus:
        t = lattice.brackets(g)
        inv = oracle_brackets(g)
        for i, u in enumerate(g.vertex_ids):
            for j, v in enumerate(g.vertex_ids):
                assert t.get(u, v) == inv[i][j]


def test_bracket_tables_worked_examples(tetrahedron, y_graph, chain23):
    tt = lattice.brackets(tetrahedron)
    assert tt.get("E1", "E1") == F(2, 5)
    assert tt.get("E2", "E4") == F(1, 5)
    ty = lattice.brackets(y_graph)
    assert ty.get("E1", "E2") == F(7, 80)
    assert ty.get("E1", "E5") == F(15, 80)
    assert ty.get("E3", "E2") == F(1, 8)
    assert ty.get("E3", "E5") == F(1, 8)
    tc = lattice.brackets(chain23)
    assert (tc.get("E1", "E1"), tc.get("E1", "E2"), tc.get("E2", "E2")) == (F(3, 5), F(1, 5), F(2, 5))


def test_bracket_invariance_under_blowups(corpus):
    rng = random.Random("invdual")
    for g in corpus[:10]:
        t = lattice.brackets(g)
        model = g
        for _ in range(3):
            new_id = dg.fresh_id(model.vertex_ids, "F")
            if rng.random() < 0.5 and model.edges:
                u, v = rng.choice(model.edges)
                model = dg.blowup(model, dg.BlowupSpec.satellite(u, v), new_id)
            else:
                model = dg.blowup(model, dg.BlowupSpec.free(rng.choice(model.vertex_ids)), new_id)
        t2 = lattice.brackets(model)
        for u in g.vertex_ids:
            for v in g.vertex_ids:
                assert t2.get(u, v) == t.get(u, v)


def test_branch_exc_transform(tetrahedron):
    duals = lattice.dual_basis(tetrahedron)
    rep = lattice.branch_exc_transform(tetrahedron, {"E3": 1})
    assert rep == {v: -c for v, c in duals["E3"].items()}
    cm = lattice.branch_exc_transform(tetrahedron, {"E2": 1, "E3": 2})
    expect = {v: -duals["E2"][v] - 2 * duals["E3"][v] for v in tetrahedron.vertex_ids}
    assert cm == expect
    padded = lattice.branch_exc_transform(tetrahedron, {"E2": 1, "E3": 2, "E1": 0})
    assert padded == cm


def test_branch_exc_transform_empty():
    g = dg.validate([("E1", -2)], [])
    with pytest.raises(lattice.EmptyBranch):
        lattice.branch_exc_transform(g, {"E1": 0})


def test_branch_intersection_examples(tetrahedron):
    assert lattice.branch_intersection(tetrahedron, {"E3": 1}, {"E1": 1}) == F(1, 5)
    # C_m = {2:1, 3:1}, C_p = {4:1, 3:2}: four bracket terms by hand
    cm, cp = {"E2": 1, "E3": 1}, {"E4": 1, "E3": 2}
    assert lattice.branch_intersection(tetrahedron, cm, cp) == F(8, 5)
    assert lattice.branch_intersection(tetrahedron, {"E3": 1}, {"E3": 1}) == F(2, 5)


def test_branch_intersection_is_the_bracket(corpus):
    # two representing-divisor branches intersect in the bracket of their vertices
    for g in corpus[:8]:
        t = lattice.brackets(g)
        for u in g.vertex_ids:
            for v in g.vertex_ids:
                assert lattice.branch_intersection(g, {u: 1}, {v: 1}) == t.get(u, v)


def test_divisor_intersection_bilinear(tetrahedron):
    a = [(F(2), {"E3": 1})]
    b = [(F(3), {"E1": 1})]
    assert lattice.divisor_intersection(tetrahedron, a, b) == F(6, 5)
    cm, cp = {"E2": 1, "E3": 1}, {"E4": 1, "E3": 2}
    total = lattice.divisor_intersection(
        tetrahedron, [(F(1), cm), (F(1), cp)], [(F(1), {"E1": 1})]
    )
    assert total == lattice.branch_intersection(tetrahedron, cm, {"E1": 1}) + \
        lattice.branch_intersection(tetrahedron, cp, {"E1": 1})
    assert total == F(1)


def test_q_values(a3_chain, tetrahedron):
    ta = lattice.brackets(a3_chain)
    assert lattice.q_value(ta, "E1", "E2") == F(1, 3)
    assert lattice.q_value(ta, "E1", "E3") == F(1, 9)
    assert lattice.q_value(ta, "E2", "E2") == F(1)
    tt = lattice.brackets(tetrahedron)
    assert lattice.q_value(tt, "E1", "E2") == F(1, 4)


def test_crucial_check_examples(a3_chain, tetrahedron):
    ta = lattice.brackets(a3_chain)
    rep = lattice.crucial_check(ta, a3_chain, "E1", "E2", "E3")
    assert rep.lhs == rep.rhs == F(1, 4)
    assert rep.equality and rep.separates
    tt = lattice.brackets(tetrahedron)
    rep = lattice.crucial_check(tt, tetrahedron, "E1", "E3", "E2")
    assert rep.lhs == F(1, 25) and rep.rhs == F(2, 25)
    assert not rep.equality and not rep.separates
    rep = lattice.crucial_check(tt, tetrahedron, "E1", "E1", "E2")
    assert rep.equality and rep.separates


def test_crucial_exhaustive(corpus):
    for g in corpus:
        t = lattice.brackets(g)
        for u in g.vertex_ids:
            for v in g.vertex_ids:
                for w in g.vertex_ids:
                    lattice.crucial_check(t, g, u, v, w)  # raises on any violation


def test_multiplicative_triangle_inequality(corpus):
    # q(u,w) >= q(u,v) q(v,w), equality iff v separates u from w
    for g in corpus[:10]:
        t = lattice.brackets(g)
        for u in g.vertex_ids:
            for v in g.vertex_ids:
                for w in g.vertex_ids:
                    prod = lattice.q_value(t, u, v) * lattice.q_value(t, v, w)
                    quw = lattice.q_value(t, u, w)
                    assert prod <= quw
                    assert (prod == quw) == dg.separates(g, v, u, w)


def test_spherical_angle(a3_chain, tetrahedron):
    ta = lattice.brackets(a3_chain)
    assert abs(lattice.spherical_angle(ta, "E1", "E2", "E3") - math.pi / 2) < 1e-9
    tt = lattice.brackets(tetrahedron)
    angle = lattice.spherical_angle(tt, "E1", "E3", "E2")
    assert angle < math.pi / 2 - 1e-6
    assert lattice.spherical_angle(tt, "E1", "E3", "E2") == lattice.spherical_angle(tt, "E2", "E3", "E1")
    with pytest.raises(lattice.DegenerateTriangle):
        lattice.spherical_angle(tt, "E1", "E1", "E2")


def test_bracket_json(chain23):
    doc = lattice.brackets(chain23).to_json()
    assert doc == {"E1": {"E1": "3/5", "E2": "1/5"}, "E2": {"E1": "1/5", "E2": "2/5"}}
