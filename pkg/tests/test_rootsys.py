"""Lie-algebra layer: structure constants, the form, torus action."""

from __future__ import annotations

import json
from fractions import Fraction

import numpy as np
import pytest

from spincm.errors import StructuralError, UnsupportedAlgebraError
from spincm.rootsys import (AlgElement, bracket, build_root_system,
                            coadjoint_action, element_from_matrix, form,
                            matrix_rep, negate, parse_root_label, root_label,
                            root_system_summary, torus_adjoint)

RANKS = [1, 2, 3, 4]


def random_element(rs, rng):
    return AlgElement(rs, rng.normal(size=rs.dim) + 1j * rng.normal(size=rs.dim))


@pytest.mark.parametrize("rank", RANKS)
def test_root_ordering_and_counts(rank):
    rs = build_root_system("A", rank)
    assert rs.n_pos == rank * (rank + 1) // 2
    assert rs.n_roots == 2 * rs.n_pos
    assert rs.dim == rank + rs.n_roots
    assert rs.simple_roots == rs.roots[:rank]
    for k in range(rs.n_pos):
        assert rs.roots[k + rs.n_pos] == negate(rs.roots[k])
    for j, simple in enumerate(rs.simple_roots):
        expected = tuple(int(i == j) for i in range(rank))
        assert simple == expected


@pytest.mark.parametrize("rank", RANKS)
def test_cartan_matrix_inverse_is_exact(rank):
    rs = build_root_system("A", rank)
    a = rs.cartan_matrix
    c = rs.cartan_inverse
    for i in range(rank):
        for j in range(rank):
            acc = sum(Fraction(a[i][k]) * c[k][j] for k in range(rank))
            assert acc == Fraction(int(i == j))


@pytest.mark.parametrize("rank", RANKS)
def test_cartan_basis_is_orthonormal_traceless(rank):
    rs = build_root_system("A", rank)
    for i in range(rank):
        assert abs(np.sum(rs.h_diag[i])) < 1e-14
        for j in range(rank):
            tr = float(rs.h_diag[i] @ rs.h_diag[j])
            assert abs(tr - (i == j)) < 1e-13


@pytest.mark.parametrize("rank", RANKS)
def test_root_lengths_are_two(rank):
    rs = build_root_system("A", rank)
    for k in range(rs.n_roots):
        assert rs.root_pairings[k, k] == 2
        # the orthonormal-coordinate row reproduces the same inner product
        assert abs(rs.alpha_h[k] @ rs.alpha_h[k] - 2.0) < 1e-13


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_jacobi_identity(rank):
    rs = build_root_system("A", rank)
    rng = np.random.default_rng(10 + rank)
    for _ in range(200 // rank):
        x, y, z = (random_element(rs, rng) for _ in range(3))
        res = (bracket(x, bracket(y, z)) + bracket(y, bracket(z, x))
               + bracket(z, bracket(x, y)))
        assert res.max_abs() < 1e-12


@pytest.mark.parametrize("rank", RANKS)
def test_bracket_matches_matrix_commutator(rank):
    rs = build_root_system("A", rank)
    rng = np.random.default_rng(20 + rank)
    for _ in range(20):
        x, y = random_element(rs, rng), random_element(rs, rng)
        lhs = matrix_rep(bracket(x, y))
        mx, my = matrix_rep(x), matrix_rep(y)
        assert np.max(np.abs(lhs - (mx @ my - my @ mx))) < 1e-12


@pytest.mark.parametrize("rank", RANKS)
def test_form_is_trace_form_and_invariant(rank):
    rs = build_root_system("A", rank)
    rng = np.random.default_rng(30 + rank)
    for _ in range(20):
        x, y, z = (random_element(rs, rng) for _ in range(3))
        assert abs(form(x, y) - np.trace(matrix_rep(x) @ matrix_rep(y))) < 1e-12
        inv = form(bracket(x, y), z) + form(y, bracket(x, z))
        assert abs(inv) < 1e-11


@pytest.mark.parametrize("rank", RANKS)
def test_coroot_bracket(rank):
    # [e_alpha, e_-alpha] = h_alpha, whose orthonormal coordinates are the
    # alpha(h_i) row
    rs = build_root_system("A", rank)
    for root in rs.roots:
        e_plus = AlgElement.basis(rs, rs.basis_index(root))
        e_minus = AlgElement.basis(rs, rs.basis_index(negate(root)))
        h = bracket(e_plus, e_minus)
        assert np.max(np.abs(h.vec[rank:])) < 1e-14
        expected = rs.coroot_coordinates(root)
        assert np.max(np.abs(h.cartan_coords - expected)) < 1e-13


@pytest.mark.parametrize("rank", RANKS)
def test_cartan_acts_by_root_value(rank):
    rs = build_root_system("A", rank)
    rng = np.random.default_rng(40 + rank)
    coords = rng.normal(size=rank)
    h = AlgElement.cartan(rs, coords)
    for k, root in enumerate(rs.roots):
        e = AlgElement.basis(rs, rank + k)
        lhs = bracket(h, e)
        alpha_of_h = rs.alpha_h[k] @ coords
        assert (lhs - alpha_of_h * e).max_abs() < 1e-13


def test_pairing_with_cartan_matches_matrix_picture():
    rs = build_root_system("A", 3)
    rng = np.random.default_rng(5)
    q = rng.normal(size=3)
    diag = rs.h_diag.T @ q      # diagonal of sum q_i h_i
    for k, root in enumerate(rs.roots):
        a, b = rs.eps_pairs[k]
        assert abs(rs.pairing_with_cartan(root, q) - (diag[a] - diag[b])) < 1e-13


def test_element_from_matrix_round_trip():
    rs = build_root_system("A", 2)
    rng = np.random.default_rng(6)
    x = random_element(rs, rng)
    back = element_from_matrix(rs, matrix_rep(x))
    assert (back - x).max_abs() < 1e-13
    with pytest.raises(StructuralError):
        element_from_matrix(rs, np.eye(3))


def test_unsupported_algebras_are_rejected():
    with pytest.raises(UnsupportedAlgebraError):
        build_root_system("B", 2)
    with pytest.raises(UnsupportedAlgebraError):
        build_root_system("A", 5)
    with pytest.raises(UnsupportedAlgebraError):
        build_root_system("A", 0)


def test_basis_index_rejects_non_roots():
    rs = build_root_system("A", 2)
    with pytest.raises(StructuralError):
        rs.basis_index((2, 0))


def test_root_label_round_trip():
    rs = build_root_system("A", 3)
    for root in rs.roots:
        assert parse_root_label(root_label(root), 3) == root
    with pytest.raises(ValueError, match="1,0"):
        parse_root_label("[1,0]", 3)


@pytest.mark.parametrize("rank", [1, 2, 3])
def test_torus_adjoint_is_a_lie_automorphism(rank):
    rs = build_root_system("A", rank)
    rng = np.random.default_rng(50 + rank)
    c = 0.3 * rng.normal(size=rank)
    x, y = random_element(rs, rng), random_element(rs, rng)
    lhs = torus_adjoint(c, bracket(x, y))
    rhs = bracket(torus_adjoint(c, x), torus_adjoint(c, y))
    assert (lhs - rhs).max_abs() < 1e-10


def test_torus_adjoint_rank_one_scaling():
    # For A_1 and h = exp(t h_alpha), Ad_h e_alpha = e^{2t} e_alpha.
    rs = build_root_system("A", 1)
    alpha = rs.roots[0]
    e = AlgElement.basis(rs, rs.basis_index(alpha))
    t = 0.5
    out = torus_adjoint([t], e)
    assert abs(out.coeff(alpha) - np.exp(1.0)) < 1e-13
    out_neg = torus_adjoint([t], AlgElement.basis(rs, rs.basis_index(negate(alpha))))
    assert abs(out_neg.coeff(negate(alpha)) - np.exp(-1.0)) < 1e-13


def test_torus_adjoint_preserves_form():
    rs = build_root_system("A", 2)
    rng = np.random.default_rng(7)
    c = rng.normal(size=2) * 0.4
    x, y = random_element(rs, rng), random_element(rs, rng)
    assert abs(form(torus_adjoint(c, x), torus_adjoint(c, y)) - form(x, y)) < 1e-10


def test_coadjoint_action_is_minus_bracket():
    rs = build_root_system("A", 2)
    rng = np.random.default_rng(8)
    x, xi = random_element(rs, rng), random_element(rs, rng)
    # ad* is the dual of ad here: <ad*_X xi, Y> = <xi, [X, Y]> for all Y,
    # which the form isomorphism turns into -[X, I xi]
    y = random_element(rs, rng)
    lhs = form(coadjoint_action(x, xi), y)
    rhs = form(xi, bracket(x, y))
    assert abs(lhs - rhs) < 1e-11


def test_summary_is_json_serializable():
    rs = build_root_system("A", 2)
    text = json.dumps(root_system_summary(rs))
    data = json.loads(text)
    assert data["rank"] == 2
    assert len(data["roots"]) == 6
    assert data["cartan_matrix"] == [[2, -1], [-1, 2]]
