import json

import pytest

from bmtrmld.exact import P1, P2, QQ
from bmtrmld.groebner import GroebnerResourceError
from bmtrmld.model import build_design_A
from bmtrmld.rmld import (
    DegenerateSliceError,
    GeneratorError,
    bad_toric_design,
    bad_toric_generators,
    bad_toric_lspace,
    certified_degree,
    linear_rmld,
    rmld_certify,
    rmld_formula,
    sample_data,
    star_origin_check,
    toric_mld_given_gens,
    tree_lspace,
)
from bmtrmld.toric import binomial_polys, hypersimplex_binomials, pair_ring
from bmtrmld.trees import enumerate_topologies, parse_newick, star_tree


@pytest.mark.parametrize(
    "newick, value",
    [("(1,2);", 1), ("(1,2,3);", 4), ("(1,2,3,4);", 11), ("(1,2,3,4,5);", 26), ("(1,2,(3,4,5));", 16), ("(1,(2,(3,4)));", 1), ("(1,(2,3,4));", 4)],
)
def test_formula(newick, value):
    assert rmld_formula(parse_newick(newick)) == value


@pytest.mark.parametrize("newick, value", [("(1,2);", 1), ("(1,2,3);", 4), ("(1,2,3,4);", 11), ("(1,(2,3,4));", 4), ("(1,(2,(3,4)));", 1)])
def test_certify_small(newick, value):
    rep = rmld_certify(parse_newick(newick))
    assert rep.certified_degree == value
    assert rep.match and rep.consistent
    assert rep.primes == [P1, P2] and rep.seeds == [42, 43]
    assert len(rep.runs) == 4


def test_certify_tree16(tree16):
    rep = rmld_certify(tree16, seed=7)
    assert rep.certified_degree == 16 and rep.match


def test_certify_rational(tree16):
    rep = rmld_certify(tree16, rational=True, n_seeds=1)
    assert rep.degrees == [16]
    assert rep.to_dict()["primes"] == ["QQ"]


def test_certify_json_deterministic(tree16):
    a = rmld_certify(tree16, seed=5).to_json(timing=False)
    b = rmld_certify(tree16, seed=5).to_json(timing=False)
    assert a == b
    assert json.loads(a)["runs"][0]["seed"] == 5


def test_certify_caps(tree16):
    with pytest.raises(ValueError):
        rmld_certify(star_tree(7))
    with pytest.raises(GroebnerResourceError):
        rmld_certify(tree16, max_pairs=1)


def test_sample_data_reproducible():
    assert sample_data(5, 3, P1) == sample_data(5, 3, P1)
    assert sample_data(5, 3, P1) != sample_data(5, 3, P1, attempt=1)
    assert all(1 <= x <= P1 - 1 for x in sample_data(100, 1, P1))
    assert all(1 <= x <= 2**15 for x in sample_data(100, 1, None))


def test_bad_prime_is_flagged():
    # over F_3 the slice loses solutions; cross-checking against a large prime exposes it
    t = star_tree(3)
    assert certified_degree(t, seed=1, prime=3) < 4
    rep = rmld_certify(t, seed=1, primes=(3, P1), n_seeds=1)
    assert not rep.consistent
    assert rep.certified_degree is None and not rep.match


def test_bad_toric():
    assert toric_mld_given_gens(bad_toric_generators(), bad_toric_design(), seed=42) == 2
    assert toric_mld_given_gens(bad_toric_generators(QQ), bad_toric_design(), seed=42, prime=None) == 2
    assert linear_rmld(bad_toric_lspace()) == 1


def test_bad_toric_generators_in_lattice():
    from bmtrmld.toric import binomial_from_poly, lattice_member

    for g in bad_toric_generators():
        b = binomial_from_poly(g)
        assert b is not None and lattice_member(b, bad_toric_design())


def test_generator_check():
    ring = pair_ring(3)
    bad = [ring.parse("p01*p23 - p01*p02")]
    with pytest.raises(GeneratorError):
        toric_mld_given_gens(bad, build_design_A(star_tree(3)), seed=1)


def test_hypersimplex_toric_mld():
    for n, expected in [(3, 4), (4, 11)]:
        ring = pair_ring(n)
        gens = binomial_polys(hypersimplex_binomials(n), ring)
        assert toric_mld_given_gens(gens, build_design_A(star_tree(n)), seed=42) == expected


def test_toric_mld_no_generators():
    from bmtrmld.exact import ExactMatrix

    assert toric_mld_given_gens([], ExactMatrix(((1, 0), (0, 1))), seed=1) == 1


@pytest.mark.parametrize("newick", ["(1,2);", "(1,2,3);", "(1,2,3,4);", "(1,(2,3,4));", "(1,(2,(3,4)));", "((1,2),(3,4));"])
def test_linear_formulation_agrees(newick):
    # independent formulation: Sigma K = Id plus orthogonality, no toric generators involved
    t = parse_newick(newick)
    assert linear_rmld(tree_lspace(t)) == rmld_formula(t)


def test_linear_rmld_validation():
    with pytest.raises(ValueError):
        linear_rmld([])
    with pytest.raises(ValueError):
        linear_rmld([[[0, 1], [0, 0]]])
    diag = [[[1 if i == j == k else 0 for j in range(3)] for i in range(3)] for k in range(3)]
    assert linear_rmld(diag) == 1


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_star_origin(n):
    assert star_origin_check(n)


def test_star_origin_rational():
    assert star_origin_check(3, prime=None)
    with pytest.raises(ValueError):
        star_origin_check(6)


def test_sweep_five_leaves():
    for t in enumerate_topologies(5):
        assert rmld_certify(t).match
