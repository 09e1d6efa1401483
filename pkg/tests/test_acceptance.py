"""Acceptance criteria 1-8, one test each, with wall-clock budgets.

Each test records a PASS/FAIL line; the lines are printed in the pytest
terminal summary, or directly when this file is run as a script.
"""

import io
import json
import time

import numpy as np
import pytest

from bmtrmld.cli import main as cli_main
from bmtrmld.exact import P1, P2, rowspan_equal
from bmtrmld.mle import (
    SampleCovariance,
    newton_fit,
    random_covariance,
    random_model_params,
    rloglik,
    rloglik_and_grad,
    sigma_of,
    stationarity_residuals,
)
from bmtrmld.model import build_design_A, build_path_B, row_transform_b_of_a
from bmtrmld.rmld import (
    bad_toric_design,
    bad_toric_generators,
    bad_toric_lspace,
    linear_rmld,
    rmld_certify,
    rmld_formula,
    star_origin_check,
    toric_mld_given_gens,
)
from bmtrmld.toric import all_gluings, lattice_member, tfp_kernel_check, tree_binomials
from bmtrmld.trees import enumerate_topologies, glue, parse_newick, star_tree

RESULTS = []


def record(number, ok, detail, seconds, budget):
    ok = bool(ok) and seconds <= budget
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'} ({detail}; {seconds:.1f}s of {budget}s)"
    RESULTS.append(line)
    print(line)
    return ok


def _cli(*argv):
    out = io.StringIO()
    return cli_main(list(argv), out=out), out.getvalue()


def test_criterion_1_tree16():
    start = time.perf_counter()
    code_r, out_r = _cli("rmld", "(1,2,(3,4,5));")
    t0 = time.perf_counter()
    code_c, out_c = _cli("certify", "(1,2,(3,4,5));", "--format", "json", "--no-timing")
    cert_seconds = time.perf_counter() - t0
    rep = json.loads(out_c)
    ok = code_r == 0 and out_r.strip() == "16" and code_c == 0 and rep["certified_degree"] == 16 and rep["match"]
    ok = ok and cert_seconds <= 60
    assert record(1, ok, f"rmld={out_r.strip()} certified={rep['certified_degree']} certify {cert_seconds:.2f}s", time.perf_counter() - start, 60)


def test_criterion_2_stars():
    start = time.perf_counter()
    got = {n: rmld_certify(star_tree(n)).certified_degree for n in (3, 4, 5)}
    ok = got == {3: 4, 4: 11, 5: 26}
    assert record(2, ok, f"certified {got}", time.perf_counter() - start, 300)


def test_criterion_3_sweep():
    start = time.perf_counter()
    trees = enumerate_topologies(6, labeled=True)
    shapes = {t.newick() for t in enumerate_topologies(6)}
    bad = []
    for t in trees:
        rep = rmld_certify(t, primes=(P1, P2), n_seeds=2)
        if not (rep.match and len(rep.runs) == 4):
            bad.append((rep.newick, rep.degrees, rep.formula_value))
    ok = not bad
    detail = f"{len(trees)} labelled trees ({len(shapes)} shapes) x 2 primes x 2 seeds, mismatches {bad[:3]}"
    assert record(3, ok, detail, time.perf_counter() - start, 1800)


def test_criterion_4_fiber_products():
    start = time.perf_counter()
    cache = {}

    def cert(t):
        key = t.newick()
        if key not in cache:
            rep = rmld_certify(t)
            cache[key] = rep.certified_degree
        return cache[key]

    failures = []
    gluings = all_gluings(6)
    for g in gluings:
        rep = tfp_kernel_check(g)
        if not rep.passed or cert(g.tree) != cert(g.t_prime) * cert(g.star):
            failures.append(rep.newick)
    glued = glue(star_tree(3), 3, 3)
    star_ok = (
        glued.tree == parse_newick("(1,2,(3,4,5));")
        and tfp_kernel_check(glued).passed
        and (cert(glued.t_prime), cert(glued.star), cert(glued.tree)) == (4, 4, 16)
    )
    ok = not failures and star_ok
    assert record(4, ok, f"{len(gluings)} gluings, failures {failures[:3]}, S_3 onto S_3 gives 4 x 4 = 16: {star_ok}", time.perf_counter() - start, 1800)


def test_criterion_5_bad_toric():
    start = time.perf_counter()
    lin = linear_rmld(bad_toric_lspace())
    tor = toric_mld_given_gens(bad_toric_generators(), bad_toric_design(), seed=42)
    assert record(5, lin == 1 and tor == 2, f"linear_rmld={lin} toric_mld={tor}", time.perf_counter() - start, 600)


def test_criterion_6_structural():
    start = time.perf_counter()
    trees = enumerate_topologies(6, labeled=True) + enumerate_topologies(7, min_leaves=7)
    checked = binomials = 0
    ok = True
    for t in trees:
        a, b = build_design_A(t), build_path_B(t)
        ok &= rowspan_equal(a, b)
        for v in t.nonroot_vertices:
            row_transform_b_of_a(t, v)  # raises on failure
        for bn in tree_binomials(t):
            ok &= lattice_member(bn, a) and lattice_member(bn, b)
            binomials += 1
        checked += 1
    assert record(6, ok, f"{checked} trees, {binomials} binomials", time.perf_counter() - start, 600)


def test_criterion_7_star_origin():
    start = time.perf_counter()
    got = {n: star_origin_check(n) for n in (2, 3, 4)}
    assert record(7, all(got.values()), f"{got}", time.perf_counter() - start, 120)


def _fd_rel_error(t, x, s, eps=1e-6):
    _, g = rloglik_and_grad(t, x, s)
    fd = np.empty_like(x)
    for k in range(len(x)):
        d = np.zeros_like(x)
        d[k] = eps * max(1.0, abs(x[k]))
        fd[k] = (rloglik(t, x + d, s) - rloglik(t, x - d, s)) / (2 * d[k])
    return np.linalg.norm(fd - g) / max(np.linalg.norm(g), 1e-12)


def test_criterion_8_mle():
    start = time.perf_counter()
    rng = np.random.default_rng(20240611)
    trees = enumerate_topologies(7)
    worst_fd = worst_rec = worst_res = worst_gap = 0.0
    converged = True
    for t in trees:
        for _ in range(50):
            s = random_covariance(t.n, rng)
            x = random_model_params(t, rng)
            worst_fd = max(worst_fd, _fd_rel_error(t, x, s))
        for _ in range(3):
            sigma = sigma_of(t, random_model_params(t, rng))
            fit = newton_fit(t, SampleCovariance.from_array(sigma))
            converged &= fit.converged
            worst_rec = max(worst_rec, np.abs(fit.sigma - sigma).max())
            s = random_covariance(t.n, rng)
            fit = newton_fit(t, s)
            converged &= fit.converged
            tr, pair = stationarity_residuals(fit, s)
            worst_res = max(worst_res, tr)
            worst_gap = max(worst_gap, abs(tr - pair))
    ok = converged and worst_fd <= 1e-5 and worst_rec <= 1e-10 and worst_res <= 1e-8 and worst_gap <= 1e-9
    detail = (
        f"{len(trees)} trees: fd rel err {worst_fd:.1e}, recovery {worst_rec:.1e}, "
        f"residual {worst_res:.1e}, form gap {worst_gap:.1e}"
    )
    assert record(8, ok, detail, time.perf_counter() - start, 120)


if __name__ == "__main__":
    import sys

    sys.exit(pytest.main([__file__, "-q", "-s"]))
