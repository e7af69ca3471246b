"""One test per acceptance criterion; each prints a PASS/FAIL line in the terminal summary."""
import math
import random

import pytest

import conftest
from oracles import cross, diagonal, embed as float_embed, patch_defects
from trisubst.cyclotomic import InflationFactor, classify_factor, length_basis_matrix, length_matrix, mat_mul
from trisubst.cyclotomic import minimal_polynomial, multiplication_matrix, substitution_matrix
from trisubst.geometry import RigidMotion, apply_motion, lattice, scale_by, special_set
from trisubst.parallel import run_campaign
from trisubst.postprocess import apply_and_verify, extract_breakdowns, group_families, seed_prototile
from trisubst.search import SearchConfig, SearchContext

ROOT_TOL = 1e-12
UNIT_CIRCLE_MARGIN = 1e-6
FLOAT_MARGIN = 1e-6
EMBED_TOL = 1e-9
RANDOM_CHECKS = 10_000


def record(number: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'} {detail}")
    assert ok, detail


def test_criterion_1_minimal_polynomials():
    q5, q7 = minimal_polynomial(5), minimal_polynomial(7)
    err = max(abs(sum(c * (2 * math.cos(math.pi / n)) ** i for i, c in enumerate(q.coeffs)))
              for n, q in ((5, q5), (7, q7)))
    ok = str(q5) == "x^2 - x - 1" and str(q7) == "x^3 - x^2 - 2x + 1" and err < ROOT_TOL
    record(1, ok, f"q5 = {q5}, q7 = {q7}, max root residual {err:.1e}")


def test_criterion_2_substitution_matrix():
    m = substitution_matrix(7, special_set(7), InflationFactor(7, (1, 1, 0)))
    record(2, m == ((3, 3, 5), (1, 4, 3), (2, 1, 3)), f"M = {m}")


def test_criterion_3_length_matrix():
    lam = InflationFactor(7, (1, 1, 0))
    x = length_matrix(7, lam)
    basis = length_basis_matrix(7)
    intertwines = mat_mul(basis, x) == mat_mul(multiplication_matrix(lam.value), basis)
    record(3, x == ((1, 1, 0), (1, 1, 1), (0, 1, 2)) and intertwines, f"X = {x}, L X = p(A) L: {intertwines}")


def test_criterion_4_pv_and_units():
    want = {(1, 1, 0): False, (0, 1, 1): True, (1, 1, 1): True}
    got = {}
    for coeffs in want:
        fc = classify_factor(InflationFactor(7, coeffs), margin=UNIT_CIRCLE_MARGIN)
        assert min(abs(abs(c) - 1) for c in fc.conjugates) > UNIT_CIRCLE_MARGIN
        got[coeffs] = (fc.pv, fc.unit)
    ok = all(got[c] == (pv, True) for c, pv in want.items())
    record(4, ok, "; ".join(f"{c}: PV={p} unit={u}" for c, (p, u) in got.items()))


def test_criterion_5_fivefold_family(five):
    sizes = sorted((f.sizes for f in five.assembly.families), key=lambda s: (-sum(s), s))
    ok = any(s == (2, 7) for s in sizes)
    record(5, ok, f"family sizes (T(1,1,3), T(1,2,2)) found: {sizes}; wanted (2, 7)")


def test_criterion_6_sevenfold_classes(seven):
    complete = seven.assembly.complete_classes()
    censuses_ok = all(r.census(3) == seven.ctx.column(r.t0)
                      for oc in complete for f in oc.families for rs in f.members for r in rs)
    ok = len(complete) == 2 and all(oc.families for oc in complete) and censuses_ok
    detail = ", ".join(f"{oc.orientation:#x}: {[f.sizes for f in oc.families]}" for oc in complete)
    record(6, ok, f"{len(complete)} orientation classes with rules ({detail}); censuses match M: {censuses_ok}")


@pytest.mark.extended
def test_criterion_7_sevenfold_lambda3():
    ctx = SearchContext(SearchConfig(7, tuple(special_set(7)), InflationFactor(7, (1, 1, 1))))
    camp = run_campaign(ctx)
    assembly = group_families(ctx, camp.results)
    sizes = [f.sizes for f in assembly.families]
    ok = len(sizes) == 90 and (3, 5, 36) in sizes
    record(7, ok, f"{len(sizes)} combinations; (3, 5, 36) present: {(3, 5, 36) in sizes}")


def _property_suite(camp, max_level):
    ctx = camp.ctx
    checked_results = 0
    for t0, results in camp.found.items():
        region = tuple(ctx.lat.embed(v) for v in ctx.inflated[t0])
        for r in results:
            tris = [tuple(ctx.lat.embed(v) for v in ctx.tile_from_motion(*pl).vertices) for pl in r.tiles]
            if patch_defects(tris, region) or r.census(len(ctx.protos)) != ctx.column(t0):
                return False, f"result {r.t0}/{r.starter} fails the patch audit"
            checked_results += 1
    rules = 0
    for fam in camp.assembly.families:
        for rule in fam.rule_sets():
            for r in rule.results:
                lengths = ctx.protos[r.t0].lengths
                for side, bd in enumerate(extract_breakdowns(ctx, r, rule.orientation)):
                    if bd != rule.breakdown(lengths[side]):
                        return False, "breakdown differs within a rule set"
            for k in range(1, max_level + 1):
                for p in range(len(ctx.protos)):
                    _, rep = apply_and_verify(ctx, rule, seed_prototile(ctx, p), k)
                    if not rep.ok:
                        return False, f"level {k} from prototile {p}: {rep}"
            rules += 1
    return True, f"n={ctx.n}: {checked_results} results audited, {rules} rule sets substituted to level {max_level}"


def test_criterion_8_property_suite(five, seven):
    ok5, d5 = _property_suite(five, 3)
    ok7, d7 = _property_suite(seven, 3)
    record(8, ok5 and ok7, f"{d5}; {d7}")


def test_criterion_9_parallel_determinism(five):
    reference = sorted(r.tiles for rs in five.found.values() for r in rs)
    runs = 0
    mismatched = []
    for workers in (1, 2, 4, 8):
        for threshold in sorted({1, workers, 4 * workers}):
            out = run_campaign(five.ctx, workers=workers, kill_threshold=threshold, poll_every=64)
            runs += 1
            if sorted(r.tiles for r in out.all_results()) != reference:
                mismatched.append((workers, threshold))
    record(9, not mismatched, f"{runs} runs with {len(reference)} results each; mismatches {mismatched}")


def test_criterion_10_exact_kernel_oracles():
    rng = random.Random(20260101)
    disagreements = 0
    decided = 0
    for _ in range(RANDOM_CHECKS // 2):
        n = rng.choice((5, 7, 11, 13))
        lat = lattice(n)
        p, q, r = (tuple(rng.randint(-5, 5) for _ in range(n - 1)) for _ in range(3))
        c = cross(float_embed(n, p), float_embed(n, q), float_embed(n, r))
        if abs(c) > FLOAT_MARGIN:
            decided += 1
            if lat.orient_exact(p, q, r) != (1 if c > 0 else -1) or lat.orient(p, q, r) != (1 if c > 0 else -1):
                disagreements += 1
    worst = 0.0
    for _ in range(RANDOM_CHECKS // 2):
        n = rng.choice((5, 7))
        d = (n - 1) // 2
        g = RigidMotion(rng.randrange(2 * n), rng.random() < 0.5, tuple(rng.randint(-3, 3) for _ in range(n - 1)))
        p = tuple(rng.randint(-3, 3) for _ in range(n - 1))
        x, y = float_embed(n, p)
        if g.flip:
            y = -y
        th = g.rot * math.pi / n
        sx, sy = float_embed(n, g.shift)
        want = (x * math.cos(th) - y * math.sin(th) + sx, x * math.sin(th) + y * math.cos(th) + sy)
        got = float_embed(n, apply_motion(n, g, p))
        worst = max(worst, abs(got[0] - want[0]), abs(got[1] - want[1]))
        coeffs = [rng.randint(0, 2) for _ in range(d)]
        if not any(coeffs):
            coeffs[0] = 1
        lam = sum(c * diagonal(n, i + 1) for i, c in enumerate(coeffs))
        got = float_embed(n, scale_by(InflationFactor(n, coeffs), p))
        x, y = float_embed(n, p)
        worst = max(worst, abs(got[0] - lam * x), abs(got[1] - lam * y))
    ok = disagreements == 0 and worst < EMBED_TOL
    record(10, ok, f"{decided} decided orientation checks, {disagreements} disagreements; "
                   f"{RANDOM_CHECKS // 2} motion and scaling checks, worst deviation {worst:.1e}")
