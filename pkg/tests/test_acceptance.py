"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line through the ``criterion`` fixture; the
lines are printed in the terminal summary.
"""
import math
import time
from decimal import Decimal, getcontext
from itertools import combinations

import numpy as np
import pytest
from scipy.stats import chisquare

from nwbench.boolcore import TruthTable, make_rng, sample_rp, trial_rng
from nwbench.circuits import SYM, ClassDescriptor, dnf, eval_circuit, eval_poly, sample_circuit, sample_poly
from nwbench.designs import Design, PROFILES, build_design_polynomial, nw_params, verify_design
from nwbench.hardfn import RWParams, chernoff_block_bound, gip_copy_check, structure_under_restriction
from nwbench.harness import count_report, measure_bias, pipeline_experiment
from nwbench.nofproto import NOFPartition, gip_circuit, run_hg_protocol
from nwbench.nwgen import HardFunctionHandle, NWGenerator, enumerate_outputs
from nwbench.restrictlab import (
    SwitchExperimentConfig, fair_pipeline_sample, multi_switch_experiment, single_switch_experiment,
)

pytestmark = pytest.mark.acceptance


def random_dnf(rng, n, terms, width):
    c = sample_circuit(ClassDescriptor(top=SYM, s=terms, k=width), n, rng)
    return dnf(n, [ch.lits for ch in c.children])


def test_c01_design_validity(criterion):
    start = time.perf_counter()
    bad = []
    for q in (2, 3, 5, 7, 11, 13):
        for d in (1, 2, 3):
            design = build_design_polynomial(q, d)
            # independent recount of every pairwise intersection
            sets = [set(b) for b in design.blocks]
            inc = np.zeros((len(sets), design.universe_m), dtype=np.int32)
            for i, b in enumerate(design.blocks):
                inc[i, list(b)] = 1
            gram = inc @ inc.T
            np.fill_diagonal(gram, 0)
            worst = int(gram.max()) if len(sets) > 1 else 0
            if worst > d - 1 or not verify_design(design).ok or any(len(s) != q for s in sets):
                bad.append((q, d, worst))
    elapsed = time.perf_counter() - start
    ok = not bad and elapsed < 10
    assert criterion(1, ok, f"primes<=13, d<=3, violations={bad}, {elapsed:.2f}s")


def test_c02_generator_correctness(criterion):
    rng = make_rng(102)
    mismatches = 0
    wrong_sizes = 0
    for _ in range(100):
        m = int(rng.integers(4, 17))
        r = int(rng.integers(1, min(m, 6) + 1))
        s = int(rng.integers(1, 9))
        blocks = tuple(tuple(sorted(int(v) for v in rng.choice(m, r, replace=False))) for _ in range(s))
        design = Design(m, r, r, blocks)
        table = TruthTable(r, rng.integers(0, 2, size=1 << r))
        gen = NWGenerator(design, HardFunctionHandle.from_table(table))
        rows = np.array(list(enumerate_outputs(gen)))
        wrong_sizes += rows.shape[0] != 1 << m
        z = np.arange(1 << m)
        for i, block in enumerate(blocks):
            idx = sum(((z >> v) & 1) << j for j, v in enumerate(block))
            mismatches += int((rows[:, i] != table.bits[idx]).sum())
    ok = mismatches == 0 and wrong_sizes == 0
    assert criterion(2, ok, f"100 pairs, m<=16, bit mismatches={mismatches}, bad sizes={wrong_sizes}")


def test_c03_fooling_sanity(criterion):
    design = Design(8, 2, 0, ((0, 1), (2, 3), (4, 5), (6, 7)))
    gen = NWGenerator(design, HardFunctionHandle.parity(2))
    s = design.s
    worst = 0.0
    tests = 0
    for i in range(s):
        for positive in (True, False):
            worst = max(worst, abs(measure_bias(TruthTable.literal(s, i, positive), gen).bias))
            tests += 1
    for i, j in combinations(range(s), 2):
        for code in range(16):
            f = TruthTable.from_function(s, lambda x: (code >> (int(x[i]) + 2 * int(x[j]))) & 1)
            worst = max(worst, abs(measure_bias(f, gen).bias))
            tests += 1
    assert criterion(3, worst == 0.0, f"{tests} literal and 2-junta tests, max |bias|={worst}")


def test_c04_switching_bound(criterion):
    rng = make_rng(104)
    start = time.perf_counter()
    rows = []
    ok = True
    for w in (1, 2):
        f = random_dnf(rng, 12, 8, w)
        for p in (1 / 20, 1 / 48):
            for t in (2, 3):
                rep = single_switch_experiment(SwitchExperimentConfig([f], p, t, trials=10 ** 4, seed=w * 100 + t))
                ok &= rep.within_bound(3)
                rows.append(f"w={w},p=1/{round(1 / p)},t={t}:{rep.empirical_failure:.4f}<={rep.bound:.4f}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 300
    assert criterion(4, ok, f"{'; '.join(rows)}; {elapsed:.1f}s")


def test_c05_multi_switching_bound(criterion):
    rng = make_rng(105)
    rows = []
    ok = True
    for s in (2, 4):
        fam = [random_dnf(rng, 12, 4, 2) for _ in range(s)]
        ell = math.ceil(math.log2(s))
        for p in (1 / 200, 1 / 100, 1 / 48):
            for t in (2, 3):
                rep = multi_switch_experiment(SwitchExperimentConfig(fam, p, t, ell=ell, trials=2000, seed=s + t))
                assert rep.bound == min(1.0, s * (24 * p * 2) ** t)
                ok &= rep.within_bound(3)
                tag = " vacuous" if rep.vacuous else ""
                rows.append(f"s={s},p=1/{round(1 / p)},t={t}:{rep.empirical_failure:.4f}<={rep.bound:.4f}{tag}")
    assert criterion(5, ok, "; ".join(rows))


def test_c06_structure_retention(criterion):
    p = 0.25
    trials = 10 ** 4
    rows = []
    ok = True
    for params in (RWParams(4, 1, 64), RWParams(2, 1, 128), RWParams(2, 3, 256)):
        target = max(1, params.m // 2)
        drops = 0
        check_mismatch = 0
        for i in range(trials):
            rho = sample_rp(params.n, p, trial_rng(106, i))
            free = (rho.array.reshape(params.m, params.k + 1, params.r) == 2).sum(axis=2)
            drops += bool((free < p * params.r / 2).any())
            alive = (free > 0).all(axis=1)
            r2 = int(free[alive].min()) if alive.any() else 0
            direct = int(alive.sum()) >= target and r2 >= 1
            check_mismatch += gip_copy_check(structure_under_restriction(params, rho), target) != direct
        emp = drops / trials
        bound = chernoff_block_bound(params, p)
        sigma = math.sqrt(bound * (1 - bound) / trials)
        ok &= emp <= bound + 3 * sigma and check_mismatch == 0
        rows.append(f"RW{(params.m, params.k, params.r)}:{emp:.4f}<={bound:.4f}, copy mismatches={check_mismatch}")
    assert criterion(6, ok, "; ".join(rows))


def test_c07_hg_protocol(criterion):
    rng = make_rng(107)
    wrong = 0
    over = 0
    cases = []
    for _ in range(50):
        k = int(rng.integers(1, 4))
        n = int(rng.integers(k + 1, 13))
        s = int(rng.integers(1, 9))
        cases.append((sample_circuit(ClassDescriptor(top=SYM, s=s, k=k), n, rng),
                      NOFPartition.contiguous(n, k + 1), k, s))
    cases.append((gip_circuit(3, 2), NOFPartition.gip_rows(3, 2), 1, 3))
    for C, P, k, s in cases:
        cap = (k + 1) * math.ceil(math.log2(s + 1))
        for x in range(1 << C.n):
            bits = (x >> np.arange(C.n)) & 1
            t = run_hg_protocol(C, P, bits)
            wrong += t.output != eval_circuit(C, bits)
            over += t.total_bits > cap
    ok = wrong == 0 and over == 0
    assert criterion(7, ok, f"{len(cases)} circuits incl. GIP, wrong outputs={wrong}, over budget={over}")


def test_c08_pipeline_fairness(criterion):
    n, samples = 12, 10 ** 5
    rng = make_rng(108)
    F = sample_circuit(ClassDescriptor(top=SYM, s=6, k=3), n, rng)
    weights = 1 << np.arange(n)
    counts = np.zeros(1 << n, dtype=np.int64)
    for i in range(samples):
        r = trial_rng(108, i)
        rho, _ = fair_pipeline_sample(F, 1 / 4, 0.5, r, k=1)
        x = rho.complete(r.integers(0, 2, size=rho.star_count()))
        counts[int(x @ weights)] += 1
    full = chisquare(counts).pvalue
    ones = np.array([counts[(np.arange(1 << n) >> v) & 1 == 1].sum() for v in range(n)])
    marg = min(chisquare([o, samples - o]).pvalue for o in ones)
    ok = full > 1e-3 and marg > 1e-3
    assert criterion(8, ok, f"n={n}, {samples} samples, full p={full:.3g}, min marginal p={marg:.3g}")


def test_c09_composition(criterion):
    rng = make_rng(109)
    rw = RWParams(2, 1, 3)
    holds = 0
    worst = -1.0
    for i in range(20):
        F = sample_circuit(ClassDescriptor(top=SYM, s=6, k=3), rw.n, rng)
        rep = pipeline_experiment(F, rw, 0.5, 0.5, 200, seed=i)
        holds += rep.holds
        worst = max(worst, rep.agreement - rep.rhs)
    assert criterion(9, holds == 20, f"{holds}/20 runs hold, max(agreement - rhs)={worst:.4f}")


def grid_design():
    rows = tuple(tuple(range(4 * i, 4 * i + 4)) for i in range(4))
    cols = tuple(tuple(range(j, 16, 4)) for j in range(4))
    return Design(16, 4, 1, rows + cols)


def test_c10_approximate_counting(criterion):
    rng = make_rng(110)
    gen = NWGenerator(grid_design(), HardFunctionHandle.rw(RWParams(1, 1, 2)))
    errors = []
    ok = True
    for _ in range(20):
        poly = sample_poly(8, 4, 3, rng)
        rep = count_report(poly, gen)
        exact = sum(eval_poly(poly, (x >> np.arange(8)) & 1) for x in range(256)) / 256
        ok &= rep == count_report(poly, gen) and rep.exact == exact
        errors.append(rep.abs_error)
    print("approximate counting |estimate - exact|:", " ".join(f"{e:.4f}" for e in errors))
    assert criterion(10, ok, f"20 polys, deterministic and exact; max err={max(errors):.4f}, "
                             f"mean err={np.mean(errors):.4f}")


def _reference_r(profile, s, eps, tau, c_d):
    getcontext().prec = 120
    ln2 = Decimal(2).ln()
    s_d, eps_d = Decimal(s), Decimal(eps)
    log_s = s_d.ln() / ln2
    log_s_eps = (s_d / eps_d).ln() / ln2

    def pow2(e):
        return int((e * ln2).exp().to_integral_value())

    def nint(v):
        return int(v.to_integral_value())

    if profile == "viola":
        return pow2(10 * (log_s_eps / Decimal(c_d)).sqrt())
    if profile in ("ls11_sym", "ls11_thr"):
        loglog = max(Decimal(1), log_s.ln() / ln2)
        extra = 1 if profile == "ls11_sym" else 2
        return pow2(10 / Decimal(c_d) * log_s / loglog) + nint(log_s_eps ** extra)
    return pow2(10 * (2 / Decimal(tau) * log_s).sqrt()) + nint((log_s_eps.ln() * Decimal("2.005")).exp())


def test_c11_parameter_calculator(criterion):
    rng = make_rng(111)
    bad = []
    for i in range(100):
        profile = PROFILES[i % len(PROFILES)]
        s = int(rng.integers(2, 1 << 20))
        eps = float(10 ** rng.uniform(-6, -0.5))
        tau, c_d = float(rng.uniform(1, 4)), float(rng.uniform(1, 4))
        got = nw_params(profile, s, eps, tau=tau, c_d=c_d)
        ell = 0
        while (1 << ell) < s:
            ell += 1
        r = _reference_r(profile, s, eps, tau, c_d)
        m = max(r, -(-2 * r * r // ell))
        if (got.ell, got.hardness_size, got.r, got.m) != (ell, s * 2 ** ell, r, m) \
                or got.hardness_corr != eps / s:
            bad.append((profile, s, eps))
    assert criterion(11, not bad, f"100 random (s, eps) over {len(PROFILES)} profiles, mismatches={bad}")
