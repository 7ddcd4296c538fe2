"""Exit criteria, one test each; a PASS/FAIL line per criterion is printed in the summary.

Criterion 6 also runs the full-scale experiment (50x50, 1000 generations,
200 rounds, 5 runs per case), which takes a minute or two with numba.
"""

import subprocess
import sys

import numpy as np
import pytest

import oracle
from conftest import ACCEPTANCE_LINES
from defectors import _kernels
from defectors import evolution as ev
from defectors import experiment as ex
from defectors import game as gm
from defectors import strategy as st
from defectors.game import DilemmaKind, PayoffConfig
from defectors.strategy import StrategyClass


def report(number, name, ok, detail=""):
    line = f"criterion {number}: {'PASS' if ok else 'FAIL'}  {name}"
    if detail:
        line += f"  [{detail}]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_1_dilemma_classification():
    got = {}
    for case in ex.ALL_CASES:
        m = gm.payoff_matrix_from(ex.build_case(case))
        got[case.label] = (gm.classify_dilemma(m), 2 * m.R, m.T + m.S)
    ok = (got["caseI"][0] == gm.DilemmaClass(DilemmaKind.STRONG, True)
          and got["caseIIA"][0] == gm.DilemmaClass(DilemmaKind.WEAK, True)
          and got["caseIIB"][0] == gm.DilemmaClass(DilemmaKind.WEAK, False)
          and got["caseIIB"][1:] == (20, 20))
    detail = ", ".join(f"{k}={v[0].kind.value}/{'holds' if v[0].iterated_condition_holds else 'fails'}"
                       for k, v in got.items())
    report(1, "dilemma classification (exact)", ok, detail)


def test_2_oracle_equivalence():
    rng = np.random.default_rng(2)
    matrices = [gm.payoff_matrix_from(PayoffConfig(10, d)) for d in (0, 5, 10)]
    mismatches = 0
    pop, ea, eb, rounds_list = [], [], [], []
    for i in range(1000):
        a = st.random_chromosome(rng, rng.random())
        b = st.random_chromosome(rng, rng.random())
        rounds = int(rng.integers(1, 11))
        m = matrices[i % 3]
        ma, mb, pa, pb = oracle.play(a, b, rounds, m.T, m.R, m.P, m.S)
        res = gm.play_match(a, b, rounds, m)
        xa, xb = gm.match_moves(a, b, rounds)
        if (xa.tolist(), xb.tolist()) != (ma, mb) or (res.payoff_a, res.payoff_b) != (pa, pb) \
                or res.cooperations_a != ma.count(0) or res.cooperations_b != mb.count(0):
            mismatches += 1
        pop += [a, b]
        ea.append(2 * i)
        eb.append(2 * i + 1)
        rounds_list.append(rounds)
    # every backend agrees on the same pairs
    pop = np.array(pop)
    for r in range(1, 11):
        sel = [k for k, x in enumerate(rounds_list) if x == r]
        ref = _kernels.count_outcomes_numpy(pop, np.array(ea)[sel], np.array(eb)[sel], r)
        if _kernels.HAVE_NUMBA:
            got = _kernels.count_outcomes_numba(pop, np.array(ea)[sel], np.array(eb)[sel], r)
            mismatches += int((got != ref).any(axis=1).sum())
    report(2, "play_match vs brute-force interpreter (1000 pairs, 1-10 rounds)",
           mismatches == 0, f"{mismatches} mismatches")


def test_3_cli_determinism(tmp_path):
    outs = []
    for name in ("a", "b"):
        out = tmp_path / name
        res = subprocess.run([sys.executable, "-m", "defectors", "run", "--case", "I", "--preset",
                              "desk", "--seed", "7", "--out", str(out), "--quiet"],
                             capture_output=True, text=True)
        assert res.returncode == 0, res.stderr
        outs.append({p.name: p.read_bytes() for p in sorted(out.glob("*.csv"))})
    ok = len(outs[0]) == 6 and outs[0] == outs[1]
    report(3, "byte-identical CSVs for `run --case I --preset desk --seed 7`", ok,
           f"{len(outs[0])} files compared")


def test_4_scaling_invariants():
    rng = np.random.default_rng(4)
    failures = 0
    worst = 0.0
    for _ in range(10_000):
        n = int(rng.integers(2, 60))
        f = rng.normal(rng.normal(0, 50), rng.uniform(1, 100), n)
        if rng.random() < 0.3:
            f = np.round(f)
        c = float(rng.uniform(1.2, 3.0))
        scaled = ev.linear_scale(f, c)
        base = f - f.min() if f.mean() <= 0 else f
        rel = abs(scaled.mean() - base.mean()) / max(abs(base.mean()), 1e-300)
        worst = max(worst, rel)
        order = np.argsort(f, kind="stable")
        ok = (rel <= 1e-9 and (scaled >= 0).all() and np.argmax(scaled) == np.argmax(f)
              and (np.diff(scaled[order]) >= 0).all())
        failures += not ok
    report(4, "linear_scale mean/non-negativity/argmax/monotonicity over 10^4 vectors",
           failures == 0, f"{failures} failures, worst relative mean error {worst:.1e}")


def test_5_mutation_and_crossover_statistics():
    rng = np.random.default_rng(5)
    base = st.all_cooperate()
    flips = [int(ev.mutate(base, rng, 0.01).sum()) for _ in range(100_000)]
    mean_flips = float(np.mean(flips))
    p1, p2 = st.all_cooperate(), st.all_defect()
    unchanged = 0
    for _ in range(100_000):
        c1, c2 = ev.crossover(p1, p2, rng, 0.98)
        unchanged += bool(np.array_equal(c1, p1) and np.array_equal(c2, p2))
    share = unchanged / 100_000
    ok = 0.68 <= mean_flips <= 0.74 and abs(share - 0.02) <= 0.005
    report(5, "mutation flips in [0.68, 0.74]; crossover no-op share 2% +- 0.5%", ok,
           f"flips {mean_flips:.4f}, no-op {share:.4%}")


@pytest.fixture(scope="module")
def desk_results():
    cfg = ex.desk_config()
    out = {}
    for case in ex.ALL_CASES:
        runs = ex.run_case(case, cfg)
        out[case.label] = (runs, ex.average_runs(runs))
    return out


@pytest.fixture(scope="module")
def full_results():
    cfg = ex.RunConfig()
    out = {}
    for case in ex.ALL_CASES:
        runs = ex.run_case(case, cfg)
        out[case.label] = (runs, ex.average_runs(runs))
    return out


def test_6a_desk_case_i_rise(desk_results):
    avg = desk_results["caseI"][1]
    start = avg.fraction_defector[0]
    top, gen = ex.peak(avg, "defector")
    report("6a", "desk Case I defector share rises from 0.20 to a peak above 0.40",
           start == 0.2 and top > 0.40, f"gen0 {start:.3f}, peak {top:.4f} at gen {gen}")


def test_6b_desk_peak_ordering(desk_results):
    p = {k: ex.peak(v[1], "defector")[0] for k, v in desk_results.items()}
    ok = p["caseI"] - p["caseIIA"] >= 0.02 and p["caseIIA"] - p["caseIIB"] >= 0.02
    report("6b", "desk peak defector ordering I > IIA > IIB, gaps >= 0.02", ok,
           ", ".join(f"{k} {v:.4f}" for k, v in p.items()))


@pytest.mark.slow
def test_6c_full_scale_case_i_band(full_results):
    top, gen = ex.peak(full_results["caseI"][1], "defector")
    report("6c", "full-scale Case I 5-run mean peak defector share in [0.55, 0.90]",
           0.55 <= top <= 0.90, f"peak {top:.4f} at gen {gen}")


@pytest.mark.slow
def test_6d_full_scale_top_defector_ordering(full_results):
    p = {k: ex.peak(v[1], "top_defector") for k, v in full_results.items()}
    ok = p["caseI"][0] > p["caseIIA"][0] > p["caseIIB"][0]
    after0 = {k: ex.peak(v[1].fraction_top_defector[1:])[0] for k, v in full_results.items()}
    detail = ", ".join(f"{k} {v[0]:.4f}@{v[1]}" for k, v in p.items())
    detail += "; excluding gen 0: " + ", ".join(f"{k} {v:.4f}" for k, v in after0.items())
    report("6d", "full-scale top-defector peak ordering I > IIA > IIB", ok, detail)


def test_7_population_bookkeeping(desk_results):
    cfg = ex.RunConfig()
    rng = np.random.default_rng(cfg.base_seed)
    grid = ex.init_population(rng, cfg)
    classes = [st.classify(c) for c in grid.cells]
    n_coop = sum(c is StrategyClass.COOPERATOR for c in classes)
    n_def = sum(c.is_defector for c in classes)
    matrix = gm.payoff_matrix_from(ex.build_case(ex.CASE_I))
    sizes = set()
    for _ in range(5):
        f = ev.evaluate_fitness(grid, cfg.evolution, matrix)
        grid = ev.next_generation(grid, f, cfg.evolution, rng)
        sizes.add(grid.cells.shape)
    worst = 0.0
    for runs, avg in desk_results.values():
        for s in list(runs) + [avg]:
            total = s.fraction_cooperator + s.fraction_defector + s.fraction_neutral
            worst = max(worst, float(np.abs(total - 1).max()))
    ok = n_coop == 2000 and n_def == 500 and sizes == {(2500, 71)} and worst <= 1e-12
    report(7, "2000/500 initial split, constant population, fractions sum to 1", ok,
           f"{n_coop}/{n_def}, shapes {sorted(sizes)}, max |sum-1| {worst:.1e}")
