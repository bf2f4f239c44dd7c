"""Acceptance suite: eleven criteria, each with its tolerance and runtime budget.

Every test records a ``criterion N: PASS/FAIL`` line which is printed in the
terminal summary (and to stdout, visible with ``-s``).
"""

import json
import math
import time
from collections import deque
from contextlib import contextmanager

import numpy as np
import pytest

from levy_liouville.cli import corpus_path, run_command
from levy_liouville.generator_semigroup import (
    GridFunction,
    MCConfig,
    TorusGrid,
    apply_generator_quadrature,
    apply_generator_spectral,
    check_harmonic,
    power_generator_apply,
    resolvent_apply,
    sample_levy,
    trig_function,
)
from levy_liouville.levy_core import Atoms, ExponentialBound, LevyTriplet
from levy_liouville.structure import (
    cross_check_duality,
    exponential_zeros,
    find_zero_set,
    hnf_lattice,
    liouville_verdict,
    strong_liouville_verdict,
    witness_grid,
)
from levy_liouville.symbol import eval_psi, eval_psi_complex, log1p, power, resolvent, subordinate

from .conftest import ACCEPTANCE_LINES, stable, triplet_corpus
from .test_symbol import inequality_failures, periodicity_failures

TWO_PI = 2 * math.pi


@contextmanager
def criterion(number, title, budget):
    """Time the block, record a pass/fail line and enforce the runtime budget."""
    start = time.perf_counter()
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        elapsed = time.perf_counter() - start
        line = f"criterion {number:>2}: FAIL  {title} ({elapsed:.1f} s) {type(exc).__name__}: {exc}"
        ACCEPTANCE_LINES[number] = line.splitlines()[0]
        print(ACCEPTANCE_LINES[number])
        raise
    elapsed = time.perf_counter() - start
    ok = elapsed < budget
    extra = " ".join(f"{k}={v}" for k, v in detail.items())
    ACCEPTANCE_LINES[number] = (f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {title} "
                                f"({elapsed:.1f} s of {budget} s) {extra}").rstrip()
    print(ACCEPTANCE_LINES[number])
    assert ok, f"runtime {elapsed:.1f} s exceeds {budget} s"


def trig_residual_at(s, gamma, time_=1.0):
    return check_harmonic(s, trig_function(witness_grid(gamma), gamma), times=(time_, math.sqrt(2)))


# 1 ---------------------------------------------------------------------------

def test_criterion_01_lattice_side():
    with criterion(1, "Poisson delta_1 fails with generator 2pi and harmonic witness", 5) as d:
        t = LevyTriplet.poisson([1.0])
        v = liouville_verdict(t)
        assert v.fails
        gamma = np.array(v.witness["vector"])
        err = abs(abs(gamma[0]) - TWO_PI)
        assert err < 1e-8
        rep = trig_residual_at(t, gamma)
        assert len(rep.residuals) == 2 and max(rep.residuals) < 1e-10
        d.update(generator_error=f"{err:.1e}", residual=f"{max(rep.residuals):.1e}")


# 2 ---------------------------------------------------------------------------

def test_criterion_02_trivial_side():
    with criterion(2, "BM and stable 0.5/1.5 hold; 50 random trig candidates rejected", 30) as d:
        rng = np.random.default_rng(2)
        worst = math.inf
        for t in (LevyTriplet.brownian(1), stable(0.5), stable(1.5)):
            assert liouville_verdict(t).holds
            for _ in range(50):
                gamma = rng.uniform(0.05, 20.0) * rng.choice([-1.0, 1.0])
                r = trig_residual_at(t, [gamma]).residuals[0]
                assert r > 1e-3
                worst = min(worst, r)
        d.update(min_residual=f"{worst:.2e}")


# 3 ---------------------------------------------------------------------------

def test_criterion_03_strong_liouville():
    with criterion(3, "BM with drift 1: exponential zero -2 verified by 1e6-path MC", 60) as d:
        t = LevyTriplet.brownian(1, drift=[1.0])
        v = strong_liouville_verdict(t, ExponentialBound(3.0), cfg=MCConfig(seed=3, paths=10 ** 6),
                                     probes=(0.0, 0.3))
        assert v.fails and v.witness["kind"] == "exponential"
        eta = np.array(v.witness["vector"])
        assert abs(eta[0] + 2.0) < 1e-8
        val = abs(eval_psi_complex(t, [0.0], eta))
        assert val < 1e-10
        checks = v.extra["mc_check"]
        assert [c["x"] for c in checks] == [[0.0], [0.3]]
        for c in checks:
            assert abs(c["estimate"] - c["target"]) <= 4 * c["stderr"]
        z = max(abs(c["estimate"] - c["target"]) / c["stderr"] for c in checks)
        d.update(psi=f"{val:.1e}", max_z=f"{z:.2f}")


# 4 ---------------------------------------------------------------------------

def symmetric_triplets(count=20, seed=4):
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(1, 3))
        k = int(rng.integers(n, n + 3))
        locs = rng.uniform(-3, 3, size=(k, n))
        locs[np.linalg.norm(locs, axis=1) < 0.1] += 0.5
        masses = rng.uniform(0.1, 2.0, size=k)
        a = rng.normal(size=(n, n)) * rng.integers(0, 2)
        out.append(LevyTriplet(np.zeros(n), a @ a.T,
                               (Atoms(np.vstack([locs, -locs]), np.concatenate([masses, masses])),)))
    return out


def test_criterion_04_real_symbols():
    with criterion(4, "20 symmetric-atom triplets have no nonzero exponential zero", 60) as d:
        found = 0
        for i, t in enumerate(symmetric_triplets()):
            xs = np.random.default_rng(i).normal(size=(20, t.dim))
            assert np.max(np.abs(eval_psi(t, xs).imag)) < 1e-12
            roots, info = exponential_zeros(t, seed=i)
            assert info["directions"] >= 2 * t.dim
            nonzero = [r for r in roots if np.linalg.norm(r["eta"]) >= 1e-6]
            assert not nonzero, nonzero
            found += len(roots)
        d.update(roots_found=found)


# 5 ---------------------------------------------------------------------------

def duality_family(count=50, seed=5):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(count):
        n = 1 + i % 2
        k = int(rng.integers(1, 4))
        locs = rng.integers(-3, 4, size=(k, n)).astype(float)
        locs = locs[np.any(locs != 0, axis=1)]
        if len(locs) == 0:
            locs = np.ones((1, n))
        masses = rng.choice([0.5, 1.0, 2.0], size=len(locs))
        b = rng.integers(-1, 2, size=n).astype(float) * rng.integers(0, 2)
        q = np.zeros((n, n))
        if rng.random() < 0.2:
            q[0, 0] = 1.0
        out.append(LevyTriplet(b, q, (Atoms(locs, masses),)))
    return out


def test_criterion_05_duality():
    with criterion(5, "orthogonal zero set equals the closure of G_nu + W", 120) as d:
        fixed = [
            LevyTriplet.poisson([1.0]),
            LevyTriplet.poisson([2.0, 3.0]),
            LevyTriplet.poisson([[1.0, 0.0]]),
            LevyTriplet.poisson([2.0, 3.0], drift=[1.0]),
        ]
        # With integer atoms and b, Q built from {-1, 0, 1} entries, every zero-set generator lies in
        # 2pi Z^n intersected with ker Q and b-perp, so its norm is at most 2pi*sqrt(2) in 2-D.
        box_2d = 4 * math.pi * 1.125
        worst_angle = worst_lattice = 0.0
        for t in fixed + duality_family():
            rep = cross_check_duality(t, box_halfwidth=box_2d if t.dim == 2 else None)
            assert rep.equal, (t, rep.reason, rep.max_angle, rep.lattice_mismatch)
            assert rep.max_angle < 1e-6 and rep.lattice_mismatch < 1e-6
            worst_angle = max(worst_angle, rep.max_angle)
            worst_lattice = max(worst_lattice, rep.lattice_mismatch)
        d.update(max_angle=f"{worst_angle:.1e}", max_lattice=f"{worst_lattice:.1e}")


# 6 ---------------------------------------------------------------------------

def periodic_bump(period, sigma, center):
    ks = np.arange(-3, 4) * period

    def parts(x):
        w = np.mod(np.asarray(x, dtype=float) - center + period / 2, period) - period / 2
        dd = w[..., None] - ks
        e = np.exp(-dd * dd / (2 * sigma ** 2))
        return e.sum(-1), (-dd / sigma ** 2 * e).sum(-1), ((dd * dd / sigma ** 4 - 1 / sigma ** 2) * e).sum(-1)

    return parts


def test_criterion_06_generator_agreement():
    with criterion(6, "spectral and quadrature generators agree on 2048 points", 30) as d:
        period, points = 8.0, 2048
        grid = TorusGrid.cube(1, period, points)
        xs = grid.coordinates()[:, 0]
        triplets = [
            LevyTriplet.poisson([1.0]),
            LevyTriplet.poisson([0.5, -2.0], [1.0, 0.3]),
            LevyTriplet([0.4], [[0.0]], LevyTriplet.poisson([0.25, 1.5, -0.7], [2.0, 0.5, 1.0]).jumps),
            LevyTriplet([-0.3], [[0.6]], LevyTriplet.poisson([3.0], [0.8]).jumps),
            LevyTriplet([0.0], [[0.2]], LevyTriplet.poisson([-0.1, 0.9, 2.2, -3.3], [4.0, 1.0, 0.5, 0.2]).jumps),
        ]
        bumps = [periodic_bump(period, s, c) for s, c in ((0.3, 0.0), (0.5, 1.0), (0.4, -2.5),
                                                           (0.8, 3.0), (0.35, 0.7))]
        worst = 0.0
        for parts in bumps:
            f = GridFunction(grid, parts(xs)[0])
            scalar = lambda x, p=parts: float(p(x[0])[0])  # noqa: E731
            grad = lambda x, p=parts: np.array([p(x[0])[1]])  # noqa: E731
            hess = lambda x, p=parts: np.array([[p(x[0])[2]]])  # noqa: E731
            for t in triplets:
                spec = apply_generator_spectral(t, f).values
                quad = np.array([apply_generator_quadrature(t, scalar, [x], grad=grad, hess=hess)
                                 for x in xs])
                worst = max(worst, float(np.max(np.abs(spec - quad))))
        assert worst < 1e-6
        d.update(max_discrepancy=f"{worst:.1e}")


# 7 ---------------------------------------------------------------------------

def test_criterion_07_sampler(tmp_path):
    with criterion(7, "sampler: drift exact, Poisson mean, BM variance, worker invariance", 120) as d:
        drift = LevyTriplet([0.3, -1.1], np.zeros((2, 2)), ())
        for seed in (0, 1, 2 ** 63):
            x = sample_levy(drift, 2.0, MCConfig(seed=seed, paths=1000))
            assert np.array_equal(x, np.tile([0.6, -2.2], (1000, 1)))
        reports = []
        for w in (1, 4, 8):
            out = tmp_path / f"w{w}"
            code, _ = run_command(["simulate", "--config", corpus_path("poisson1.json"),
                                   "--paths", str(10 ** 6), "--seed", "7", "--workers", str(w),
                                   "--out", str(out)])
            assert code == 0
            reports.append(((out / "simulate.json").read_bytes(), (out / "simulate.csv").read_bytes()))
        assert reports[0] == reports[1] == reports[2]
        rep = json.loads(reports[0][0])["result"]
        mean, se = rep["mean"][0], rep["stderr"][0]
        assert abs(mean - 1.0) <= 4 * se and abs(mean - 1.0) < 4e-3
        code, bm = run_command(["simulate", "--config", corpus_path("bm.json"), "--paths", str(10 ** 6),
                                "--seed", "7", "--out", str(tmp_path / "bm")])
        var = bm["result"]["covariance"][0][0]
        assert code == 0 and abs(var - 1.0) < 0.01
        d.update(poisson_mean=f"{mean:.5f}", bm_variance=f"{var:.5f}")


# 8 ---------------------------------------------------------------------------

KNOWN_PERIODS = {"poisson1": [TWO_PI], "delta23": [TWO_PI], "weierstrass": [2.0]}


def test_criterion_08_inequalities():
    with criterion(8, "symbol inequalities over 1000 pairs x 10 triplets", 30) as d:
        corpus = triplet_corpus()
        assert len(corpus) == 10
        checked = 0
        for i, (name, t) in enumerate(sorted(corpus.items())):
            fails = inequality_failures(t, pairs=1000, seed=i)
            assert not any(fails.values()), (name, fails)
            periods = [np.asarray(p) for p in KNOWN_PERIODS.get(name, [])]
            periods += list(find_zero_set(t).lattice_generators)
            for p in periods:
                if abs(eval_psi(t, p)) < 1e-12:
                    assert periodicity_failures(t, p, seed=i) < 1e-6
                    checked += 1
        assert checked >= 3
        d.update(periods_checked=checked)


# 9 ---------------------------------------------------------------------------

def test_criterion_09_subordination():
    with criterion(9, "verdicts invariant under subordination; resolvent criterion agrees", 60) as d:
        base = [LevyTriplet.poisson([1.0]), LevyTriplet.brownian(1), stable(0.5), stable(1.5)]
        funcs = [power(0.5), log1p(), resolvent(1.0)]
        rng = np.random.default_rng(9)
        worst = 0.0
        for t in base:
            a = liouville_verdict(t)
            for h in funcs:
                b = liouville_verdict(subordinate(h, t))
                assert a.status == b.status, (t, h.name, a.status, b.status)
                if a.fails:
                    assert np.allclose(a.witness["vector"], b.witness["vector"], atol=1e-8)
            # resolvent criterion lam R_lam f = f against the semigroup criterion P_t f = f
            if a.fails:
                candidates = [np.array(a.witness["vector"])]
            else:
                candidates = [np.array([rng.uniform(0.05, 20.0)]) for _ in range(10)]
            for gamma in candidates:
                f = trig_function(witness_grid(gamma), gamma)
                semi = trig_residual_at(t, gamma).harmonic
                for lam in (0.5, 1.0, 2.0):
                    r = (resolvent_apply(t, lam, f) - f).max_abs()
                    assert (r < 1e-8) == semi
                    if semi:
                        worst = max(worst, r)
        d.update(max_resolvent_residual=f"{worst:.1e}")


# 10 --------------------------------------------------------------------------

def bfs_reach(gens, targets, radius, budget=3_000_000):
    """Brute-force membership: breadth-first walk over +-generators inside a box."""
    n = len(targets[0])
    steps = [tuple(g) for g in gens if any(g)]
    steps += [tuple(-x for x in g) for g in steps]
    want = {tuple(v) for v in targets} - {(0,) * n}
    seen = {(0,) * n}
    queue = deque([(0,) * n])
    while queue and want and len(seen) < budget:
        p = queue.popleft()
        for s in steps:
            r = tuple(a + b for a, b in zip(p, s))
            if r in seen or max(abs(x) for x in r) > radius:
                continue
            seen.add(r)
            want.discard(r)
            queue.append(r)
    return not want


def test_criterion_10_hnf():
    with criterion(10, "HNF matches brute-force lattice membership on 200 instances", 30) as d:
        rng = np.random.default_rng(10)
        for _ in range(200):
            n = int(rng.integers(1, 4))
            m = int(rng.integers(1, 5))
            gens = rng.integers(-5, 6, size=(m, n)).tolist()
            h = hnf_lattice(gens)
            if not h:
                assert all(not any(g) for g in gens)
                continue
            radius = max(6, 2 * max(abs(x) for v in gens + h for x in v))
            assert bfs_reach(gens, h, radius), (gens, h)
            assert bfs_reach(h, gens, radius), (gens, h)
            assert np.linalg.matrix_rank(np.array(h)) == len(h) == np.linalg.matrix_rank(np.array(gens))
        d.update(instances=200)


# 11 --------------------------------------------------------------------------

def test_criterion_11_generator_powers():
    with criterion(11, "failed-verdict witnesses annihilated by (-psi)^n, n=1,2,3", 10) as d:
        cases = [LevyTriplet.poisson([1.0]), LevyTriplet.poisson([2.0, 3.0]),
                 LevyTriplet.poisson([[1.0, 0.0]]), triplet_corpus()["weierstrass"]]
        worst = 0.0
        for t in cases:
            v = liouville_verdict(t)
            assert v.fails
            gamma = np.array(v.witness["vector"])
            f = trig_function(witness_grid(gamma), gamma)
            for n in (1, 2, 3):
                r = power_generator_apply(t, n, f).max_abs()
                worst = max(worst, r)
                assert r < 1e-8
        d.update(max_residual=f"{worst:.1e}")
