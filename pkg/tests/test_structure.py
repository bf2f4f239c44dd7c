import itertools
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from levy_liouville.generator_semigroup import check_harmonic, power_generator_apply, trig_function
from levy_liouville.levy_core import (
    Atoms,
    ExponentialBound,
    LevyTriplet,
    RadialDensity,
    RadialProfile,
    ValidationError,
    load_triplet,
)
from levy_liouville.structure import (
    ExactPathUnavailable,
    GroupDescriptor,
    HypothesisError,
    alibaud_data,
    alibaud_group,
    cross_check_duality,
    find_zero_set,
    hnf_lattice,
    liouville_verdict,
    orthogonal_subgroup,
    smoothness_order,
    strong_liouville_verdict,
    witness_grid,
)
from levy_liouville.symbol import eval_psi, log1p, power, resolvent, subordinate

from .conftest import stable

TWO_PI = 2 * math.pi


def weierstrass(k_max=8):
    locs = [3.0 ** k * math.pi for k in range(k_max + 1)]
    return LevyTriplet.poisson(locs, [0.5 ** k for k in range(k_max + 1)])


def periodicity_ok(t, period, samples=100, seed=0):
    rng = np.random.default_rng(seed)
    xi = rng.normal(scale=4.0, size=(samples, t.dim))
    return np.max(np.abs(eval_psi(t, xi + period) - eval_psi(t, xi))) < 1e-6


# zero sets ------------------------------------------------------------------

def test_zero_set_brownian_trivial():
    z = find_zero_set(LevyTriplet.brownian(2))
    assert z.trivial and z.conclusive


def test_zero_set_poisson():
    z = find_zero_set(LevyTriplet.poisson([1.0]), box_halfwidth=20.0)
    assert len(z.subspace_basis) == 0 and len(z.lattice_generators) == 1
    assert abs(abs(z.lattice_generators[0][0]) - TWO_PI) < 1e-8


def test_zero_set_planar_atom():
    t = LevyTriplet.poisson([[1.0, 0.0]])
    z = find_zero_set(t)
    assert len(z.subspace_basis) == 1 and len(z.lattice_generators) == 1
    assert np.allclose(np.abs(z.subspace_basis[0]), [0.0, 1.0], atol=1e-8)
    assert np.allclose(np.abs(z.lattice_generators[0]), [TWO_PI, 0.0], atol=1e-8)


def test_zero_set_two_dimensional_lattice_closure():
    t = LevyTriplet.poisson([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]], [1.0, 0.5, 0.25])
    z = find_zero_set(t)
    gens = np.asarray(z.lattice_generators)
    assert len(gens) == 2 and len(z.subspace_basis) == 0
    assert abs(abs(np.linalg.det(gens)) - TWO_PI ** 2) < 1e-6
    for a, b in itertools.combinations_with_replacement(range(len(gens)), 2):
        assert periodicity_ok(t, gens[a] + gens[b])
        assert periodicity_ok(t, gens[a] - gens[b])


def test_zero_set_invariants_on_corpus(corpus):
    for name, t in corpus.items():
        z = find_zero_set(t)
        for g in z.lattice_generators:
            assert periodicity_ok(t, g), name
        for e in z.subspace_basis:
            line = np.linspace(-20, 20, 50)[:, None] * e[None, :]
            assert np.max(np.abs(eval_psi(t, line))) < 1e-8, name


# verdicts -------------------------------------------------------------------

def test_verdict_brownian():
    v = liouville_verdict(LevyTriplet.brownian(3))
    assert v.holds and "full rank" in v.reason


def test_verdict_poisson_witness():
    v = liouville_verdict(LevyTriplet.poisson([1.0]))
    assert v.fails
    gamma = np.array(v.witness["vector"])
    assert abs(abs(gamma[0]) - TWO_PI) < 1e-8
    rep = check_harmonic(LevyTriplet.poisson([1.0]), trig_function(witness_grid(gamma), gamma))
    assert max(rep.residuals) < 1e-10


def test_verdict_weierstrass():
    v = liouville_verdict(weierstrass())
    assert v.fails
    assert abs(abs(v.witness["vector"][0]) - 2.0) < 1e-8
    # brute force: 3^k * pi * xi lands in 2 pi Z for every k exactly when xi in 2Z
    for xi in np.arange(0.25, 6.01, 0.25):
        hits = all(abs(((3 ** k) * xi / 2) - round((3 ** k) * xi / 2)) < 1e-12 for k in range(9))
        assert hits == (abs(xi / 2 - round(xi / 2)) < 1e-12)


def test_verdict_corpus_example(tmp_path):
    import levy_liouville

    corpus_dir = __import__("pathlib").Path(levy_liouville.__file__).parent / "corpus"
    t = load_triplet(corpus_dir / "weierstrass.json")
    assert liouville_verdict(t).fails


def test_verdict_witness_coherence(corpus):
    rng = np.random.default_rng(0)
    for name, t in corpus.items():
        v = liouville_verdict(t)
        if v.fails:
            gamma = np.array(v.witness["vector"])
            assert check_harmonic(t, trig_function(witness_grid(gamma), gamma)).harmonic, name
            for n in (1, 2, 3):
                f = trig_function(witness_grid(gamma), gamma)
                assert power_generator_apply(t, n, f).max_abs() < 1e-8, name
        elif v.holds:
            tried = 0
            while tried < 50:
                gamma = rng.uniform(-10, 10, size=t.dim)
                if abs(eval_psi(t, gamma)) <= 0.01:
                    continue
                tried += 1
                assert not check_harmonic(t, trig_function(witness_grid(gamma), gamma)).harmonic


@pytest.mark.parametrize("h", [power(0.5), log1p(), resolvent(1.0)], ids=["power", "log1p", "resolvent"])
def test_subordination_preserves_verdict(h):
    for t in (LevyTriplet.poisson([1.0]), LevyTriplet.poisson([2.0, 3.0]), stable(1.5),
              LevyTriplet.poisson([[1.0, 0.0]])):
        box = 10.0 if t.dim == 1 else 8.0
        a = liouville_verdict(t, box_halfwidth=box)
        b = liouville_verdict(subordinate(h, t), box_halfwidth=box)
        assert a.status == b.status
        if a.fails:
            assert np.allclose(np.abs(a.witness["vector"]), np.abs(b.witness["vector"]), atol=1e-8)


def test_strong_verdict_drift():
    t = LevyTriplet.brownian(1, drift=[1.0])
    v = strong_liouville_verdict(t, ExponentialBound(3.0))
    assert v.fails and v.witness["kind"] == "exponential"
    assert abs(v.witness["vector"][0] + 2.0) < 1e-8
    assert v.residuals["exponential_zero"] < 1e-10
    assert all(c["ok"] for c in v.extra["mc_check"])


def test_strong_verdict_symmetric():
    t = LevyTriplet([0.0, 0.0], [[1.0, 0.0], [0.0, 0.0]],
                    (Atoms([[0.0, 1.0], [0.0, -1.0], [2.0, 0.5], [-2.0, -0.5]], [1.0, 1.0, 0.3, 0.3]),))
    v = strong_liouville_verdict(t, ExponentialBound(1.0))
    assert v.status in ("holds", "fails")
    assert "exponential_zero" not in v.residuals
    assert liouville_verdict(LevyTriplet.brownian(1)).holds
    assert strong_liouville_verdict(LevyTriplet.brownian(2), ExponentialBound(2.0)).holds


def test_strong_verdict_hypothesis_error():
    with pytest.raises(HypothesisError):
        strong_liouville_verdict(stable(1.5), ExponentialBound(1.0))


# lattice algebra ------------------------------------------------------------

def test_hnf_examples():
    assert hnf_lattice([[2], [3]]) == [[1]]
    assert hnf_lattice([[1, 0, 0], [0, 1, 0], [0, 0, 1]]) == [[1, 0, 0], [0, 1, 0], [0, 0, 1]]
    basis = hnf_lattice([[2, 0], [0, 2], [1, 1]])
    assert basis == [[1, 1], [0, 2]]
    assert abs(np.linalg.det(np.array(basis, dtype=float))) == 2


def _members(basis, vec):
    """Exact membership by back substitution on an upper-triangular integer basis."""
    rest = list(vec)
    for row in basis:
        col = next(i for i, v in enumerate(row) if v)
        if rest[col] % row[col]:
            return False
        q = rest[col] // row[col]
        rest = [a - q * b for a, b in zip(rest, row)]
    return not any(rest)


@given(st.lists(st.lists(st.integers(-12, 12), min_size=3, max_size=3), min_size=1, max_size=5))
def test_hnf_preserves_lattice(rows):
    basis = hnf_lattice(rows)
    for r in rows:
        assert _members(basis, r)
    for b in basis:
        assert hnf_lattice(rows + [b]) == basis
    pivots = [next(i for i, v in enumerate(r) if v) for r in basis]
    assert pivots == sorted(set(pivots))
    for i, (c, r) in enumerate(zip(pivots, basis)):
        assert r[c] > 0
        assert all(0 <= basis[j][c] < r[c] for j in range(i))


def test_orthogonal_subgroup_examples():
    n = 2
    z0 = GroupDescriptor(n, np.zeros((0, n)), np.zeros((0, n)))
    o = orthogonal_subgroup(z0)
    assert len(o.subspace_basis) == n and len(o.lattice_generators) == 0
    z1 = GroupDescriptor(1, np.zeros((0, 1)), np.array([[TWO_PI]]))
    o = orthogonal_subgroup(z1)
    assert len(o.subspace_basis) == 0 and np.allclose(o.lattice_generators, [[1.0]])
    zf = GroupDescriptor(n, np.eye(n), np.zeros((0, n)))
    o = orthogonal_subgroup(zf)
    assert len(o.subspace_basis) == 0 and len(o.lattice_generators) == 0


def test_orthogonal_subgroup_rejects_dense():
    z = find_zero_set(LevyTriplet.poisson([1.0]))
    z.dense_flag = True
    with pytest.raises(ValidationError):
        orthogonal_subgroup(z)


@given(st.lists(st.floats(-3, 3), min_size=4, max_size=4))
def test_orthogonal_subgroup_involution(entries):
    b = np.array(entries).reshape(2, 2)
    assume(abs(np.linalg.det(b)) > 0.2 and np.linalg.cond(b) < 1e3)
    g = GroupDescriptor(2, np.zeros((0, 2)), b)
    back = orthogonal_subgroup(orthogonal_subgroup(g))
    assert len(back.subspace_basis) == 0
    assert np.allclose(back.lattice_generators, b, atol=1e-9)


def test_alibaud_examples():
    d, data = alibaud_group(LevyTriplet.poisson([2.0, 3.0]))
    assert d.exact and len(d.subspace_basis) == 0 and np.allclose(np.abs(d.lattice_generators), [[1.0]])
    assert np.all(data.c_nu == 0)
    d, _ = alibaud_group(LevyTriplet([0.0, 0.0], np.eye(2), LevyTriplet.poisson([[1.0, 2.0]]).jumps))
    assert len(d.subspace_basis) == 2
    d, _ = alibaud_group(LevyTriplet([1.0], [[0.0]], ()))
    assert len(d.subspace_basis) == 1 and len(d.lattice_generators) == 0
    with pytest.raises(ExactPathUnavailable):
        alibaud_group(LevyTriplet.poisson([1.0, math.sqrt(2)]))


def test_alibaud_data_invariants():
    q = np.array([[2.0, 1.0], [1.0, 1.0]])
    t = LevyTriplet([0.5, 0.0], q, LevyTriplet.poisson([[0.5, 0.0], [0.0, 3.0]], [2.0, 1.0]).jumps)
    data = alibaud_data(t)
    assert np.allclose(data.sigma @ data.sigma, q, atol=1e-10)
    assert np.allclose(data.c_nu, [-1.0, 0.0])


def test_duality_examples():
    for t, lattice in ((LevyTriplet.poisson([2.0, 3.0]), 1.0), (LevyTriplet.poisson([1.0]), 1.0)):
        rep = cross_check_duality(t)
        assert rep.equal
        assert np.allclose(np.abs(rep.orthogonal.lattice_generators), [[lattice]], atol=1e-6)
        assert np.allclose(np.abs(rep.zero_set.lattice_generators), [[TWO_PI]], atol=1e-8)
    rep = cross_check_duality(LevyTriplet.brownian(2))
    assert rep.equal and len(rep.alibaud.subspace_basis) == 2


def test_duality_irrational_is_inconclusive():
    rep = cross_check_duality(LevyTriplet.poisson([1.0, math.sqrt(2)]), box_halfwidth=10.0)
    assert rep.status == "inconclusive" and "exact path unavailable" in rep.reason


def test_smoothness_order():
    assert smoothness_order(LevyTriplet.poisson([1.0, -5.0])) == math.inf
    assert smoothness_order(stable(1.5)) == 1
    assert smoothness_order(stable(0.5)) == 0
    assert smoothness_order(stable(2.0 - 1e-9)) == 1
    radial = RadialDensity(RadialProfile("power", 1.0, 1.5), 0.0, 5.0, 1)
    assert smoothness_order((radial,)) == math.inf
