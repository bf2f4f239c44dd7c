"""Generator, semigroup and resolvent: spectrally on a torus and by Monte Carlo.

Spectral operators act on :class:`GridFunction` values through Fourier
multipliers built from the exponent at the grid frequencies. The Monte
Carlo route samples terminal values ``X_t`` with counter-based streams, so a
fixed ``(seed, paths)`` gives the same sample no matter how many workers
produce it.
"""

from __future__ import annotations

import csv
import io
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import kernels
from .levy_core import (
    Atoms,
    IsotropicStable,
    LevyTriplet,
    RadialDensity,
    ValidationError,
    levy_moment,
    psd_sqrt,
    sphere_area,
)
from .symbol import Symbol, eval_psi, symbol_of

SQRT2 = math.sqrt(2.0)
DEFAULT_TIMES = (1.0, SQRT2)
TIME_LABELS = {1.0: "1", SQRT2: "sqrt(2)"}
SPECTRAL_TOL = 1e-8
MC_SIGMAS = 4.0
CHUNK_PATHS = 1 << 16
RADIAL_TABLE = 4097


class GrowthError(ValueError):
    """The candidate's growth is not integrable against the jump measure."""


class QuadratureError(RuntimeError):
    def __init__(self, message, error_estimate):
        super().__init__(f"{message} (achieved error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


def _as_symbol(s):
    return symbol_of(s) if isinstance(s, LevyTriplet) else s


def time_label(t):
    return TIME_LABELS.get(t, repr(float(t)))


# --------------------------------------------------------------------------
# torus grids
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class TorusGrid:
    """``points[i]`` equispaced samples on ``[0, period[i])`` per axis."""

    period: tuple
    points: tuple

    def __post_init__(self):
        period = tuple(float(p) for p in np.atleast_1d(self.period))
        points = tuple(int(p) for p in np.atleast_1d(self.points))
        if len(points) == 1 and len(period) > 1:
            points = points * len(period)
        if len(period) != len(points):
            raise ValidationError("grid needs one period and one size per axis")
        if any(not p > 0 for p in period):
            raise ValidationError("grid periods must be positive")
        if any(n < 2 or n & (n - 1) for n in points):
            raise ValidationError("grid sizes must be powers of two")
        object.__setattr__(self, "period", period)
        object.__setattr__(self, "points", points)

    @classmethod
    def cube(cls, dim, period, points):
        return cls((period,) * dim, (points,) * dim)

    @property
    def dim(self):
        return len(self.points)

    @property
    def shape(self):
        return self.points

    @property
    def size(self):
        return int(np.prod(self.points))

    def axes(self):
        return [L * np.arange(n) / n for L, n in zip(self.period, self.points)]

    def coordinates(self):
        """Grid points as an ``(size, dim)`` array in C order."""
        mesh = np.meshgrid(*self.axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def frequency_axes(self):
        return [2.0 * np.pi * np.fft.fftfreq(n, d=L / n) for L, n in zip(self.period, self.points)]

    def frequencies(self):
        """Frequencies ``2 pi k / L`` in FFT order, as an ``(size, dim)`` array."""
        mesh = np.meshgrid(*self.frequency_axes(), indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def to_json(self):
        return {"period": list(self.period), "points": list(self.points)}


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: TorusGrid
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=complex).reshape(self.grid.shape)
        if not np.all(np.isfinite(vals)):
            raise ValidationError("grid function values must be finite")
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_callable(cls, grid, f):
        """Sample ``f`` (taking an ``(m, dim)`` array) on the grid."""
        return cls(grid, np.asarray(f(grid.coordinates())).reshape(grid.shape))

    def max_abs(self):
        return float(np.max(np.abs(self.values)))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - other.values)

    def evaluate(self, points):
        """Trigonometric interpolation at arbitrary points of shape ``(m, dim)``."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        coef = np.fft.fftn(self.values).ravel() / self.grid.size
        keep = np.abs(coef) > 1e-15 * max(np.abs(coef).max(), 1e-300)
        freqs = self.grid.frequencies()[keep]
        return np.exp(1j * pts @ freqs.T) @ coef[keep]

    def to_csv(self):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i}" for i in range(self.grid.dim)] + ["re", "im"])
        for x, v in zip(self.grid.coordinates(), self.values.ravel()):
            w.writerow([repr(float(c)) for c in x] + [repr(float(v.real)), repr(float(v.imag))])
        return buf.getvalue()


def trig_function(grid, gamma, kind="cos"):
    """``cos(gamma.x)`` or ``exp(i gamma.x)`` sampled on ``grid``."""
    gamma = np.atleast_1d(np.asarray(gamma, dtype=float))
    phase = grid.coordinates() @ gamma
    vals = np.cos(phase) if kind == "cos" else np.exp(1j * phase)
    return GridFunction(grid, vals.reshape(grid.shape))


def symbol_on_grid(s, grid):
    s = _as_symbol(s)
    if s.dim != grid.dim:
        raise ValidationError("grid dimension differs from the symbol dimension")
    return np.asarray(eval_psi(s, grid.frequencies())).reshape(grid.shape)


def _apply_multiplier(f, mult):
    return GridFunction(f.grid, np.fft.ifftn(mult * np.fft.fftn(f.values)))


# --------------------------------------------------------------------------
# spectral operators
# --------------------------------------------------------------------------

def apply_generator_spectral(s, f):
    """``L f`` with multiplier ``-psi`` at the grid frequencies."""
    return _apply_multiplier(f, -symbol_on_grid(s, f.grid))


def power_generator_apply(s, n, f):
    """``L^n f`` with multiplier ``(-psi)^n``."""
    if int(n) != n or n < 1:
        raise ValidationError("generator power must be a positive integer")
    neg = -symbol_on_grid(s, f.grid)
    mult = neg
    for _ in range(int(n) - 1):
        mult = mult * neg
    return _apply_multiplier(f, mult)


def semigroup_apply_spectral(s, t, f):
    """``P_t f`` with multiplier ``exp(-t psi)``."""
    if t < 0:
        raise ValidationError("semigroup time must be nonnegative")
    return _apply_multiplier(f, np.exp(-t * symbol_on_grid(s, f.grid)))


def resolvent_apply(s, lam, f):
    """``lam R_lam f`` with multiplier ``lam / (lam + psi)``."""
    if not lam > 0:
        raise ValidationError("resolvent parameter must be positive")
    return _apply_multiplier(f, lam / (lam + symbol_on_grid(s, f.grid)))


# --------------------------------------------------------------------------
# generator by quadrature of the integro-differential form
# --------------------------------------------------------------------------

def _fd_gradient(f, x, h):
    n = x.size
    g = np.empty(n, dtype=complex)
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def _fd_hessian(f, x, h):
    n = x.size
    hess = np.empty((n, n), dtype=complex)
    fx = f(x)
    for i in range(n):
        ei = np.zeros(n)
        ei[i] = h
        hess[i, i] = (f(x + ei) - 2 * fx + f(x - ei)) / (h * h)
        for j in range(i):
            ej = np.zeros(n)
            ej[j] = h
            v = (f(x + ei + ej) - f(x + ei - ej) - f(x - ei + ej) + f(x - ei - ej)) / (4 * h * h)
            hess[i, j] = hess[j, i] = v
    return hess


def sphere_rule(n, size=64):
    """Directions and weights (summing to 1) for averaging over the unit sphere."""
    if n == 1:
        return np.array([[1.0], [-1.0]]), np.array([0.5, 0.5])
    if n == 2:
        ang = 2 * np.pi * np.arange(size) / size
        return np.stack([np.cos(ang), np.sin(ang)], axis=1), np.full(size, 1.0 / size)
    if n == 3:
        u, wu = np.polynomial.legendre.leggauss(size // 2)
        phi = 2 * np.pi * np.arange(size) / size
        cu, ph = np.meshgrid(u, phi, indexing="ij")
        su = np.sqrt(1 - cu ** 2)
        dirs = np.stack([su * np.cos(ph), su * np.sin(ph), cu], axis=-1).reshape(-1, 3)
        w = (wu[:, None] * np.full(size, 1.0 / size)[None, :]).ravel() / 2.0
        return dirs, w
    raise ValidationError("isotropic quadrature supports dimensions 1 to 3")


def _quad(fn, a, b, what, tol):
    # scipy's own warning is replaced by the error-estimate check below
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        re, err_re = integrate.quad(lambda r: fn(r).real, a, b, limit=2000, epsabs=tol * 1e-2,
                                    epsrel=1e-10)
        im, err_im = integrate.quad(lambda r: fn(r).imag, a, b, limit=2000, epsabs=tol * 1e-2,
                                    epsrel=1e-10)
    err = err_re + err_im
    if not math.isfinite(err) or err > tol:
        raise QuadratureError(f"{what} quadrature did not converge", err)
    return re + 1j * im


def apply_generator_quadrature(t, f, x, grad=None, hess=None, h=1e-4, tol=1e-6):
    """Generator at ``x`` from its integro-differential representation.

    ``f`` maps a point of shape ``(n,)`` to a scalar. Missing derivatives
    are central differences with step ``h``. Isotropic components use the
    symmetrised second difference, whose compensator term cancels, and a
    second-order Taylor replacement on ``r < r_taylor`` to avoid roundoff.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    n = t.dim
    if x.size != n:
        raise ValidationError("point dimension differs from the triplet")
    g = np.asarray(grad(x) if grad is not None else _fd_gradient(f, x, h), dtype=complex)
    hm = np.asarray(hess(x) if hess is not None else _fd_hessian(f, x, h), dtype=complex)
    fx = f(x)
    out = t.drift @ g + 0.5 * np.sum(t.gaussian * hm)
    dirs, wts = sphere_rule(n)
    lap_dir = np.einsum("ki,ij,kj->k", dirs, hm, dirs) @ wts  # mean of theta.H.theta
    r_taylor = 1e-3

    def second_diff(r):
        # directions come in antipodal pairs, so the compensator averages out
        if r < r_taylor:
            return 0.5 * r * r * lap_dir
        vals = np.array([f(p) for p in x[None, :] + r * dirs])
        return (vals - fx) @ wts

    for comp in t.jumps:
        if isinstance(comp, Atoms):
            for loc, m, nrm in zip(comp.locations, comp.masses, comp.norms):
                out += m * (f(x + loc) - fx - (loc @ g if nrm < 1.0 else 0.0))
        elif isinstance(comp, IsotropicStable):
            c = comp.scale * sphere_area(n)
            a = comp.alpha
            dens = lambda r: c * r ** (-1.0 - a)  # noqa: E731
            out += _quad(lambda r: second_diff(r) * dens(r), 0.0, 1.0, "stable small-jump", tol)
            out += _quad(lambda r: second_diff(r) * dens(r), 1.0, np.inf, "stable tail", tol)
        else:
            c = sphere_area(n)
            dens = lambda r: c * comp.profile(r) * r ** (n - 1)  # noqa: E731
            lo, hi = comp.r_min, comp.r_max
            out += _quad(lambda r: second_diff(r) * dens(r), lo, hi, "radial", tol)
    return complex(out)


# --------------------------------------------------------------------------
# sampling
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class MCConfig:
    seed: int = 0
    paths: int = 100_000
    workers: int = 1

    def __post_init__(self):
        if not 0 <= int(self.seed) <= kernels.MASK64:
            raise ValidationError("seed must be an unsigned 64-bit integer")
        if self.paths < 1:
            raise ValidationError("paths must be at least 1")
        if self.workers < 1:
            raise ValidationError("workers must be at least 1")

    def to_json(self):
        return {"seed": int(self.seed), "paths": int(self.paths), "workers": int(self.workers)}


@dataclass(frozen=True, eq=False)
class SamplingPlan:
    """Arrays consumed by the sampling kernels for one time horizon."""

    drift_t: np.ndarray
    sigma_t: np.ndarray
    atom_locs: np.ndarray
    atom_means: np.ndarray
    radial_means: np.ndarray
    radial_r: np.ndarray
    radial_cdf: np.ndarray
    stable_alpha: np.ndarray
    stable_factor: np.ndarray
    stable_iso: np.ndarray


def _radial_table(comp):
    r = np.linspace(comp.r_min, comp.r_max, RADIAL_TABLE)
    dens = comp.profile(r) * r ** (comp.dim - 1)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(r))])
    return r, cdf / cdf[-1]


def sampling_plan(t: LevyTriplet, time):
    if not time > 0:
        raise ValidationError("sampling time must be positive")
    n = t.dim
    drift = t.drift * time
    locs, means, rmeans, rr, rc, alphas, factors, iso = [], [], [], [], [], [], [], []
    for comp in t.jumps:
        if isinstance(comp, Atoms):
            small = comp.norms < 1.0
            # compensator of small atoms becomes a deterministic drift
            drift = drift - time * (comp.masses[small] @ comp.locations[small])
            locs.extend(comp.locations)
            means.extend(time * comp.masses)
        elif isinstance(comp, RadialDensity):
            if comp.r_min <= 0.0:
                raise ValidationError("cannot sample a radial density with r_min = 0")
            r, cdf = _radial_table(comp)
            rmeans.append(time * comp.total_mass)
            rr.append(r)
            rc.append(cdf)
        else:
            alphas.append(comp.alpha)
            factors.append((time * comp.symbol_constant) ** (1.0 / comp.alpha))
            iso.append(n > 1)
    f64 = lambda a, shape: np.ascontiguousarray(np.asarray(a, dtype=float).reshape(shape))  # noqa: E731
    return SamplingPlan(
        drift_t=f64(drift, (n,)),
        sigma_t=f64(psd_sqrt(t.gaussian) * math.sqrt(time), (n, n)),
        atom_locs=f64(locs, (-1, n)) if locs else np.zeros((0, n)),
        atom_means=f64(means, (-1,)),
        radial_means=f64(rmeans, (-1,)),
        radial_r=f64(rr, (-1, RADIAL_TABLE)) if rr else np.zeros((0, RADIAL_TABLE)),
        radial_cdf=f64(rc, (-1, RADIAL_TABLE)) if rc else np.zeros((0, RADIAL_TABLE)),
        stable_alpha=f64(alphas, (-1,)),
        stable_factor=f64(factors, (-1,)),
        stable_iso=np.asarray(iso, dtype=np.bool_),
    )


def sample_levy(t: LevyTriplet, time, cfg: MCConfig, backend=None):
    """Terminal values ``X_time`` for ``cfg.paths`` paths, shape ``(paths, dim)``.

    Paths are produced in fixed blocks; ``cfg.workers`` only changes how
    many blocks run at once, never which numbers are drawn.
    """
    plan = sampling_plan(t, time)
    key = kernels.seed_key(cfg.seed)
    starts = list(range(0, cfg.paths, CHUNK_PATHS))

    def block(start):
        return kernels.sample_increments(plan, key, start, min(CHUNK_PATHS, cfg.paths - start),
                                         backend=backend)

    if cfg.workers == 1 or len(starts) == 1:
        parts = [block(s) for s in starts]
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
            parts = list(pool.map(block, starts))
    return np.concatenate(parts, axis=0)


@dataclass
class MCResult:
    estimate: complex | float
    stderr: float
    paths: int
    seed: int
    time: float
    x: list

    def to_json(self):
        est = self.estimate
        if isinstance(est, complex):
            est = [est.real, est.imag]
        return {"estimate": est, "stderr": self.stderr, "paths": self.paths, "seed": self.seed,
                "time": self.time, "x": self.x}


def check_growth(t: LevyTriplet, growth):
    if growth is None:
        return
    if not math.isfinite(levy_moment(t.jumps, growth)):
        raise GrowthError(f"moment of the jump measure against {growth.to_flag()} diverges; "
                          "E|f(X_t + x)| is not guaranteed finite")


def _mean_and_stderr(vals):
    m = vals.size
    mean = np.mean(vals)
    if m < 2:
        return mean, 0.0
    return mean, float(np.std(vals, ddof=1) / math.sqrt(m))


def mc_semigroup(t: LevyTriplet, time, f, x, cfg: MCConfig, growth=None, samples=None,
                 backend=None):
    """Monte Carlo estimate of ``E f(X_time + x)`` with its standard error.

    ``f`` takes an ``(m, dim)`` array. Pass ``samples`` to reuse draws across
    probe points.
    """
    check_growth(t, growth)
    x = np.atleast_1d(np.asarray(x, dtype=float))
    if samples is None:
        samples = sample_levy(t, time, cfg, backend=backend)
    vals = np.asarray(f(samples + x[None, :]))
    if np.iscomplexobj(vals) and np.any(vals.imag):
        mr, sr = _mean_and_stderr(vals.real)
        mi, si = _mean_and_stderr(vals.imag)
        est, se = complex(mr, mi), math.hypot(sr, si)
    else:
        est, se = _mean_and_stderr(np.real(vals).astype(float))
        est = float(est)
    return MCResult(est, float(se), cfg.paths, int(cfg.seed), float(time), x.tolist())


# --------------------------------------------------------------------------
# harmonicity checks
# --------------------------------------------------------------------------

@dataclass
class HarmonicityReport:
    route: str
    times: list
    residuals: list
    tolerance: float
    harmonic: bool
    probes: list = field(default_factory=list)
    zscores: list = field(default_factory=list)

    def to_json(self):
        out = {"route": self.route, "times": [time_label(t) for t in self.times],
               "residuals": self.residuals, "tolerance": self.tolerance,
               "harmonic": self.harmonic}
        if self.route == "monte_carlo":
            out["probes"] = self.probes
            out["zscores"] = self.zscores
        return out


def check_harmonic(t, candidate, times=DEFAULT_TIMES, cfg=None, probes=None, growth=None):
    """Fixed-point test ``P_t f = f`` at two or more times.

    Grid candidates go through the spectral multiplier (``t`` may then be any
    symbol); callables go through Monte Carlo at the probe points.
    """
    times = [float(s) for s in times]
    if len(times) < 2 or any(s <= 0 for s in times):
        raise ValidationError("need at least two positive times")
    if isinstance(candidate, GridFunction):
        res = [(semigroup_apply_spectral(t, s, candidate) - candidate).max_abs() for s in times]
        return HarmonicityReport("spectral", times, res, SPECTRAL_TOL,
                                 all(r < SPECTRAL_TOL for r in res))
    if not isinstance(t, LevyTriplet):
        raise ValidationError("the Monte Carlo route needs a Levy triplet")
    cfg = cfg or MCConfig()
    probes = np.atleast_2d(np.zeros(t.dim) if probes is None else np.asarray(probes, dtype=float))
    if probes.shape[1] != t.dim:
        probes = probes.reshape(-1, t.dim)
    check_growth(t, growth)
    res, zs = [], []
    for s in times:
        samples = sample_levy(t, s, cfg)
        for x in probes:
            r = mc_semigroup(t, s, candidate, x, cfg, samples=samples)
            diff = abs(r.estimate - complex(np.asarray(candidate(x[None, :]))[0]))
            res.append(diff)
            zs.append(0.0 if diff < 1e-12 else (math.inf if r.stderr == 0 else diff / r.stderr))
    return HarmonicityReport("monte_carlo", times, res, MC_SIGMAS,
                             all(z <= MC_SIGMAS for z in zs), probes.tolist(), zs)


# --------------------------------------------------------------------------
# convolution equation h * mu_t = h
# --------------------------------------------------------------------------

def sample_jumps(t: LevyTriplet, count, seed=0):
    """I.i.d. jumps of the finite-activity part, normalised by total mass."""
    rng = np.random.default_rng(seed)
    parts, weights = [], []
    for comp in t.jumps:
        if isinstance(comp, Atoms):
            for loc, m in zip(comp.locations, comp.masses):
                parts.append(("atom", loc))
                weights.append(m)
        elif isinstance(comp, RadialDensity) and comp.r_min > 0:
            parts.append(("radial", comp))
            weights.append(comp.total_mass)
    if not parts:
        return np.zeros((0, t.dim))
    w = np.asarray(weights) / np.sum(weights)
    pick = rng.choice(len(parts), size=count, p=w)
    out = np.empty((count, t.dim))
    for i, k in enumerate(pick):
        kind, obj = parts[k]
        if kind == "atom":
            out[i] = obj
        else:
            r, cdf = _radial_table(obj)
            rad = np.interp(rng.random(), cdf, r)
            d = rng.standard_normal(t.dim)
            out[i] = rad * d / np.linalg.norm(d)
    return out


def shift_grid_function(f, y):
    """``x -> f(x + y)`` by a Fourier phase (exact for trigonometric polynomials)."""
    phase = np.exp(1j * f.grid.frequencies() @ np.asarray(y, dtype=float)).reshape(f.grid.shape)
    return _apply_multiplier(f, phase)


@dataclass
class ChoquetDenyReport:
    time: float
    residual: float
    support_residual: float
    n_jumps: int
    distinct_jumps: int
    supports_are_periods: bool

    def to_json(self):
        return {"time": self.time, "residual": self.residual,
                "support_residual": self.support_residual, "n_jumps": self.n_jumps,
                "distinct_jumps": self.distinct_jumps,
                "supports_are_periods": self.supports_are_periods}


def choquet_deny_check(t: LevyTriplet, time, h: GridFunction, cfg=None, n_jumps=1000):
    """Residual of ``h * mu_t = h`` and a check that sampled jumps are periods of ``h``."""
    cfg = cfg or MCConfig()
    residual = (semigroup_apply_spectral(t, time, h) - h).max_abs()
    jumps = sample_jumps(t, n_jumps, seed=cfg.seed)
    uniq = np.unique(np.round(jumps, 12), axis=0) if jumps.size else jumps
    worst = 0.0
    for y in uniq:
        worst = max(worst, (shift_grid_function(h, y) - h).max_abs())
    return ChoquetDenyReport(float(time), residual, worst, int(jumps.shape[0]), int(uniq.shape[0]),
                             worst < SPECTRAL_TOL)
