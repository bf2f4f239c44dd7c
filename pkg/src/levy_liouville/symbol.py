"""Characteristic exponents, Bernstein functions and subordination.

Symbols are small immutable evaluation trees. A leaf wraps a
:class:`~levy_liouville.levy_core.LevyTriplet`; inner nodes conjugate a
symbol or compose it with a Bernstein function. Evaluation is vectorised:
``xi`` may be a single vector of length ``n`` or an ``(m, n)`` array.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate

from . import kernels
from .levy_core import (
    Atoms,
    IsotropicStable,
    LevyTriplet,
    RadialDensity,
    ValidationError,
    exponential_moment_finite,
    gauss_legendre,
    spherical_cos_mean,
)

ROW_CHUNK = 4096


class DomainError(ValueError):
    """Complex argument outside the strip where the exponent extends."""


def _rows(xi, n):
    arr = np.asarray(xi, dtype=float)
    single = arr.ndim <= 1
    arr = arr.reshape(-1, n) if single else arr
    if arr.shape[-1] != n:
        raise ValueError(f"expected vectors of length {n}, got shape {np.shape(xi)}")
    return arr, single


def _finish(val, single):
    return complex(val[0]) if single else val


# --------------------------------------------------------------------------
# symbols
# --------------------------------------------------------------------------

class Symbol:
    """Base class; subclasses implement ``_eval`` and ``_eval_strip`` on 2-d arrays."""

    dim: int

    def __call__(self, xi):
        return eval_psi(self, xi)

    @property
    def frequency_scale(self):
        """Largest jump length; sets how fast the exponent oscillates."""
        return 0.0

    @property
    def is_real(self):
        return False


@dataclass(frozen=True, eq=False)
class TripletSymbol(Symbol):
    triplet: LevyTriplet

    @property
    def dim(self):
        return self.triplet.dim

    @property
    def frequency_scale(self):
        scale = 0.0
        for comp in self.triplet.jumps:
            if isinstance(comp, Atoms):
                scale = max(scale, float(comp.norms.max()))
            elif isinstance(comp, RadialDensity):
                scale = max(scale, comp.r_max)
        return scale

    @property
    def is_real(self):
        t = self.triplet
        if np.any(t.drift):
            return False
        for comp in t.jumps:
            if isinstance(comp, Atoms):
                pairs = {tuple(np.round(loc, 12)): m for loc, m in zip(comp.locations, comp.masses)}
                for loc, m in pairs.items():
                    if abs(pairs.get(tuple(-np.array(loc)), -1.0) - m) > 1e-12:
                        return False
        return True

    def components(self, xi):
        """Per-part contributions at real ``xi`` (drift, gaussian, then each jump component)."""
        x, single = _rows(xi, self.dim)
        t = self.triplet
        parts = {
            "drift": -1j * (x @ t.drift),
            "gaussian": 0.5 * np.einsum("ij,jk,ik->i", x, t.gaussian, x).astype(complex),
        }
        for i, comp in enumerate(t.jumps):
            parts[f"jump{i}"] = _component_exponent(comp, x)
        if single:
            parts = {k: complex(v[0]) for k, v in parts.items()}
        return parts

    def _eval(self, x):
        return sum(self.components(x).values())

    def _eval_strip(self, x, eta):
        t = self.triplet
        jumps = t.jumps
        for row in np.unique(eta, axis=0):
            if not exponential_moment_finite(jumps, row):
                raise DomainError("exponential moment along eta diverges; no analytic extension")
        q = t.gaussian
        re = -(eta @ t.drift) + 0.5 * np.einsum("ij,jk,ik->i", x, q, x) \
            - 0.5 * np.einsum("ij,jk,ik->i", eta, q, eta)
        im = -(x @ t.drift) - np.einsum("ij,jk,ik->i", x, q, eta)
        val = re + 1j * im
        for comp in jumps:
            val = val + _component_strip(comp, x, eta)
        return val


@dataclass(frozen=True, eq=False)
class ConjugatedSymbol(Symbol):
    inner: Symbol

    @property
    def dim(self):
        return self.inner.dim

    @property
    def frequency_scale(self):
        return self.inner.frequency_scale

    @property
    def is_real(self):
        return self.inner.is_real

    def _eval(self, x):
        return np.conj(self.inner._eval(x))

    def _eval_strip(self, x, eta):
        # analytic continuation of conj(psi(xi)) = psi(-xi)
        return self.inner._eval_strip(-x, -eta)


@dataclass(frozen=True, eq=False)
class SubordinatedSymbol(Symbol):
    h: "BernsteinFunction"
    inner: Symbol

    @property
    def dim(self):
        return self.inner.dim

    @property
    def frequency_scale(self):
        return self.inner.frequency_scale

    @property
    def is_real(self):
        return self.inner.is_real

    def _eval(self, x):
        return eval_bernstein(self.h, self.inner._eval(x))

    def _eval_strip(self, x, eta):
        w = self.inner._eval_strip(x, eta)
        if np.any(w.real < -1e-12):
            raise DomainError("inner exponent leaves the right half-plane; Bernstein function does not extend")
        return eval_bernstein(self.h, np.where(w.real < 0, 1j * w.imag, w))


def symbol_of(t: LevyTriplet) -> TripletSymbol:
    return TripletSymbol(t)


def _as_symbol(s):
    return TripletSymbol(s) if isinstance(s, LevyTriplet) else s


# --------------------------------------------------------------------------
# per-component exponents
# --------------------------------------------------------------------------

def _radial_sum(comp, modulus):
    """``sum_i shell_i * (1 - Phi_n(modulus * r_i))`` chunked over rows."""
    r, shell = comp.radii, comp.shell_weights
    out = np.empty(modulus.shape[0], dtype=complex)
    for lo in range(0, modulus.shape[0], ROW_CHUNK):
        block = modulus[lo:lo + ROW_CHUNK, None] * r[None, :]
        out[lo:lo + ROW_CHUNK] = (1.0 - spherical_cos_mean(block, comp.dim)) @ shell
    return out


def _component_exponent(comp, x):
    if isinstance(comp, Atoms):
        return kernels.atom_exponent(x, comp.locations, comp.masses, comp.norms < 1.0)
    if isinstance(comp, IsotropicStable):
        return (comp.symbol_constant * np.linalg.norm(x, axis=1) ** comp.alpha).astype(complex)
    # odd compensator integrates to zero against an isotropic shell
    return _radial_sum(comp, np.linalg.norm(x, axis=1)).real.astype(complex)


def _component_strip(comp, x, eta):
    if isinstance(comp, Atoms):
        locs, m = comp.locations, comp.masses
        small = comp.norms < 1.0
        ph = x @ locs.T
        gr = eta @ locs.T
        with np.errstate(over="ignore"):
            grow = np.exp(gr)
        re = (1.0 - np.cos(ph) * grow + gr * small) @ m
        im = (ph * small - np.sin(ph) * grow) @ m
        return re + 1j * im
    if isinstance(comp, IsotropicStable):
        if np.any(eta):
            raise DomainError("stable tails have no exponential moments")
        return _component_exponent(comp, x)
    zz = np.einsum("ij,ij->i", x, x) - np.einsum("ij,ij->i", eta, eta) \
        - 2j * np.einsum("ij,ij->i", x, eta)
    return _radial_sum(comp, np.sqrt(zz.astype(complex)))


# --------------------------------------------------------------------------
# public evaluation
# --------------------------------------------------------------------------

def eval_psi(s, xi):
    """Exponent at real frequencies; scalar in, scalar out."""
    s = _as_symbol(s)
    x, single = _rows(xi, s.dim)
    return _finish(np.asarray(s._eval(x), dtype=complex), single)


def eval_psi_complex(s, xi, eta):
    """Exponent at ``xi - i*eta``.

    Raises :class:`DomainError` when the directional exponential moment of
    the jump measure along ``eta`` is infinite.
    """
    s = _as_symbol(s)
    x, single = _rows(xi, s.dim)
    e, _ = _rows(eta, s.dim)
    if e.shape[0] == 1 and x.shape[0] > 1:
        e = np.repeat(e, x.shape[0], axis=0)
    if not np.any(e):
        return eval_psi(s, xi)
    return _finish(np.asarray(s._eval_strip(x, e), dtype=complex), single)


def adjoint(s):
    """Symbol of ``-X``; its values are the complex conjugates."""
    s = _as_symbol(s)
    if isinstance(s, TripletSymbol):
        return TripletSymbol(s.triplet.mirrored())
    if isinstance(s, ConjugatedSymbol):
        return s.inner
    return ConjugatedSymbol(s)


def subordinate(h, s):
    return SubordinatedSymbol(h, _as_symbol(s))


def transform(s, a):
    """Symbol ``xi -> psi(A^T xi)`` built from the transformed triplet."""
    s = _as_symbol(s)
    if not isinstance(s, TripletSymbol):
        raise ValidationError("coordinate changes act on triplet-backed symbols")
    return TripletSymbol(s.triplet.transformed(a))


# --------------------------------------------------------------------------
# Bernstein functions
# --------------------------------------------------------------------------

PRESETS = ("power", "log1p", "resolvent", "semigroup")


@dataclass(frozen=True, eq=False)
class BernsteinFunction:
    """``h(z) = a z + int (1 - exp(-z s)) pi(ds)``.

    ``pi`` is a list of half-line atoms ``(s, mass)`` plus an optional
    density on ``[lo, hi]``. Presets carry their measure for reference and
    are evaluated through closed forms.
    """

    a: float = 0.0
    atoms: tuple = ()
    density: Callable | None = None
    support: tuple = (0.0, math.inf)
    name: str | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.a < 0:
            raise ValidationError("Bernstein linear coefficient must be nonnegative")
        for s, m in self.atoms:
            if not (s > 0 and m > 0):
                raise ValidationError("Bernstein atoms need s > 0 and mass > 0")
        if self.name is not None and self.name not in PRESETS:
            raise ValidationError(f"unknown Bernstein preset {self.name!r}")

    @property
    def trivial_zero(self):
        """True when 0 is the only zero on the closed right half-plane."""
        return self.a > 0 or self.density is not None

    def to_json(self):
        if self.name is None:
            return {"a": self.a, "atoms": [list(p) for p in self.atoms]}
        return {"name": self.name, **self.params}


def power(alpha):
    if not 0.0 < alpha < 1.0:
        raise ValidationError("power Bernstein function needs 0 < alpha < 1")
    c = alpha / math.gamma(1.0 - alpha)
    return BernsteinFunction(density=lambda s: c * s ** (-1.0 - alpha), name="power",
                             params={"alpha": alpha})


def log1p():
    return BernsteinFunction(density=lambda s: np.exp(-s) / s, name="log1p")


def resolvent(tau):
    if not tau > 0:
        raise ValidationError("resolvent Bernstein function needs tau > 0")
    return BernsteinFunction(density=lambda s: tau * np.exp(-tau * s), name="resolvent",
                             params={"tau": tau})


def semigroup(t):
    if not t > 0:
        raise ValidationError("semigroup Bernstein function needs t > 0")
    return BernsteinFunction(atoms=((t, 1.0),), name="semigroup", params={"t": t})


def identity():
    return BernsteinFunction(a=1.0)


def bernstein_from_config(cfg):
    name = cfg["name"]
    if name == "power":
        return power(float(cfg.get("alpha", 0.5)))
    if name == "log1p":
        return log1p()
    if name == "resolvent":
        return resolvent(float(cfg.get("tau", 1.0)))
    return semigroup(float(cfg.get("t", 1.0)))


def eval_bernstein(h, zeta):
    """Evaluate ``h`` on ``Re zeta >= 0`` (principal branches for presets)."""
    z = np.asarray(zeta, dtype=complex)
    if h.name == "power":
        out = np.power(z, h.params["alpha"])
    elif h.name == "log1p":
        out = np.log1p(z)
    elif h.name == "resolvent":
        out = z / (h.params["tau"] + z)
    elif h.name == "semigroup":
        out = -np.expm1(-z * h.params["t"])
    else:
        out = h.a * z
        for s, m in h.atoms:
            out = out - m * np.expm1(-z * s)
        if h.density is not None:
            lo, hi = h.support
            if not math.isfinite(hi):
                raise ValidationError("custom Bernstein densities need a bounded support")
            r, w = gauss_legendre(lo, hi, 256, graded=lo == 0.0)
            out = out + (-np.expm1(-np.multiply.outer(z, r))) @ (w * h.density(r))
    out = np.where(z == 0, 0.0, out)
    return complex(out) if np.ndim(zeta) == 0 else out


def eval_bernstein_quadrature(h, zeta):
    """``a z + int (1 - e^{-z s}) pi(ds)`` by adaptive quadrature of the measure itself."""
    z = complex(zeta)
    total = h.a * z
    for s, m in h.atoms:
        total += m * (1.0 - np.exp(-z * s))
    if h.density is not None:
        lo, hi = h.support
        a, b = z.real, z.imag
        head = min(1.0, hi)

        def quad(fn, lo_, hi_, **kw):
            return integrate.quad(fn, lo_, hi_, limit=400, epsabs=1e-13, epsrel=1e-12, **kw)[0]

        total += quad(lambda s: (1.0 - np.exp(-z * s)).real * h.density(s), lo, head)
        total += 1j * quad(lambda s: (1.0 - np.exp(-z * s)).imag * h.density(s), lo, head)
        if hi > 1.0:
            # oscillatory tail: Fourier-weighted rules handle e^{-as} cos(bs) on [1, inf)
            damped = lambda s: np.exp(-a * s) * h.density(s)  # noqa: E731
            total += quad(h.density, 1.0, hi)
            if b == 0.0:
                total -= quad(damped, 1.0, hi)
            else:
                total -= quad(damped, 1.0, hi, weight="cos", wvar=abs(b))
                total += 1j * math.copysign(1.0, b) * quad(damped, 1.0, hi, weight="sin", wvar=abs(b))
    return total
