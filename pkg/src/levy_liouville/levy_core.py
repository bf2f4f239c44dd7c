"""Levy triplets, their jump measures, growth bounds and moment integrals.

A jump measure is a finite list of components drawn from three families:

* :class:`Atoms` -- finitely many point masses away from the origin,
* :class:`IsotropicStable` -- ``scale * |x|**(-n-alpha) dx``,
* :class:`RadialDensity` -- ``profile(|x|) dx`` on a shell ``r_min < |x| < r_max``.

Every integral against such a measure is either an exact finite sum, a
closed form, or a one dimensional Gauss-Legendre rule in the radius.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate, special

SYM_TOL = 1e-12
PSD_TOL = 1e-12
GL_ORDER = 16


class ValidationError(ValueError):
    """Raised when a triplet or one of its components is malformed."""


# --------------------------------------------------------------------------
# small numerical helpers
# --------------------------------------------------------------------------

def sphere_area(n):
    """Surface measure of the unit sphere in R^n (2 for n=1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def stable_symbol_constant(alpha, n):
    """Constant ``c`` with ``int (1 - cos(xi.x)) |x|**(-n-alpha) dx = c |xi|**alpha``."""
    return (math.pi ** (n / 2.0) * math.gamma(1.0 - alpha / 2.0)
            / (alpha * 2.0 ** (alpha - 1.0) * math.gamma((n + alpha) / 2.0)))


def gauss_legendre(a, b, nodes, graded=False):
    """Composite Gauss-Legendre nodes/weights on [a, b].

    With ``graded`` the panels shrink geometrically towards ``a`` which keeps
    integrable singularities at a zero inner cutoff under control.
    """
    x, w = np.polynomial.legendre.leggauss(GL_ORDER)
    panels = max(1, int(nodes) // GL_ORDER)
    if graded:
        edges = a + (b - a) * np.concatenate(([0.0], 2.0 ** -np.arange(panels - 1, -1, -1.0)))
    else:
        edges = np.linspace(a, b, panels + 1)
    lo, hi = edges[:-1, None], edges[1:, None]
    r = 0.5 * (hi - lo) * x[None, :] + 0.5 * (hi + lo)
    wr = 0.5 * (hi - lo) * w[None, :]
    return r.ravel(), wr.ravel()


def spherical_cos_mean(s, n):
    """Mean of ``cos(s * theta_1)`` over the unit sphere in R^n.

    Even and entire in ``s``; complex arguments give the analytic extension.
    """
    s = np.asarray(s)
    if n == 1:
        return np.cos(s)
    if n == 2:
        return special.jv(0, s)
    if n == 3:
        small = np.abs(s) < 1e-8
        safe = np.where(small, 1.0, s)
        return np.where(small, 1.0 - s * s / 6.0, np.sin(safe) / safe)
    nu = n / 2.0 - 1.0
    small = np.abs(s) < 1e-8
    safe = np.where(small, 1.0, s)
    val = math.gamma(n / 2.0) * (2.0 / safe) ** nu * special.jv(nu, safe)
    return np.where(small, 1.0 - s * s / (2.0 * n), val)


# --------------------------------------------------------------------------
# radial profiles
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class RadialProfile:
    """Named radial profile that survives a JSON round trip.

    ``power``: c * r**(-p);  ``exp``: c * exp(-rate * r);  ``const``: c.
    """

    kind: str
    c: float = 1.0
    p: float = 0.0
    rate: float = 1.0

    def __post_init__(self):
        if self.kind not in ("power", "exp", "const"):
            raise ValidationError(f"unknown radial profile kind {self.kind!r}")
        if not self.c > 0:
            raise ValidationError("radial profile constant c must be positive")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return self.c * r ** (-self.p)
        if self.kind == "exp":
            return self.c * np.exp(-self.rate * r)
        return np.full_like(r, self.c)

    def to_json(self):
        out = {"kind": self.kind, "c": self.c}
        if self.kind == "power":
            out["p"] = self.p
        elif self.kind == "exp":
            out["rate"] = self.rate
        return out


# --------------------------------------------------------------------------
# jump measure components
# --------------------------------------------------------------------------

def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class Atoms:
    """Finite sum of point masses ``sum_j mass_j * delta_{location_j}``."""

    locations: np.ndarray
    masses: np.ndarray

    def __post_init__(self):
        locs = np.atleast_2d(np.asarray(self.locations, dtype=float))
        masses = np.atleast_1d(np.asarray(self.masses, dtype=float))
        if locs.shape[0] != masses.shape[0]:
            raise ValidationError("atoms need one mass per location")
        if locs.shape[0] == 0:
            raise ValidationError("atoms component must contain at least one atom")
        if not np.all(np.isfinite(locs)) or not np.all(np.isfinite(masses)):
            raise ValidationError("atom locations and masses must be finite")
        if np.any(masses <= 0):
            raise ValidationError("atom masses must be positive")
        if np.any(np.linalg.norm(locs, axis=1) == 0):
            raise ValidationError("atom at origin is not allowed")
        object.__setattr__(self, "locations", _frozen(locs))
        object.__setattr__(self, "masses", _frozen(masses))

    @classmethod
    def single(cls, location, mass=1.0):
        return cls(np.atleast_2d(location), [mass])

    @property
    def dim(self):
        return self.locations.shape[1]

    @property
    def norms(self):
        return np.linalg.norm(self.locations, axis=1)

    def mirrored(self):
        return Atoms(-self.locations, self.masses)

    def to_json(self):
        return {
            "type": "atoms",
            "atoms": [{"location": loc.tolist(), "mass": float(m)}
                      for loc, m in zip(self.locations, self.masses)],
        }


@dataclass(frozen=True)
class IsotropicStable:
    """``scale * |x|**(-n-alpha) dx`` in dimension ``dim``."""

    alpha: float
    scale: float = 1.0
    dim: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValidationError("alpha out of range: need 0 < alpha < 2")
        if not self.scale > 0:
            raise ValidationError("stable scale must be positive")
        if self.dim < 1:
            raise ValidationError("dimension must be at least 1")

    @property
    def symbol_constant(self):
        """``c`` with exponent ``c * |xi|**alpha``."""
        return stable_symbol_constant(self.alpha, self.dim) * self.scale

    def mirrored(self):
        return self

    def to_json(self):
        return {"type": "stable", "alpha": self.alpha, "scale": self.scale}


@dataclass(frozen=True, eq=False)
class RadialDensity:
    """``profile(|x|) dx`` restricted to ``r_min < |x| < r_max``."""

    profile: Callable
    r_min: float
    r_max: float
    dim: int = 1
    nodes: int = 512
    _rule: tuple = field(init=False, repr=False)

    def __post_init__(self):
        if not (0.0 <= self.r_min < self.r_max < math.inf):
            raise ValidationError("radial cutoffs must satisfy 0 <= r_min < r_max < inf")
        if self.nodes < GL_ORDER:
            raise ValidationError(f"radial quadrature needs at least {GL_ORDER} nodes")
        r, w = gauss_legendre(self.r_min, self.r_max, self.nodes, graded=self.r_min == 0.0)
        dens = np.asarray(self.profile(r), dtype=float)
        if dens.shape != r.shape or not np.all(np.isfinite(dens)) or np.any(dens < 0):
            raise ValidationError("radial profile must be finite and nonnegative on its support")
        # shell weights: int F(|x|) nu(dx) ~= sum F(r_i) * shell_i
        shell = w * dens * sphere_area(self.dim) * r ** (self.dim - 1)
        r.setflags(write=False)
        shell.setflags(write=False)
        object.__setattr__(self, "_rule", (r, shell))

    @property
    def radii(self):
        return self._rule[0]

    @property
    def shell_weights(self):
        return self._rule[1]

    def integrate(self, func, lo=None, hi=None):
        """``int func(|x|) nu(dx)`` over ``lo <= |x| < hi`` (defaults: whole support)."""
        lo = self.r_min if lo is None else max(lo, self.r_min)
        hi = self.r_max if hi is None else min(hi, self.r_max)
        if hi <= lo:
            return 0.0
        if lo == self.r_min and hi == self.r_max:
            r, shell = self._rule
        else:
            r, w = gauss_legendre(lo, hi, self.nodes, graded=lo == 0.0)
            shell = w * self.profile(r) * sphere_area(self.dim) * r ** (self.dim - 1)
        return float(np.sum(shell * func(r)))

    @property
    def total_mass(self):
        if self.r_min == 0.0:
            return math.inf if self._singular_at_origin() else self.integrate(np.ones_like)
        return self.integrate(np.ones_like)

    def _singular_at_origin(self):
        prof = self.profile
        return isinstance(prof, RadialProfile) and prof.kind == "power" and prof.p >= self.dim

    def mirrored(self):
        return self

    def to_json(self):
        if not isinstance(self.profile, RadialProfile):
            raise ValidationError("only named radial profiles can be serialised")
        return {"type": "radial", "profile": self.profile.to_json(),
                "r_min": self.r_min, "r_max": self.r_max, "nodes": self.nodes}


LevyMeasureComponent = Atoms | IsotropicStable | RadialDensity


def component_dim(comp):
    return comp.dim


# --------------------------------------------------------------------------
# triplet
# --------------------------------------------------------------------------

def _check_psd(q, n):
    q = np.array(q, dtype=float)
    if q.shape != (n, n):
        raise ValidationError(f"gaussian matrix must be {n}x{n}")
    if not np.all(np.isfinite(q)):
        raise ValidationError("gaussian matrix must be finite")
    if np.max(np.abs(q - q.T), initial=0.0) > SYM_TOL:
        raise ValidationError("gaussian matrix is not symmetric")
    q = 0.5 * (q + q.T)
    if n and np.linalg.eigvalsh(q).min() < -PSD_TOL:
        raise ValidationError("gaussian matrix is not positive semidefinite")
    return q


def psd_sqrt(q):
    """Symmetric PSD square root with eigenvalues below tolerance clamped to 0."""
    vals, vecs = np.linalg.eigh(q)
    vals = np.where(vals < PSD_TOL, 0.0, vals)
    return (vecs * np.sqrt(vals)) @ vecs.T


@dataclass(frozen=True, eq=False)
class LevyTriplet:
    """Drift, Gaussian covariance and jump measure of a Levy process."""

    drift: np.ndarray
    gaussian: np.ndarray
    jumps: tuple = ()

    def __post_init__(self):
        b = np.atleast_1d(np.asarray(self.drift, dtype=float))
        if b.ndim != 1 or b.size == 0:
            raise ValidationError("drift must be a nonempty vector")
        if not np.all(np.isfinite(b)):
            raise ValidationError("drift must be finite")
        n = b.size
        q = _check_psd(np.atleast_2d(self.gaussian) if np.ndim(self.gaussian) else
                       np.full((n, n), float(self.gaussian)), n)
        jumps = tuple(self.jumps)
        for comp in jumps:
            if not isinstance(comp, (Atoms, IsotropicStable, RadialDensity)):
                raise ValidationError(f"unsupported jump component {type(comp).__name__}")
            if comp.dim != n:
                raise ValidationError("all jump components must share the triplet dimension")
        object.__setattr__(self, "drift", _frozen(b))
        object.__setattr__(self, "gaussian", _frozen(q))
        object.__setattr__(self, "jumps", jumps)

    @property
    def dim(self):
        return self.drift.size

    # convenience constructors -------------------------------------------------

    @classmethod
    def brownian(cls, dim=1, drift=None, variance=1.0):
        b = np.zeros(dim) if drift is None else drift
        return cls(b, variance * np.eye(dim))

    @classmethod
    def poisson(cls, locations, masses=None, drift=None):
        locs = np.asarray(locations, dtype=float)
        if locs.ndim <= 1:
            locs = locs.reshape(-1, 1)
        n = locs.shape[1]
        masses = np.ones(locs.shape[0]) if masses is None else masses
        b = np.zeros(n) if drift is None else drift
        return cls(b, np.zeros((n, n)), (Atoms(locs, masses),))

    # transforms ---------------------------------------------------------------

    def mirrored(self):
        """Triplet of ``-X``: drift negated, jump measure reflected."""
        return LevyTriplet(-self.drift, self.gaussian, tuple(c.mirrored() for c in self.jumps))

    def transformed(self, a):
        """Triplet of ``A X`` so that its exponent is ``psi(A^T xi)``.

        Atoms move exactly (with the compensator correction to the drift);
        isotropic components are only carried through orthogonal ``A``.
        """
        a = np.atleast_2d(np.asarray(a, dtype=float))
        n = self.dim
        if a.shape != (n, n) or abs(np.linalg.det(a)) < 1e-14:
            raise ValidationError("coordinate change must be an invertible n x n matrix")
        orthogonal = np.allclose(a @ a.T, np.eye(n), atol=1e-12)
        drift = a @ self.drift
        jumps = []
        for comp in self.jumps:
            if isinstance(comp, Atoms):
                new = comp.locations @ a.T
                old_small = comp.norms < 1.0
                new_small = np.linalg.norm(new, axis=1) < 1.0
                corr = (new_small.astype(float) - old_small.astype(float)) * comp.masses
                drift = drift + corr @ new
                jumps.append(Atoms(new, comp.masses))
            elif orthogonal:
                jumps.append(comp)
            else:
                raise ValidationError("isotropic components only transform under orthogonal maps")
        return LevyTriplet(drift, a @ self.gaussian @ a.T, tuple(jumps))

    # serialisation --------------------------------------------------------------

    def to_json(self):
        return {
            "dim": self.dim,
            "drift": self.drift.tolist(),
            "gaussian": self.gaussian.tolist(),
            "jumps": [c.to_json() for c in self.jumps],
        }

    def dumps(self):
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, data):
        validate_config_schema(data, triplet_only=True)
        return triplet_from_dict(data)


# --------------------------------------------------------------------------
# JSON schema
# --------------------------------------------------------------------------

_VEC = {"type": "array", "items": {"type": "number"}, "minItems": 1}

TRIPLET_PROPERTIES = {
    "dim": {"type": "integer", "minimum": 1},
    "drift": _VEC,
    "gaussian": {"type": "array", "items": _VEC},
    "jumps": {
        "type": "array",
        "items": {
            "oneOf": [
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "atoms"},
                        "atoms": {
                            "type": "array", "minItems": 1,
                            "items": {
                                "type": "object",
                                "properties": {"location": _VEC, "mass": {"type": "number"}},
                                "required": ["location", "mass"],
                                "additionalProperties": False,
                            },
                        },
                    },
                    "required": ["type", "atoms"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "stable"},
                        "alpha": {"type": "number"},
                        "scale": {"type": "number"},
                    },
                    "required": ["type", "alpha"],
                    "additionalProperties": False,
                },
                {
                    "type": "object",
                    "properties": {
                        "type": {"const": "radial"},
                        "profile": {
                            "type": "object",
                            "properties": {
                                "kind": {"enum": ["power", "exp", "const"]},
                                "c": {"type": "number"},
                                "p": {"type": "number"},
                                "rate": {"type": "number"},
                            },
                            "required": ["kind"],
                            "additionalProperties": False,
                        },
                        "r_min": {"type": "number"},
                        "r_max": {"type": "number"},
                        "nodes": {"type": "integer"},
                    },
                    "required": ["type", "profile", "r_min", "r_max"],
                    "additionalProperties": False,
                },
            ]
        },
    },
}

BERNSTEIN_SCHEMA = {
    "type": "object",
    "properties": {
        "name": {"enum": ["power", "log1p", "resolvent", "semigroup"]},
        "alpha": {"type": "number"},
        "tau": {"type": "number"},
        "t": {"type": "number"},
    },
    "required": ["name"],
    "additionalProperties": False,
}


def config_schema(triplet_only=False):
    props = dict(TRIPLET_PROPERTIES, name={"type": "string"})
    if not triplet_only:
        props["bernstein"] = BERNSTEIN_SCHEMA
    return {
        "type": "object",
        "properties": props,
        "required": ["dim", "drift"],
        "additionalProperties": False,
    }


class SchemaError(ValidationError):
    """Config does not match the schema; ``pointers`` lists offending JSON pointers."""

    def __init__(self, pointers, messages):
        self.pointers = pointers
        self.messages = messages
        detail = "; ".join(f"{p or '/'}: {m}" for p, m in zip(pointers, messages))
        super().__init__(f"schema error: {detail}")


def _pointer(path):
    return "".join(f"/{p}" for p in path)


def _branch_error(err):
    """For a oneOf failure, the first error inside the branch whose ``type`` matched."""
    if err.validator != "oneOf" or not err.context:
        return err
    bad = {e.schema_path[0] for e in err.context
           if e.validator == "const" and list(e.relative_path) == ["type"]}
    inside = [e for e in err.context if e.schema_path[0] not in bad]
    return _branch_error(inside[0]) if inside else err


def validate_config_schema(data, triplet_only=False):
    import jsonschema

    validator = jsonschema.Draft202012Validator(config_schema(triplet_only))
    errors = sorted(validator.iter_errors(data), key=lambda e: list(map(str, e.absolute_path)))
    if errors:
        pointers, messages = [], []
        for err in errors:
            best = _branch_error(err)
            pointers.append(_pointer(best.absolute_path))
            messages.append(best.message)
        raise SchemaError(pointers, messages)


def triplet_from_dict(data):
    n = int(data["dim"])
    drift = np.asarray(data["drift"], dtype=float)
    if drift.shape != (n,):
        raise SchemaError(["/drift"], [f"expected {n} entries"])
    gauss = data.get("gaussian")
    gauss = np.zeros((n, n)) if gauss is None else np.asarray(gauss, dtype=float)
    if gauss.shape != (n, n):
        raise SchemaError(["/gaussian"], [f"expected a {n}x{n} matrix"])
    jumps = []
    for i, item in enumerate(data.get("jumps", [])):
        kind = item["type"]
        if kind == "atoms":
            locs = [a["location"] for a in item["atoms"]]
            if any(len(loc) != n for loc in locs):
                raise SchemaError([f"/jumps/{i}/atoms"], [f"atom locations must have {n} entries"])
            jumps.append(Atoms(np.asarray(locs, dtype=float), [a["mass"] for a in item["atoms"]]))
        elif kind == "stable":
            jumps.append(IsotropicStable(float(item["alpha"]), float(item.get("scale", 1.0)), n))
        else:
            prof = item["profile"]
            profile = RadialProfile(prof["kind"], float(prof.get("c", 1.0)),
                                    float(prof.get("p", 0.0)), float(prof.get("rate", 1.0)))
            jumps.append(RadialDensity(profile, float(item["r_min"]), float(item["r_max"]), n,
                                       int(item.get("nodes", 512))))
    return LevyTriplet(drift, gauss, tuple(jumps))


def load_triplet(path):
    with open(path) as fh:
        return LevyTriplet.from_json(json.load(fh))


# --------------------------------------------------------------------------
# growth bounds
# --------------------------------------------------------------------------

@dataclass(frozen=True)
class ConstantBound:
    c: float

    def __post_init__(self):
        if not self.c > 0:
            raise ValidationError("constant growth bound needs c > 0")

    @property
    def submult_constant(self):
        return 1.0 / self.c

    def radial(self, r):
        return np.full_like(np.asarray(r, dtype=float), self.c)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        return self.radial(np.linalg.norm(np.atleast_1d(y), axis=-1))

    def to_flag(self):
        return f"const:{self.c:g}"


@dataclass(frozen=True)
class PowerBound:
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 0:
            raise ValidationError("power growth bound needs an integer k >= 0")

    submult_constant = 1.0

    def radial(self, r):
        return (1.0 + np.asarray(r, dtype=float)) ** self.k

    def __call__(self, y):
        return self.radial(np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float)), axis=-1))

    def to_flag(self):
        return f"pow:{int(self.k)}"


@dataclass(frozen=True)
class ExponentialBound:
    beta: float

    def __post_init__(self):
        if not self.beta >= 0:
            raise ValidationError("exponential growth bound needs beta >= 0")

    submult_constant = 1.0

    def radial(self, r):
        return np.exp(self.beta * np.asarray(r, dtype=float))

    def __call__(self, y):
        return self.radial(np.linalg.norm(np.atleast_1d(np.asarray(y, dtype=float)), axis=-1))

    def to_flag(self):
        return f"exp:{self.beta:g}"


GrowthBound = ConstantBound | PowerBound | ExponentialBound


def parse_growth(text):
    """Parse ``const:c``, ``pow:k`` or ``exp:b``."""
    try:
        kind, value = text.split(":", 1)
        if kind == "const":
            return ConstantBound(float(value))
        if kind == "pow":
            return PowerBound(int(value))
        if kind == "exp":
            return ExponentialBound(float(value))
    except ValueError as exc:
        raise ValidationError(f"bad growth bound {text!r}: {exc}") from None
    raise ValidationError(f"bad growth bound {text!r}: expected const:c, pow:k or exp:b")


# --------------------------------------------------------------------------
# integrals against the jump measure
# --------------------------------------------------------------------------

def _stable_tail(comp, radial_g):
    """``scale * |S| * int_1^inf g(r) r**(-1-alpha) dr`` for a finite integrand."""
    val, _ = integrate.quad(lambda r: float(radial_g(r)) * r ** (-1.0 - comp.alpha), 1.0, np.inf,
                            limit=200)
    return comp.scale * sphere_area(comp.dim) * val


def component_moment(comp, g):
    """``int_{|y|>=1} g(y) comp(dy)``; ``inf`` when it diverges."""
    if isinstance(comp, Atoms):
        big = comp.norms >= 1.0
        return float(np.sum(comp.masses[big] * g.radial(comp.norms[big])))
    if isinstance(comp, RadialDensity):
        return comp.integrate(g.radial, lo=1.0)
    # stable tail ~ r**(-1-alpha)
    if isinstance(g, ExponentialBound) and g.beta > 0:
        return math.inf
    if isinstance(g, PowerBound) and g.k >= comp.alpha:
        return math.inf
    return _stable_tail(comp, g.radial)


def levy_moment(nu, g):
    """Generalised moment ``int_{|y|>=1} g(y) nu(dy)`` summed over components."""
    total = 0.0
    for comp in nu:
        total += component_moment(comp, g)
    return total


def small_ball_second_moment(nu):
    """``int_{0<|y|<1} |y|^2 nu(dy)``."""
    if isinstance(nu, LevyTriplet):
        nu = nu.jumps
    total = 0.0
    for comp in nu:
        if isinstance(comp, Atoms):
            small = comp.norms < 1.0
            total += float(np.sum(comp.masses[small] * comp.norms[small] ** 2))
        elif isinstance(comp, IsotropicStable):
            total += comp.scale * sphere_area(comp.dim) / (2.0 - comp.alpha)
        else:
            total += comp.integrate(lambda r: r * r, hi=1.0)
    return total


def truncated_second_moment(comp):
    """``int min(|x|^2, 1) comp(dx)`` by the component's exact or closed-form route."""
    if isinstance(comp, Atoms):
        return float(np.sum(comp.masses * np.minimum(comp.norms ** 2, 1.0)))
    if isinstance(comp, IsotropicStable):
        a = comp.alpha
        return comp.scale * sphere_area(comp.dim) * (1.0 / (2.0 - a) + 1.0 / a)
    return comp.integrate(lambda r: np.minimum(r * r, 1.0))


def directional_exponential_moment(nu, eta):
    """``int_{|y|>=1} exp(eta.y) nu(dy)``; ``inf`` when it diverges."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    e = float(np.linalg.norm(eta))
    total = 0.0
    for comp in nu:
        if isinstance(comp, Atoms):
            big = comp.norms >= 1.0
            with np.errstate(over="ignore"):
                total += float(np.sum(comp.masses[big] * np.exp(comp.locations[big] @ eta)))
        elif isinstance(comp, RadialDensity):
            n = comp.dim
            with np.errstate(over="ignore"):
                total += comp.integrate(
                    lambda r: np.real(spherical_cos_mean(-1j * e * r, n)), lo=1.0)
        else:
            if e > 0:
                return math.inf
            total += comp.scale * sphere_area(comp.dim) / comp.alpha
    return total


def exponential_moment_finite(nu, eta):
    """Structural finiteness of the directional exponential moment.

    Atoms and shells have bounded support; the stable tail is never
    exponentially integrable in a nonzero direction.
    """
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    if not np.any(eta):
        return True
    return not any(isinstance(c, IsotropicStable) for c in nu)


def big_jump_mass(nu):
    """``nu(|y| >= 1)``."""
    total = 0.0
    for comp in nu:
        if isinstance(comp, Atoms):
            total += float(np.sum(comp.masses[comp.norms >= 1.0]))
        elif isinstance(comp, IsotropicStable):
            total += comp.scale * sphere_area(comp.dim) / comp.alpha
        else:
            total += comp.integrate(np.ones_like, lo=1.0)
    return total


# --------------------------------------------------------------------------
# validation report
# --------------------------------------------------------------------------

@dataclass
class ValidationReport:
    ok: bool
    dim: int
    truncated_moments: list
    psd: bool
    min_eigenvalue: float
    messages: list

    def to_json(self):
        return {
            "ok": self.ok,
            "dim": self.dim,
            "truncated_moments": self.truncated_moments,
            "psd": self.psd,
            "min_eigenvalue": self.min_eigenvalue,
            "messages": self.messages,
        }


def validate_triplet(t: LevyTriplet) -> ValidationReport:
    """Check the Levy-Khintchine conditions on ``(b, Q, nu)``.

    Structural problems (alpha out of range, nonpositive masses, atoms at
    the origin, an asymmetric Q) are rejected when the components are built;
    this report re-derives the quantitative conditions.
    """
    messages = []
    q = np.asarray(t.gaussian)
    asym = float(np.max(np.abs(q - q.T), initial=0.0))
    if asym > SYM_TOL:
        raise ValidationError("gaussian matrix is not symmetric")
    min_eig = float(np.linalg.eigvalsh(q).min())
    psd = min_eig >= -PSD_TOL
    if not psd:
        messages.append(f"gaussian matrix has eigenvalue {min_eig:.3e}")
    moments = []
    for i, comp in enumerate(t.jumps):
        val = truncated_second_moment(comp)
        moments.append(val)
        if not math.isfinite(val):
            messages.append(f"component {i}: int min(|x|^2,1) dnu diverges")
    ok = psd and all(math.isfinite(v) for v in moments)
    return ValidationReport(ok, t.dim, moments, psd, min_eig, messages)


def as_components(nu: Sequence | LevyTriplet):
    if isinstance(nu, LevyTriplet):
        return nu.jumps
    return tuple(nu)
