"""Hot numeric kernels with a numba path and a pure-numpy fallback.

Two kernels dominate runtime: summing the atomic part of the exponent over
large frequency grids, and drawing terminal values of Levy paths for Monte
Carlo. Both exist twice below; ``_backend.BACKEND`` picks which pair the
public wrappers dispatch to.

Random numbers are counter based. The uniform for (path, stream, k) is a
keyed hash of the three integers, so a path's draws never depend on which
worker produced it or on how many paths came before it.
"""

import math

import numpy as np

from . import _backend

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
STREAM_MUL = 0xD1B54A32D192ED03
SEED_SALT = 0x243F6A8885A308D3

# stream ids; radial/stable components get blocks of 4
STREAM_GAUSS = 0
STREAM_ATOM0 = 1
STREAM_RADIAL0 = 100_000
STREAM_STABLE0 = 200_000

POISSON_CHUNK = 16.0


def mix64_int(z):
    """SplitMix64 finaliser on a python int (used for key setup)."""
    z &= MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def seed_key(seed):
    if not 0 <= int(seed) <= MASK64:
        raise ValueError("seed must be an unsigned 64-bit integer")
    return mix64_int(int(seed) ^ SEED_SALT)


def poisson_chunks(mean):
    if mean <= 0.0:
        return 0, 0.0
    n = int(math.ceil(mean / POISSON_CHUNK))
    return n, mean / n


# --------------------------------------------------------------------------
# numpy implementations
# --------------------------------------------------------------------------

_U11 = np.uint64(11)
_U27 = np.uint64(27)
_U30 = np.uint64(30)
_U31 = np.uint64(31)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_INV53 = 1.0 / 9007199254740992.0


def _np_mix64(z):
    z = (z ^ (z >> _U30)) * _M1
    z = (z ^ (z >> _U27)) * _M2
    return z ^ (z >> _U31)


def _np_path_keys(base_key, start, count):
    idx = np.arange(start, start + count, dtype=np.uint64)
    return _np_mix64(np.uint64(base_key) ^ idx)


def _np_stream_keys(path_keys, stream):
    return _np_mix64(path_keys + np.uint64((stream * STREAM_MUL) & MASK64))


def _np_uniform(stream_keys, k):
    z = _np_mix64(stream_keys + np.uint64(((k + 1) * GOLDEN) & MASK64))
    return ((z >> _U11).astype(np.float64) + 0.5) * _INV53


def _np_normal(stream_keys, j):
    u1 = _np_uniform(stream_keys, 2 * j)
    u2 = _np_uniform(stream_keys, 2 * j + 1)
    return np.sqrt(-2.0 * np.log(u1)) * np.cos(2.0 * np.pi * u2)


def _np_poisson(stream_keys, mean):
    nchunk, m = poisson_chunks(mean)
    total = np.zeros(stream_keys.shape[0], dtype=np.int64)
    if nchunk == 0:
        return total
    p0 = math.exp(-m)
    for c in range(nchunk):
        u = _np_uniform(stream_keys, c)
        x = np.zeros_like(total)
        p = np.full(u.shape, p0)
        s = p.copy()
        active = u > s
        while active.any():
            x[active] += 1
            p[active] *= m / x[active]
            s[active] += p[active]
            active &= (u > s) & (p > 0.0)
        total += x
    return total


def _np_sample(base_key, start, count, drift_t, sigma_t, atom_locs, atom_means,
               radial_means, radial_r, radial_cdf, stable_alpha, stable_factor,
               stable_iso):
    n = drift_t.shape[0]
    out = np.tile(drift_t, (count, 1))
    keys = _np_path_keys(base_key, start, count)

    if np.any(sigma_t != 0.0):
        sk = _np_stream_keys(keys, STREAM_GAUSS)
        z = np.empty((count, n))
        for j in range(n):
            z[:, j] = _np_normal(sk, j)
        out += z @ sigma_t.T

    for a in range(atom_locs.shape[0]):
        sk = _np_stream_keys(keys, STREAM_ATOM0 + a)
        cnt = _np_poisson(sk, atom_means[a])
        out += cnt[:, None].astype(np.float64) * atom_locs[a][None, :]

    for r in range(radial_means.shape[0]):
        base = STREAM_RADIAL0 + 4 * r
        cnt = _np_poisson(_np_stream_keys(keys, base), radial_means[r])
        k_rad = _np_stream_keys(keys, base + 1)
        k_dir = _np_stream_keys(keys, base + 2)
        top = int(cnt.max()) if count else 0
        for i in range(top):
            live = cnt > i
            u = _np_uniform(k_rad, i)
            rad = np.interp(u, radial_cdf[r], radial_r[r])
            if n == 1:
                sign = np.where(_np_uniform(k_dir, i) < 0.5, -1.0, 1.0)
                step = (rad * sign)[:, None]
            else:
                g = np.empty((count, n))
                for j in range(n):
                    g[:, j] = _np_normal(k_dir, i * n + j)
                step = rad[:, None] * g / np.sqrt((g * g).sum(axis=1))[:, None]
            out += np.where(live[:, None], step, 0.0)

    for s in range(stable_alpha.shape[0]):
        alpha = stable_alpha[s]
        sk = _np_stream_keys(keys, STREAM_STABLE0 + 4 * s)
        u1 = _np_uniform(sk, 0)
        u2 = _np_uniform(sk, 1)
        if stable_iso[s]:
            a = 0.5 * alpha
            ang = np.pi * u1
            e = -np.log(u2)
            sub = (np.sin(a * ang) / np.sin(ang) ** (1.0 / a)
                   * (np.sin((1.0 - a) * ang) / e) ** ((1.0 - a) / a))
            gk = _np_stream_keys(keys, STREAM_STABLE0 + 4 * s + 1)
            g = np.empty((count, n))
            for j in range(n):
                g[:, j] = _np_normal(gk, j)
            out += stable_factor[s] * np.sqrt(2.0 * sub)[:, None] * g
        else:
            v = np.pi * (u1 - 0.5)
            w = -np.log(u2)
            x = (np.sin(alpha * v) / np.cos(v) ** (1.0 / alpha)
                 * (np.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
            out[:, 0] += stable_factor[s] * x
    return out


def _np_atom_exponent(xi, locs, masses, compensated):
    phase = xi @ locs.T
    val = (1.0 - np.cos(phase)) @ masses - 1j * (np.sin(phase) @ masses)
    if compensated.any():
        val = val + 1j * (phase[:, compensated] @ masses[compensated])
    return val


# --------------------------------------------------------------------------
# numba implementations
# --------------------------------------------------------------------------

if _backend.USE_NUMBA:
    from numba import njit

    @njit(cache=True, inline="always")
    def _nb_mix64(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    @njit(cache=True, inline="always")
    def _nb_stream(path_key, stream):
        return _nb_mix64(path_key + np.uint64(stream) * np.uint64(STREAM_MUL))

    @njit(cache=True, inline="always")
    def _nb_uniform(stream_key, k):
        z = _nb_mix64(stream_key + np.uint64(k + 1) * np.uint64(GOLDEN))
        return (np.float64(z >> np.uint64(11)) + 0.5) * _INV53

    @njit(cache=True)
    def _nb_normal(stream_key, j):
        u1 = _nb_uniform(stream_key, 2 * j)
        u2 = _nb_uniform(stream_key, 2 * j + 1)
        return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)

    @njit(cache=True)
    def _nb_poisson(stream_key, mean):
        if mean <= 0.0:
            return 0
        nchunk = int(math.ceil(mean / POISSON_CHUNK))
        m = mean / nchunk
        p0 = math.exp(-m)
        total = 0
        for c in range(nchunk):
            u = _nb_uniform(stream_key, c)
            x = 0
            p = p0
            s = p
            while u > s and p > 0.0:
                x += 1
                p *= m / x
                s += p
            total += x
        return total

    @njit(cache=True)
    def _nb_interp(u, cdf, r):
        lo = 0
        hi = cdf.shape[0] - 1
        if u <= cdf[0]:
            return r[0]
        if u >= cdf[hi]:
            return r[hi]
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if cdf[mid] <= u:
                lo = mid
            else:
                hi = mid
        span = cdf[hi] - cdf[lo]
        if span <= 0.0:
            return r[lo]
        return r[lo] + (u - cdf[lo]) * (r[hi] - r[lo]) / span

    @njit(cache=True, nogil=True)
    def _nb_sample(base_key, start, count, drift_t, sigma_t, atom_locs, atom_means,
                   radial_means, radial_r, radial_cdf, stable_alpha, stable_factor,
                   stable_iso):
        n = drift_t.shape[0]
        out = np.empty((count, n))
        z = np.empty(n)
        g = np.empty(n)
        has_gauss = False
        for i in range(n):
            for j in range(n):
                if sigma_t[i, j] != 0.0:
                    has_gauss = True
        base = np.uint64(base_key)
        for p in range(count):
            key = _nb_mix64(base ^ np.uint64(start + p))
            for i in range(n):
                out[p, i] = drift_t[i]
            if has_gauss:
                sk = _nb_stream(key, STREAM_GAUSS)
                for j in range(n):
                    z[j] = _nb_normal(sk, j)
                for i in range(n):
                    acc = 0.0
                    for j in range(n):
                        acc += z[j] * sigma_t[i, j]
                    out[p, i] += acc
            for a in range(atom_locs.shape[0]):
                cnt = _nb_poisson(_nb_stream(key, STREAM_ATOM0 + a), atom_means[a])
                if cnt > 0:
                    for i in range(n):
                        out[p, i] += cnt * atom_locs[a, i]
            for r in range(radial_means.shape[0]):
                sb = STREAM_RADIAL0 + 4 * r
                cnt = _nb_poisson(_nb_stream(key, sb), radial_means[r])
                k_rad = _nb_stream(key, sb + 1)
                k_dir = _nb_stream(key, sb + 2)
                for jump in range(cnt):
                    rad = _nb_interp(_nb_uniform(k_rad, jump), radial_cdf[r], radial_r[r])
                    if n == 1:
                        if _nb_uniform(k_dir, jump) < 0.5:
                            out[p, 0] -= rad
                        else:
                            out[p, 0] += rad
                    else:
                        nrm = 0.0
                        for j in range(n):
                            g[j] = _nb_normal(k_dir, jump * n + j)
                            nrm += g[j] * g[j]
                        nrm = math.sqrt(nrm)
                        for j in range(n):
                            out[p, j] += rad * g[j] / nrm
            for s in range(stable_alpha.shape[0]):
                alpha = stable_alpha[s]
                sk = _nb_stream(key, STREAM_STABLE0 + 4 * s)
                u1 = _nb_uniform(sk, 0)
                u2 = _nb_uniform(sk, 1)
                if stable_iso[s]:
                    a = 0.5 * alpha
                    ang = math.pi * u1
                    e = -math.log(u2)
                    sub = (math.sin(a * ang) / math.sin(ang) ** (1.0 / a)
                           * (math.sin((1.0 - a) * ang) / e) ** ((1.0 - a) / a))
                    gk = _nb_stream(key, STREAM_STABLE0 + 4 * s + 1)
                    amp = stable_factor[s] * math.sqrt(2.0 * sub)
                    for j in range(n):
                        out[p, j] += amp * _nb_normal(gk, j)
                else:
                    v = math.pi * (u1 - 0.5)
                    w = -math.log(u2)
                    x = (math.sin(alpha * v) / math.cos(v) ** (1.0 / alpha)
                         * (math.cos((1.0 - alpha) * v) / w) ** ((1.0 - alpha) / alpha))
                    out[p, 0] += stable_factor[s] * x
        return out

    @njit(cache=True, nogil=True)
    def _nb_atom_exponent(xi, locs, masses, compensated):
        m = xi.shape[0]
        n = xi.shape[1]
        out = np.empty(m, dtype=np.complex128)
        for i in range(m):
            re = 0.0
            im = 0.0
            for a in range(locs.shape[0]):
                ph = 0.0
                for j in range(n):
                    ph += xi[i, j] * locs[a, j]
                re += masses[a] * (1.0 - math.cos(ph))
                im -= masses[a] * math.sin(ph)
                if compensated[a]:
                    im += masses[a] * ph
            out[i] = complex(re, im)
        return out


# --------------------------------------------------------------------------
# public wrappers
# --------------------------------------------------------------------------

def _use_numba(backend):
    if (backend or _backend.BACKEND) != "numba":
        return False
    if not _backend.USE_NUMBA:
        raise RuntimeError(f"numba kernels are not compiled; unset {_backend.ENV_FLAG}=numpy")
    return True


def atom_exponent(xi, locations, masses, compensated, backend=None):
    """Atomic part of the exponent at real frequencies ``xi`` of shape (m, n)."""
    xi = np.ascontiguousarray(xi, dtype=np.float64)
    locations = np.ascontiguousarray(locations, dtype=np.float64)
    masses = np.ascontiguousarray(masses, dtype=np.float64)
    compensated = np.ascontiguousarray(compensated, dtype=np.bool_)
    if locations.shape[0] == 0:
        return np.zeros(xi.shape[0], dtype=np.complex128)
    if _use_numba(backend):
        return _nb_atom_exponent(xi, locations, masses, compensated)
    return _np_atom_exponent(xi, locations, masses, compensated)


def sample_increments(plan, base_key, start, count, backend=None):
    """Terminal values X_t for paths ``start .. start+count-1`` of a sampling plan."""
    args = (
        np.uint64(base_key), int(start), int(count),
        plan.drift_t, plan.sigma_t, plan.atom_locs, plan.atom_means,
        plan.radial_means, plan.radial_r, plan.radial_cdf,
        plan.stable_alpha, plan.stable_factor, plan.stable_iso,
    )
    if _use_numba(backend):
        return _nb_sample(*args)
    return _np_sample(*args)
