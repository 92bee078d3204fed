"""One-dimensional densities and relative functionals against the Gaussian.

The reference measure throughout is the standard Gaussian gamma with density
phi(x) = exp(-x^2/2)/sqrt(2 pi). A "relative function" f is a nonnegative
function integrated against gamma; when f is normalized, f*phi is a
probability density and the pair carries both views.

Densities come in three concrete flavors:

* ``StandardGaussian``: gamma itself, with exact cdf/quantile.
* ``GaussianMixture1D``: finite Gaussian mixtures; cdf analytic, quantile by
  safeguarded Newton seeded from a cached monotone cdf grid, far tails solved
  on the log-cdf for relative accuracy (upper tail via the mirrored mixture).
* ``GridDensity1D``: strictly positive tabulated densities, log-linear
  between nodes with matched Gaussian tails; cdf and quantile are closed-form
  per panel, so no iteration is ever needed.

Regularity beyond positivity (continuity, C^1 relative functions,
normalization) is the caller's responsibility; constructors validate only
what can be checked cheaply.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from scipy.special import log_ndtr, ndtr, ndtri

from .errors import (CapabilityError, DomainError, EvaluationError, ParseError,
                     UnderflowError)
from .quadrature import QuadResult, adaptive_quad

__all__ = [
    "SQRT_2PI",
    "WORKING_RADIUS",
    "gauss_pdf",
    "gauss_logpdf",
    "Density1D",
    "StandardGaussian",
    "GaussianMixture1D",
    "GridDensity1D",
    "RelFunction1D",
    "cdf",
    "quantile",
    "entropy_rel_gauss",
    "ent_gamma",
    "fisher_integral",
    "normalize",
    "load_grid_csv",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)
_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)

# Radius of the default working domain for gamma-weighted integrals; the
# standard Gaussian mass outside [-R, R] is ~1.5e-23, far below every
# tolerance used here. Integrals weighted by heavier measures extend the
# interval to that measure's own tails instead.
WORKING_RADIUS = 10.0

_TINY = 1e-300


def gauss_pdf(x):
    x = np.asarray(x, dtype=float)
    return np.exp(-0.5 * x * x) / SQRT_2PI


def gauss_logpdf(x):
    x = np.asarray(x, dtype=float)
    return -0.5 * x * x - _LOG_SQRT_2PI


def _check_prob_open(p):
    if np.any(~np.isfinite(p)) or np.any(p <= 0.0) or np.any(p >= 1.0):
        raise DomainError("probability arguments must lie strictly in (0, 1)")


class Density1D:
    """A strictly positive probability density on the line.

    All methods are vectorized over ndarray inputs.
    """

    def pdf(self, x):
        raise NotImplementedError

    def logpdf(self, x):
        return np.log(np.maximum(self.pdf(x), _TINY))

    def dpdf(self, x):
        """Derivative of the pdf (analytic where available)."""
        raise NotImplementedError

    def cdf(self, x):
        raise NotImplementedError

    def survival(self, x):
        return 1.0 - self.cdf(x)

    def quantile(self, p):
        raise NotImplementedError

    def quantile_sf(self, s):
        """Upper quantile from survival mass, accurate for small ``s``."""
        return self.quantile(1.0 - np.asarray(s, dtype=float))

    def sample(self, rng: np.random.Generator, size: int):
        return self.quantile(rng.uniform(size=size))

    def working_interval(self, tail_mass: float = 1e-14):
        """Interval carrying all but ``tail_mass`` of the probability."""
        raise NotImplementedError

    def mean(self) -> float:
        return _moment_quad(self, 1)

    def variance(self) -> float:
        m = self.mean()
        return _moment_quad(self, 2) - m * m


class StandardGaussian(Density1D):
    """The standard Gaussian measure gamma."""

    def pdf(self, x):
        return gauss_pdf(x)

    def logpdf(self, x):
        return gauss_logpdf(x)

    def dpdf(self, x):
        x = np.asarray(x, dtype=float)
        return -x * gauss_pdf(x)

    def cdf(self, x):
        return ndtr(np.asarray(x, dtype=float))

    def survival(self, x):
        return ndtr(-np.asarray(x, dtype=float))

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        _check_prob_open(p)
        return ndtri(p)

    def quantile_sf(self, s):
        s = np.asarray(s, dtype=float)
        _check_prob_open(s)
        return -ndtri(s)

    def sample(self, rng, size):
        return rng.standard_normal(size)

    def working_interval(self, tail_mass: float = 1e-14):
        z = float(-ndtri(tail_mass / 2.0))
        return (-z, z)

    def mean(self):
        return 0.0

    def variance(self):
        return 1.0

    def __repr__(self):
        return "StandardGaussian()"


class GaussianMixture1D(Density1D):
    """Finite Gaussian mixture sum_k w_k N(m_k, s_k^2).

    Weights must be positive and sum to 1 within 1e-12; standard deviations
    must be positive and finite.
    """

    __slots__ = ("weights", "means", "stds", "_grid", "_mirror_cache")

    def __init__(self, weights, means, stds):
        w = np.atleast_1d(np.asarray(weights, dtype=float)).copy()
        m = np.atleast_1d(np.asarray(means, dtype=float)).copy()
        s = np.atleast_1d(np.asarray(stds, dtype=float)).copy()
        if not (w.shape == m.shape == s.shape) or w.ndim != 1 or w.size == 0:
            raise DomainError("weights, means, stds must be equal-length 1-D sequences")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m)) and np.all(np.isfinite(s))):
            raise DomainError("mixture parameters must be finite")
        if np.any(w <= 0.0):
            raise DomainError("mixture weights must be positive")
        if abs(float(w.sum()) - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {float(w.sum())!r}, expected 1 within 1e-12")
        if np.any(s <= 0.0):
            raise DomainError("mixture stds must be positive")
        for arr in (w, m, s):
            arr.setflags(write=False)
        self.weights = w
        self.means = m
        self.stds = s
        self._grid = None
        self._mirror_cache = None

    # -- basic evaluations -------------------------------------------------

    def _z(self, x):
        x = np.asarray(x, dtype=float)
        return (x[..., None] - self.means) / self.stds

    def pdf(self, x):
        z = self._z(x)
        comp = np.exp(-0.5 * z * z) / (self.stds * SQRT_2PI)
        return comp @ self.weights

    def logpdf(self, x):
        z = self._z(x)
        logs = -0.5 * z * z - np.log(self.stds * SQRT_2PI) + np.log(self.weights)
        mx = logs.max(axis=-1, keepdims=True)
        return np.squeeze(mx, -1) + np.log(np.exp(logs - mx).sum(axis=-1))

    def dpdf(self, x):
        z = self._z(x)
        comp = np.exp(-0.5 * z * z) / (self.stds * SQRT_2PI)
        return (comp * (-z / self.stds)) @ self.weights

    def cdf(self, x):
        return ndtr(self._z(x)) @ self.weights

    def survival(self, x):
        return ndtr(-self._z(x)) @ self.weights

    def _log_cdf(self, x):
        logs = log_ndtr(self._z(x)) + np.log(self.weights)
        mx = logs.max(axis=-1, keepdims=True)
        return np.squeeze(mx, -1) + np.log(np.exp(logs - mx).sum(axis=-1))

    def mean(self):
        return float(self.weights @ self.means)

    def variance(self):
        m = self.mean()
        return float(self.weights @ (self.stds**2 + self.means**2) - m * m)

    def working_interval(self, tail_mass: float = 1e-14):
        z = float(-ndtri(tail_mass / 2.0))
        lo = float(np.min(self.means - z * self.stds))
        hi = float(np.max(self.means + z * self.stds))
        return (lo, hi)

    def sample(self, rng, size):
        idx = rng.choice(self.weights.size, size=size, p=self.weights / self.weights.sum())
        return self.means[idx] + self.stds[idx] * rng.standard_normal(size)

    def __repr__(self):
        return (f"GaussianMixture1D(weights={self.weights.tolist()}, "
                f"means={self.means.tolist()}, stds={self.stds.tolist()})")

    # -- quantiles -----------------------------------------------------------

    def _mirror(self) -> "GaussianMixture1D":
        if self._mirror_cache is None:
            self._mirror_cache = GaussianMixture1D(self.weights, -self.means, self.stds)
        return self._mirror_cache

    def _ensure_grid(self):
        if self._grid is None:
            lo, hi = self.working_interval(1e-15)
            xg = np.linspace(lo, hi, 1025)
            self._grid = (xg, self.cdf(xg))
        return self._grid

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        _check_prob_open(p)
        scalar = p.ndim == 0
        pf = np.atleast_1d(p).ravel()
        out = np.empty_like(pf)
        low = pf <= 0.5
        if low.any():
            out[low] = self._invert_cdf(pf[low])
        if (~low).any():
            out[~low] = -self._mirror()._invert_cdf(1.0 - pf[~low])
        return float(out[0]) if scalar else out.reshape(np.shape(p))

    def quantile_sf(self, s):
        s = np.asarray(s, dtype=float)
        _check_prob_open(s)
        scalar = s.ndim == 0
        sf = np.atleast_1d(s).ravel()
        out = np.empty_like(sf)
        low = sf <= 0.5
        if low.any():
            out[low] = -self._mirror()._invert_cdf(sf[low])
        if (~low).any():
            out[~low] = self._invert_cdf(1.0 - sf[~low])
        return float(out[0]) if scalar else out.reshape(np.shape(s))

    def _invert_cdf(self, t):
        """Solve cdf(x) = t elementwise for t in (0, 1/2].

        Brackets come from the cached cdf grid (or, below its range, from the
        per-component closed-form envelopes); Newton steps are clamped into
        the bracket, falling back to bisection whenever they leave it. Deep
        tail targets (t < 1e-8) iterate on log-cdf so the residual is
        controlled in relative terms.
        """
        t = np.asarray(t, dtype=float)
        xg, Fg = self._ensure_grid()
        j = np.searchsorted(Fg, t, side="right") - 1
        inside = j >= 0  # t <= 0.5 guarantees j < len-1
        lo = np.empty_like(t)
        hi = np.empty_like(t)
        x = np.empty_like(t)
        if inside.any():
            ji = j[inside]
            lo[inside] = xg[ji]
            hi[inside] = xg[np.minimum(ji + 1, xg.size - 1)]
            x[inside] = np.interp(t[inside], Fg, xg)
        below = ~inside
        if below.any():
            tb = t[below]
            q_all = ndtri(tb)
            cand_lo = np.min(self.means + np.outer(q_all, self.stds), axis=1)
            cand_hi = np.full(tb.shape, np.inf)
            for k in range(self.weights.size):
                arg = tb / self.weights[k]
                ok = arg < 1.0
                if ok.any():
                    ck = self.means[k] + self.stds[k] * ndtri(arg[ok])
                    cand_hi[ok] = np.minimum(cand_hi[ok], ck)
            lo[below] = cand_lo
            hi[below] = np.where(np.isfinite(cand_hi), cand_hi, xg[0])
            x[below] = np.minimum(hi[below], xg[0])

        log_t = np.log(t)
        use_log = t < 1e-8
        active = np.ones(t.shape, dtype=bool)
        for _ in range(130):
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            xa = x[idx]
            Fa = self.cdf(xa)
            fa = self.pdf(xa)
            ta = t[idx]
            resid = Fa - ta
            # cdf increasing: residual sign tells which side of the root
            lo[idx] = np.where(resid < 0.0, np.maximum(lo[idx], xa), lo[idx])
            hi[idx] = np.where(resid >= 0.0, np.minimum(hi[idx], xa), hi[idx])

            ula = use_log[idx]
            with np.errstate(divide="ignore", invalid="ignore"):
                step = resid / fa
            conv_resid = np.abs(resid)
            if ula.any():
                xl = xa[ula]
                logF = self._log_cdf(xl)
                lr = logF - log_t[idx][ula]
                with np.errstate(divide="ignore", invalid="ignore"):
                    lstep = lr * np.exp(logF - self.logpdf(xl))
                step[ula] = lstep
                conv_resid[ula] = np.abs(lr)

            x_new = xa - step
            la, ha = lo[idx], hi[idx]
            bad = ~np.isfinite(x_new) | (x_new < la) | (x_new > ha)
            x_new = np.where(bad, 0.5 * (la + ha), x_new)
            x[idx] = x_new

            tol = np.where(ula, 1e-13, 1e-15 + 1e-13 * ta)
            done = (conv_resid <= tol) | (ha - la <= 1e-14 * (1.0 + np.abs(x_new)))
            if done.any():
                active[idx[done]] = False
        if active.any():
            raise EvaluationError("mixture quantile inversion did not converge")
        return x


def _expm1_over(d):
    """expm1(d)/d with the d -> 0 limit."""
    d = np.asarray(d, dtype=float)
    small = np.abs(d) < 1e-12
    safe = np.where(small, 1.0, d)
    return np.where(small, 1.0 + 0.5 * d, np.expm1(safe) / safe)


def _ndtri_log(log_p):
    """Inverse standard normal cdf from log-probability, stable deep in the tail."""
    log_p = np.asarray(log_p, dtype=float)
    p = np.exp(log_p)
    out = np.empty_like(log_p)
    ok = p > 1e-280
    if ok.any():
        out[ok] = ndtri(np.clip(p[ok], _TINY, 1.0 - 1e-16))
    deep = ~ok
    if deep.any():
        t = np.sqrt(-2.0 * log_p[deep])
        xx = -t + (np.log(t) + _LOG_SQRT_2PI) / t
        for _ in range(4):
            f = log_ndtr(xx) - log_p[deep]
            xx = xx - f * np.exp(log_ndtr(xx) - gauss_logpdf(xx))
        out[deep] = xx
    return out


class GridDensity1D(Density1D):
    """Tabulated density, log-linear between nodes, Gaussian tails.

    Tail policy per side stores matched (mean, std, mass). The std comes from
    the one-sided curvature of log-density at the boundary (quadratic fit
    through the three outermost nodes, fallback 1.0 when the fit is not
    concave), the mean from matching the boundary log-slope, the amplitude
    from continuity. The density is normalized at construction and the
    constant divided out is recorded in ``norm_constant``; the interpolant is
    an exponential of a piecewise-linear function, hence positive everywhere.
    Panel masses, cdf and quantile are closed-form.
    """

    __slots__ = ("nodes", "values", "log_values", "_slopes", "_panel_mass",
                 "_cum", "tail_policy", "norm_constant")

    def __init__(self, nodes, values):
        x = np.asarray(nodes, dtype=float).ravel().copy()
        v = np.asarray(values, dtype=float).ravel().copy()
        if x.size != v.size or x.size < 2:
            raise DomainError("grid needs >= 2 nodes with one value each")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v))):
            raise DomainError("grid nodes/values must be finite")
        if np.any(np.diff(x) <= 0.0):
            raise DomainError("grid nodes must be strictly increasing")
        if np.any(v <= 0.0):
            raise DomainError("grid density values must be strictly positive")

        logv = np.log(v)
        h = np.diff(x)
        slopes = np.diff(logv) / h
        panel_mass = v[:-1] * h * _expm1_over(np.diff(logv))

        def tail_params(side: str):
            if side == "left":
                xs, ls = x[:3], logv[:3]
                x0, v0, edge_slope = float(x[0]), float(v[0]), float(slopes[0])
            else:
                xs, ls = x[-3:], logv[-3:]
                x0, v0, edge_slope = float(x[-1]), float(v[-1]), float(slopes[-1])
            std = 1.0
            if xs.size >= 3:
                c2 = float(np.polyfit(xs, ls, 2)[0])
                if c2 < -1e-12:
                    std = min(max(math.sqrt(-0.5 / c2), 0.05), 20.0)
            mean = x0 + edge_slope * std * std
            z0 = (x0 - mean) / std
            log_amp = math.log(v0) + 0.5 * z0 * z0
            tail_ln = float(log_ndtr(z0)) if side == "left" else float(log_ndtr(-z0))
            mass = math.exp(log_amp + math.log(std * SQRT_2PI) + tail_ln)
            return {"mean": mean, "std": std, "log_amp": log_amp, "mass": mass}

        left = tail_params("left")
        right = tail_params("right")
        total = left["mass"] + float(panel_mass.sum()) + right["mass"]
        if not (math.isfinite(total) and total > 0.0):
            raise UnderflowError("grid density mass is not a positive finite number")

        v = v / total
        logv = logv - math.log(total)
        panel_mass = panel_mass / total
        for side in (left, right):
            side["mass"] /= total
            side["log_amp"] -= math.log(total)

        self.nodes = x
        self.values = v
        self.log_values = logv
        self._slopes = slopes
        self._panel_mass = panel_mass
        self._cum = left["mass"] + np.concatenate([[0.0], np.cumsum(panel_mass)])
        self.tail_policy = {"left": left, "right": right}
        self.norm_constant = total
        for arr in (self.nodes, self.values, self.log_values, self._slopes,
                    self._panel_mass, self._cum):
            arr.setflags(write=False)

    def _locate(self, x):
        return np.searchsorted(self.nodes, x, side="right") - 1

    def logpdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._locate(x)
        out = np.empty_like(x, dtype=float)
        L, R = self.tail_policy["left"], self.tail_policy["right"]
        left = idx < 0
        right = idx >= self.nodes.size - 1
        mid = ~(left | right)
        if left.any():
            zl = (x[left] - L["mean"]) / L["std"]
            out[left] = L["log_amp"] - 0.5 * zl * zl
        if right.any():
            zr = (x[right] - R["mean"]) / R["std"]
            out[right] = R["log_amp"] - 0.5 * zr * zr
        if mid.any():
            jm = idx[mid]
            out[mid] = self.log_values[jm] + self._slopes[jm] * (x[mid] - self.nodes[jm])
        return out

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def dpdf(self, x):
        """Piecewise log-slope times pdf; jumps at the nodes."""
        x = np.asarray(x, dtype=float)
        idx = self._locate(x)
        dlog = np.empty_like(x, dtype=float)
        L, R = self.tail_policy["left"], self.tail_policy["right"]
        left = idx < 0
        right = idx >= self.nodes.size - 1
        mid = ~(left | right)
        if left.any():
            dlog[left] = -(x[left] - L["mean"]) / L["std"] ** 2
        if right.any():
            dlog[right] = -(x[right] - R["mean"]) / R["std"] ** 2
        if mid.any():
            dlog[mid] = self._slopes[idx[mid]]
        return self.pdf(x) * dlog

    def cdf(self, x):
        x = np.asarray(x, dtype=float)
        idx = self._locate(x)
        out = np.empty_like(x, dtype=float)
        L, R = self.tail_policy["left"], self.tail_policy["right"]
        left = idx < 0
        right = idx >= self.nodes.size - 1
        mid = ~(left | right)
        if left.any():
            zl = (x[left] - L["mean"]) / L["std"]
            z0 = (self.nodes[0] - L["mean"]) / L["std"]
            out[left] = L["mass"] * np.exp(log_ndtr(zl) - log_ndtr(z0))
        if right.any():
            zr = (x[right] - R["mean"]) / R["std"]
            z0 = (self.nodes[-1] - R["mean"]) / R["std"]
            out[right] = 1.0 - R["mass"] * np.exp(log_ndtr(-zr) - log_ndtr(-z0))
        if mid.any():
            jm = idx[mid]
            dx = x[mid] - self.nodes[jm]
            out[mid] = self._cum[jm] + self.values[jm] * dx * _expm1_over(self._slopes[jm] * dx)
        return out

    def survival(self, x):
        x = np.asarray(x, dtype=float)
        idx = np.atleast_1d(self._locate(x))
        xf = np.atleast_1d(x)
        out = np.empty_like(xf, dtype=float)
        R = self.tail_policy["right"]
        right = idx >= self.nodes.size - 1
        if right.any():
            zr = (xf[right] - R["mean"]) / R["std"]
            z0 = (self.nodes[-1] - R["mean"]) / R["std"]
            out[right] = R["mass"] * np.exp(log_ndtr(-zr) - log_ndtr(-z0))
        rest = ~right
        if rest.any():
            out[rest] = 1.0 - self.cdf(xf[rest])
        return out.reshape(np.shape(x)) if np.ndim(x) else float(out[0])

    def quantile(self, p):
        p = np.asarray(p, dtype=float)
        _check_prob_open(p)
        scalar = p.ndim == 0
        pf = np.atleast_1d(p).ravel()
        out = np.empty_like(pf)
        L = self.tail_policy["left"]
        j = np.searchsorted(self._cum, pf, side="right") - 1
        left = j < 0
        right = pf > self._cum[-1]
        mid = ~(left | right)
        if left.any():
            z0 = (self.nodes[0] - L["mean"]) / L["std"]
            target = np.log(pf[left]) - math.log(L["mass"]) + float(log_ndtr(z0))
            out[left] = L["mean"] + L["std"] * _ndtri_log(target)
        if right.any():
            out[right] = self._tail_quantile_sf(np.maximum(1.0 - pf[right], _TINY))
        if mid.any():
            jm = np.clip(j[mid], 0, self.nodes.size - 2)
            b = self._slopes[jm]
            res = pf[mid] - self._cum[jm]
            vj = self.values[jm]
            small = np.abs(b) < 1e-12
            safe_b = np.where(small, 1.0, b)
            dx = np.where(small, res / vj, np.log1p(safe_b * res / vj) / safe_b)
            out[mid] = self.nodes[jm] + dx
        return float(out[0]) if scalar else out.reshape(np.shape(p))

    def _tail_quantile_sf(self, s):
        R = self.tail_policy["right"]
        z0 = (self.nodes[-1] - R["mean"]) / R["std"]
        target = np.log(s) - math.log(R["mass"]) + float(log_ndtr(-z0))
        return R["mean"] - R["std"] * _ndtri_log(target)

    def quantile_sf(self, s):
        s = np.asarray(s, dtype=float)
        _check_prob_open(s)
        scalar = s.ndim == 0
        sf = np.atleast_1d(s).ravel()
        out = np.empty_like(sf)
        tail = sf <= self.tail_policy["right"]["mass"]
        if tail.any():
            out[tail] = self._tail_quantile_sf(sf[tail])
        if (~tail).any():
            out[~tail] = self.quantile(1.0 - sf[~tail])
        return float(out[0]) if scalar else out.reshape(np.shape(s))

    def working_interval(self, tail_mass: float = 1e-14):
        lo = float(self.quantile(np.asarray(tail_mass / 2.0)))
        hi = float(self.quantile_sf(np.asarray(tail_mass / 2.0)))
        return (min(lo, float(self.nodes[0])), max(hi, float(self.nodes[-1])))


def _moment_quad(d: Density1D, k: int) -> float:
    lo, hi = d.working_interval(1e-15)
    res = adaptive_quad(lambda x: (x**k) * d.pdf(x), np.linspace(lo, hi, 9),
                        tol_abs=1e-11)
    return res.value


class RelFunction1D:
    """A nonnegative function paired with its derivative and gamma-mass.

    ``measure`` optionally carries the probability density f*phi when f is
    normalized, which downstream code uses for exact transport computations.
    The mass is computed lazily by quadrature when not supplied.
    """

    def __init__(self, f: Callable, df: Optional[Callable] = None,
                 mass: Optional[float] = None,
                 measure: Optional[Density1D] = None, label: str = ""):
        self._f = f
        self._df = df
        self._mass = mass
        self.measure = measure
        self.label = label

    def __call__(self, x):
        return self._f(np.asarray(x, dtype=float))

    def deriv(self, x):
        if self._df is None:
            raise CapabilityError("this relative function has no derivative")
        return self._df(np.asarray(x, dtype=float))

    @property
    def has_deriv(self) -> bool:
        return self._df is not None

    @property
    def mass(self) -> float:
        if self._mass is None:
            self._mass = _mass_quad(self).value
        return self._mass

    @property
    def normalized(self) -> bool:
        return abs(self.mass - 1.0) <= 1e-8

    @classmethod
    def from_measure(cls, d: Density1D, label: str = ""):
        """Relative density f = d nu / d gamma of a probability measure nu."""

        def f(x):
            return np.exp(d.logpdf(x) - gauss_logpdf(x))

        def df(x):
            # (p/phi)' = (p' + x p)/phi
            return (d.dpdf(x) + x * d.pdf(x)) / gauss_pdf(x)

        return cls(f, df, mass=1.0, measure=d, label=label)

    @classmethod
    def exp_tilt(cls, a: float):
        """The extremal family member exp(a x - a^2/2)."""
        a = float(a)

        def f(x):
            return np.exp(a * x - 0.5 * a * a)

        def df(x):
            return a * np.exp(a * x - 0.5 * a * a)

        return cls(f, df, mass=1.0,
                   measure=GaussianMixture1D([1.0], [a], [1.0]),
                   label=f"tilt({a})")

    def scaled(self, c: float):
        if not (c > 0.0 and math.isfinite(c)):
            raise DomainError("scaling constant must be positive and finite")
        df = None
        if self._df is not None:
            df = lambda x, _d=self._df: c * _d(x)
        mass = None if self._mass is None else self._mass * c
        return RelFunction1D(lambda x, _f=self._f: c * _f(x), df, mass=mass,
                             measure=self.measure, label=self.label)


def _auto_interval(g, lo=-WORKING_RADIUS, hi=WORKING_RADIUS, cutoff=1e-16):
    """Extend [lo, hi] until |g| is negligible at the edges."""
    for _ in range(12):
        edge = float(np.max(np.abs(g(np.asarray([lo, hi])))))
        if edge < cutoff or not math.isfinite(edge):
            break
        lo -= 5.0
        hi += 5.0
    return lo, hi


def _breaks(lo, hi, interior=()):
    pts = [lo, hi]
    pts.extend(float(t) for t in interior if lo < t < hi)
    pts.extend(np.linspace(lo, hi, 9)[1:-1])
    return sorted(set(pts))


def _mass_quad(f: "RelFunction1D") -> QuadResult:
    def g(x):
        return f(x) * gauss_pdf(x)

    lo, hi = _auto_interval(g)
    return adaptive_quad(g, _breaks(lo, hi), tol_abs=1e-12)


# ---------------------------------------------------------------------------
# functional surface
# ---------------------------------------------------------------------------

def cdf(d: Density1D, x):
    return d.cdf(x)


def quantile(d: Density1D, p):
    return d.quantile(p)


def _measure_interval(nu: Density1D):
    lo, hi = nu.working_interval(1e-15)
    return min(lo, -WORKING_RADIUS), max(hi, WORKING_RADIUS)


def entropy_rel_gauss_full(nu: Density1D, *, tol: float = 1e-11) -> QuadResult:
    """H(nu | gamma) with an error estimate.

    Computed as the nu-expectation of log(d nu/d gamma); the integration
    interval follows nu's own tails, not just the gamma working domain.
    """

    def g(x):
        return (nu.logpdf(x) - gauss_logpdf(x)) * nu.pdf(x)

    lo, hi = _measure_interval(nu)
    interior = tuple(nu.means) if isinstance(nu, GaussianMixture1D) else ()
    return adaptive_quad(g, _breaks(lo, hi, interior), tol_abs=tol)


def entropy_rel_gauss(nu: Density1D, *, tol: float = 1e-11) -> float:
    """Relative entropy H(nu | gamma) >= 0."""
    return entropy_rel_gauss_full(nu, tol=tol).value


def ent_gamma_full(f: RelFunction1D, *, tol: float = 1e-11) -> QuadResult:
    def g(x):
        fx = f(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            term = np.where(fx > _TINY, fx * np.log(np.maximum(fx, _TINY)), 0.0)
        return term * gauss_pdf(x)

    if f.measure is not None:
        lo, hi = _measure_interval(f.measure)
    else:
        lo, hi = _auto_interval(g)
    res = adaptive_quad(g, _breaks(lo, hi), tol_abs=tol)
    m = f.mass
    if not (math.isfinite(m) and m > 0.0):
        raise UnderflowError("relative function has non-positive mass")
    return QuadResult(res.value - m * math.log(m), res.error,
                      res.evaluations, res.panels)


def ent_gamma(f: RelFunction1D, *, tol: float = 1e-11) -> float:
    """Ent_gamma(f) = int f log f dgamma - mass log mass.

    1-homogeneous in f; nonnegative, and zero only for constants.
    """
    return ent_gamma_full(f, tol=tol).value


def fisher_integral_full(f: RelFunction1D, *, tol: float = 1e-11) -> QuadResult:
    if not f.has_deriv:
        raise CapabilityError("fisher_integral needs a derivative")

    def g(x):
        fx = np.maximum(f(x), _TINY)
        dfx = f.deriv(x)
        return (dfx * dfx / fx) * gauss_pdf(x)

    if f.measure is not None:
        lo, hi = _measure_interval(f.measure)
    else:
        lo, hi = _auto_interval(g)
    return adaptive_quad(g, _breaks(lo, hi), tol_abs=tol)


def fisher_integral(f: RelFunction1D, *, tol: float = 1e-11) -> float:
    """Relative Fisher information int f'(x)^2 / f(x) dgamma(x)."""
    return fisher_integral_full(f, tol=tol).value


def normalize(f: RelFunction1D):
    """Split f into (mass, normalized copy). Raises on vanishing mass."""
    m = f.mass
    if not (math.isfinite(m) and m > 0.0):
        raise UnderflowError(f"cannot normalize: mass = {m!r}")
    if abs(m - 1.0) <= 1e-15:
        return m, f
    df = None
    if f.has_deriv:
        df = lambda x: f.deriv(x) / m
    g = RelFunction1D(lambda x: f(x) / m, df, mass=1.0, measure=f.measure,
                      label=f.label)
    return m, g


def load_grid_csv(path) -> GridDensity1D:
    """Load a tabulated density from CSV with header ``x,density``.

    Rows must be finite floats, x strictly increasing, density positive. The
    result is normalized; the constant is recorded on ``norm_constant``.
    """
    xs, vs = [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline()
        cols = [c.strip() for c in header.strip().split(",")]
        if cols != ["x", "density"]:
            raise ParseError(f"{path}: line 1: expected header 'x,density', "
                             f"got {header.strip()!r}")
        for lineno, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if len(parts) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 2 fields, got {len(parts)}")
            try:
                x = float(parts[0])
                v = float(parts[1])
            except ValueError:
                raise ParseError(f"{path}: line {lineno}: non-numeric field") from None
            if not (math.isfinite(x) and math.isfinite(v)):
                raise ParseError(f"{path}: line {lineno}: non-finite value")
            xs.append(x)
            vs.append(v)
    if len(xs) < 2:
        raise ParseError(f"{path}: need at least 2 data rows")
    try:
        return GridDensity1D(xs, vs)
    except DomainError as exc:
        raise ParseError(f"{path}: {exc}") from exc
