"""Gaussian mixtures in n dimensions and their Gaussian-relative calculus.

The central object is a finite mixture of full-covariance Gaussians. Around
it: directional marginals (1-D mixtures), coordinate slices (the conditional
law along one axis at a fixed value of the others, again a 1-D mixture times
an explicit mass factor), relative entropy and Fisher information w.r.t. the
standard Gaussian, and the per-axis tensorization bound for the entropy.

Expectations against the mixture are computed component-wise in whitened
coordinates: for each component, Gauss-Hermite nodes are mapped through the
Cholesky factor, so the rule sees a standard Gaussian regardless of how
eccentric the component is. Dimensions four and up switch to scrambled Sobol
replicates with an empirical error bar.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import logsumexp, ndtri
from scipy.stats import qmc

from .density1d import GaussianMixture1D, RelFunction1D
from .errors import ConditioningError, DomainError, ParseError
from .quadrature import gh_nodes, gh_tensor

__all__ = [
    "GaussianMixtureND",
    "Direction",
    "SliceSpec",
    "SliceBatch",
    "RelDensityND",
    "ProductFunction",
    "directional_marginal",
    "relative_density",
    "conditional_slice",
    "conditional_slice_batch",
    "marginal_without",
    "entropy_nd",
    "fisher_nd",
    "tensorize_entropy_bound",
    "mixture_from_json",
]

_LOG_2PI = math.log(2.0 * math.pi)
_MIN_EIG = 1e-10


def _gauss_logpdf_nd(x: np.ndarray) -> np.ndarray:
    x = np.atleast_2d(np.asarray(x, dtype=float))
    return -0.5 * np.sum(x * x, axis=1) - 0.5 * x.shape[1] * _LOG_2PI


class GaussianMixtureND:
    """Finite Gaussian mixture on R^n with full covariances.

    weights: (K,) positive, summing to one within 1e-12.
    means:   (K, n).
    covs:    (K, n, n) symmetric, smallest eigenvalue > 1e-10.
    """

    __slots__ = ("weights", "means", "covs", "_chol", "_prec", "_log_norm")

    def __init__(self, weights, means, covs):
        w = np.asarray(weights, dtype=float).reshape(-1)
        m = np.atleast_2d(np.asarray(means, dtype=float))
        c = np.asarray(covs, dtype=float)
        if c.ndim == 2:
            c = c[None, :, :]
        if w.shape[0] != m.shape[0] or w.shape[0] != c.shape[0]:
            raise DomainError("weights, means and covs must agree in length")
        if c.shape[1] != m.shape[1] or c.shape[1] != c.shape[2]:
            raise DomainError("covariance blocks must be (n, n) with n = dim of means")
        if not (np.all(np.isfinite(w)) and np.all(np.isfinite(m)) and np.all(np.isfinite(c))):
            raise DomainError("mixture parameters must be finite")
        if np.any(w <= 0.0):
            raise DomainError("mixture weights must be strictly positive")
        if abs(w.sum() - 1.0) > 1e-12:
            raise DomainError(f"mixture weights sum to {w.sum()!r}, expected 1")
        if np.max(np.abs(c - np.transpose(c, (0, 2, 1)))) > 1e-12:
            raise DomainError("covariance blocks must be symmetric")
        eig_min = float(np.min(np.linalg.eigvalsh(c)))
        if eig_min <= _MIN_EIG:
            raise ConditioningError(
                f"covariance eigenvalue {eig_min:.3e} at or below the 1e-10 floor")
        self.weights = w
        self.means = m
        self.covs = 0.5 * (c + np.transpose(c, (0, 2, 1)))
        self._chol = np.linalg.cholesky(self.covs)
        self._prec = np.linalg.inv(self.covs)
        logdet = 2.0 * np.sum(np.log(np.diagonal(self._chol, axis1=1, axis2=2)), axis=1)
        self._log_norm = -0.5 * (logdet + self.dim * _LOG_2PI)

    @property
    def dim(self) -> int:
        return self.means.shape[1]

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @classmethod
    def standard(cls, n: int) -> "GaussianMixtureND":
        return cls([1.0], np.zeros((1, n)), np.eye(n)[None, :, :])

    def _component_logpdf(self, x: np.ndarray) -> np.ndarray:
        """(K, m) matrix of log N(x_j; m_k, S_k)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.dim:
            raise DomainError(f"points have dim {x.shape[1]}, mixture has {self.dim}")
        out = np.empty((self.n_components, x.shape[0]))
        for k in range(self.n_components):
            d = x - self.means[k]
            y = np.linalg.solve(self._chol[k], d.T)
            out[k] = self._log_norm[k] - 0.5 * np.sum(y * y, axis=0)
        return out

    def logpdf(self, x):
        comp = self._component_logpdf(x)
        return logsumexp(comp + np.log(self.weights)[:, None], axis=0)

    def pdf(self, x):
        return np.exp(self.logpdf(x))

    def grad_logpdf(self, x):
        """(m, n) gradient of log density, responsibility-weighted pulls."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        comp = self._component_logpdf(x) + np.log(self.weights)[:, None]
        resp = np.exp(comp - logsumexp(comp, axis=0)[None, :])
        grad = np.zeros_like(x)
        for k in range(self.n_components):
            grad += resp[k][:, None] * ((self.means[k] - x) @ self._prec[k].T)
        return grad

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        counts = rng.multinomial(size, self.weights)
        out = np.empty((size, self.dim))
        pos = 0
        for k, cnt in enumerate(counts):
            if cnt == 0:
                continue
            z = rng.standard_normal((cnt, self.dim))
            out[pos:pos + cnt] = self.means[k] + z @ self._chol[k].T
            pos += cnt
        rng.shuffle(out, axis=0)
        return out

    def marginal(self, axes) -> "GaussianMixtureND":
        axes = np.asarray(axes, dtype=int).reshape(-1)
        if axes.size == 0 or np.any(axes < 0) or np.any(axes >= self.dim):
            raise DomainError(f"marginal axes must lie in [0, {self.dim})")
        if len(set(axes.tolist())) != axes.size:
            raise DomainError("marginal axes must be distinct")
        return GaussianMixtureND(
            self.weights,
            self.means[:, axes],
            self.covs[:, axes[:, None], axes[None, :]])

    def rotate(self, q: np.ndarray) -> "GaussianMixtureND":
        q = np.asarray(q, dtype=float)
        if q.shape != (self.dim, self.dim):
            raise DomainError("rotation matrix has the wrong shape")
        if np.max(np.abs(q.T @ q - np.eye(self.dim))) > 1e-10:
            raise DomainError("rotate expects an orthogonal matrix")
        return GaussianMixtureND(
            self.weights,
            self.means @ q.T,
            np.einsum("ab,kbc,dc->kad", q, self.covs, q))

    def mean(self) -> np.ndarray:
        return self.weights @ self.means

    def covariance(self) -> np.ndarray:
        mu = self.mean()
        second = np.einsum("k,kab->ab", self.weights, self.covs)
        second += np.einsum("k,ka,kb->ab", self.weights, self.means, self.means)
        return second - np.outer(mu, mu)


@dataclass(frozen=True)
class Direction:
    """Unit vector on the sphere, canonicalized against the antipodal copy."""

    vector: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.vector, dtype=float).reshape(-1)
        norm = float(np.linalg.norm(v))
        if not np.isfinite(norm) or norm <= 0.0:
            raise DomainError("direction must be a nonzero finite vector")
        v = v / norm
        nz = np.flatnonzero(np.abs(v) > 1e-14)
        if nz.size and v[nz[0]] < 0.0:
            v = -v
        object.__setattr__(self, "vector", v + 0.0)  # drop negative zeros

    @property
    def dim(self) -> int:
        return self.vector.shape[0]


@dataclass(frozen=True)
class SliceSpec:
    """Coordinate slice: vary ``axis`` (0-based), pin the others at ``point``."""

    axis: int
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point",
                           np.asarray(self.point, dtype=float).reshape(-1))
        if self.axis < 0:
            raise DomainError("slice axis must be nonnegative")
        if not np.all(np.isfinite(self.point)):
            raise DomainError("slice point must be finite")


def directional_marginal(nu: GaussianMixtureND, xi) -> GaussianMixture1D:
    """Law of <xi, X> under the mixture; xi is normalized first."""
    v = xi.vector if isinstance(xi, Direction) else Direction(xi).vector
    if v.shape[0] != nu.dim:
        raise DomainError("direction dimension does not match the mixture")
    means = nu.means @ v
    variances = np.einsum("a,kab,b->k", v, nu.covs, v)
    return GaussianMixture1D(nu.weights, means, np.sqrt(variances))


@dataclass
class RelDensityND:
    """Density of the mixture relative to the standard Gaussian."""

    measure: GaussianMixtureND

    @property
    def dim(self) -> int:
        return self.measure.dim

    def log_f(self, x):
        return self.measure.logpdf(x) - _gauss_logpdf_nd(x)

    def __call__(self, x):
        return np.exp(self.log_f(x))

    def grad_log_f(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self.measure.grad_logpdf(x) + x

    def grad(self, x):
        """Gradient of f itself: f * (grad log p + x)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return self(x)[:, None] * self.grad_log_f(x)


def relative_density(nu: GaussianMixtureND) -> RelDensityND:
    return RelDensityND(nu)


@dataclass
class SliceBatch:
    """Conditionals of a mixture along one axis at a batch of pinned points.

    For Gaussian components the conditional standard deviations do not depend
    on the pinned point, so they are shared across the batch.
    """

    axis: int
    mass: np.ndarray          # (B,)
    weights: np.ndarray       # (B, K) rows sum to 1
    means: np.ndarray         # (B, K)
    stds: np.ndarray          # (K,)

    def mixture(self, b: int) -> GaussianMixture1D:
        w = self.weights[b]
        # far in the pinned-point tails remote components underflow to 0
        keep = w > 1e-16
        if not np.any(keep):
            keep = w == w.max()
        w = w[keep]
        return GaussianMixture1D(w / w.sum(), self.means[b][keep],
                                 self.stds[keep])


def _partition(nu: GaussianMixtureND, axis: int):
    if not 0 <= axis < nu.dim:
        raise DomainError(f"axis {axis} outside [0, {nu.dim})")
    rest = [j for j in range(nu.dim) if j != axis]
    return np.asarray(rest, dtype=int)


def marginal_without(nu: GaussianMixtureND, axis: int) -> GaussianMixtureND:
    """Marginal on all coordinates except ``axis``."""
    return nu.marginal(_partition(nu, axis))


def conditional_slice_batch(nu: GaussianMixtureND, axis: int,
                            points: np.ndarray) -> SliceBatch:
    rest = _partition(nu, axis)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[1] != nu.dim - 1:
        raise DomainError("pinned points must have dimension n - 1")
    K = nu.n_components
    B = pts.shape[0]
    log_w = np.empty((B, K))
    m_cond = np.empty((B, K))
    s_cond = np.empty(K)
    for k in range(K):
        a = nu.covs[k][axis, axis]
        b = nu.covs[k][axis, rest]
        c_block = nu.covs[k][np.ix_(rest, rest)]
        sol = np.linalg.solve(c_block, b)
        var = float(a - b @ sol)
        if var <= _MIN_EIG:
            raise ConditioningError("conditional variance collapsed")
        s_cond[k] = math.sqrt(var)
        d = pts - nu.means[k][rest]
        m_cond[:, k] = nu.means[k][axis] + d @ sol
        chol = np.linalg.cholesky(c_block)
        y = np.linalg.solve(chol, d.T)
        log_norm = -0.5 * (2.0 * np.sum(np.log(np.diag(chol)))
                           + (nu.dim - 1) * _LOG_2PI)
        log_w[:, k] = math.log(nu.weights[k]) + log_norm - 0.5 * np.sum(y * y, axis=0)
    log_tot = logsumexp(log_w, axis=1)
    mass = np.exp(log_tot - _gauss_logpdf_nd(pts))
    weights = np.exp(log_w - log_tot[:, None])
    return SliceBatch(axis=axis, mass=mass, weights=weights,
                      means=m_cond, stds=s_cond)


def conditional_slice(nu: GaussianMixtureND, spec: SliceSpec):
    """Relative density of one coordinate slice.

    Returns (mass, g) where g(t) = p(t, point) / (phi(t) phi_{n-1}(point)) as a
    RelFunction1D carrying the conditional 1-D mixture as its measure, and
    mass = int g dgamma. The slice of the full relative density equals g.
    """
    batch = conditional_slice_batch(nu, spec.axis, spec.point[None, :])
    mix = batch.mixture(0)
    mass = float(batch.mass[0])
    return mass, RelFunction1D.from_measure(mix).scaled(mass)


class ProductFunction:
    """Tensor product of 1-D mixtures, viewable as a diagonal ND mixture."""

    def __init__(self, factors):
        if not factors:
            raise DomainError("product needs at least one factor")
        for f in factors:
            if not isinstance(f, GaussianMixture1D):
                raise DomainError("product factors must be 1-D Gaussian mixtures")
        self.factors = list(factors)

    @property
    def dim(self) -> int:
        return len(self.factors)

    def as_mixture(self) -> GaussianMixtureND:
        weights = np.array([1.0])
        means = np.zeros((1, 0))
        var_rows = np.zeros((1, 0))
        for f in self.factors:
            kf = f.weights.shape[0]
            weights = (weights[:, None] * f.weights[None, :]).reshape(-1)
            means = np.concatenate(
                [np.repeat(means, kf, axis=0),
                 np.tile(f.means, means.shape[0])[:, None]], axis=1)
            var_rows = np.concatenate(
                [np.repeat(var_rows, kf, axis=0),
                 np.tile(f.stds ** 2, var_rows.shape[0])[:, None]], axis=1)
        covs = np.zeros((weights.size, self.dim, self.dim))
        idx = np.arange(self.dim)
        covs[:, idx, idx] = var_rows
        weights = weights / weights.sum()
        return GaussianMixtureND(weights, means, covs)


# ---------------------------------------------------------------------------
# mixture expectations: whitened Gauss-Hermite (n <= 3), Sobol replicates above

_GH_ORDER = 64
_GH_CHECK = 48
_QMC_REPLICATES = 8


def _expect_gh(nu: GaussianMixtureND, func, order: int) -> float:
    nodes, wts = gh_tensor(order, nu.dim)
    total = 0.0
    for k in range(nu.n_components):
        x = nu.means[k] + nodes @ nu._chol[k].T
        total += nu.weights[k] * float(wts @ func(x))
    return total


def _expect_qmc(nu: GaussianMixtureND, func, budget: int, seed: int):
    per_rep = max(budget // _QMC_REPLICATES, 256)
    reps = np.empty(_QMC_REPLICATES)
    for r in range(_QMC_REPLICATES):
        alloc = np.maximum((nu.weights * per_rep).astype(int), 16)
        acc = 0.0
        for k in range(nu.n_components):
            # Sobol balance wants powers of two; draw up and trim
            m_bits = max(int(math.ceil(math.log2(alloc[k]))), 4)
            engine = qmc.Sobol(d=nu.dim, scramble=True,
                               seed=seed + 1009 * r + k)
            u = engine.random_base2(m_bits)[: int(alloc[k])]
            z = ndtri(np.clip(u, 1e-15, 1.0 - 1e-15))
            x = nu.means[k] + z @ nu._chol[k].T
            acc += nu.weights[k] * float(np.mean(func(x)))
        reps[r] = acc
    value = float(np.mean(reps))
    err = float(np.std(reps, ddof=1) / math.sqrt(_QMC_REPLICATES))
    return value, err


def _expectation(nu, func, *, order, check_order, mc_budget, seed):
    if nu.dim <= 3:
        v = _expect_gh(nu, func, order)
        v_check = _expect_gh(nu, func, check_order)
        return v, abs(v - v_check) + 1e-15
    return _expect_qmc(nu, func, mc_budget, seed)


def entropy_nd(nu: GaussianMixtureND, *, order: int = _GH_ORDER,
               check_order: int = _GH_CHECK, mc_budget: int = 10 ** 6,
               seed: int = 0):
    """Ent_gamma of the relative density = E_nu[log(p/phi_n)], with error."""
    rel = relative_density(nu)
    return _expectation(nu, rel.log_f, order=order, check_order=check_order,
                        mc_budget=mc_budget, seed=seed)


def fisher_nd(nu: GaussianMixtureND, *, order: int = _GH_ORDER,
              check_order: int = _GH_CHECK, mc_budget: int = 10 ** 6,
              seed: int = 0):
    """int |grad f|^2 / f dgamma = E_nu[|grad log f|^2], with error."""
    rel = relative_density(nu)

    def g(x):
        grd = rel.grad_log_f(x)
        return np.sum(grd * grd, axis=1)

    return _expectation(nu, g, order=order, check_order=check_order,
                        mc_budget=mc_budget, seed=seed)


def _batch_h_rel_gauss(batch: SliceBatch, order: int) -> np.ndarray:
    """H(slice mixture | gamma) for every row of a SliceBatch, via 1-D GH."""
    t, wts = gh_nodes(order)
    m = batch.means                      # (B, K)
    s = batch.stds                       # (K,)
    pw = batch.weights                   # (B, K)
    # evaluation points per (row, component, node)
    x = m[:, :, None] + s[None, :, None] * t[None, None, :]
    # log mixture density at x: contributions from every component j
    z = (x[:, :, :, None] - m[:, None, None, :]) / s[None, None, None, :]
    log_comp = (-0.5 * z * z - np.log(s)[None, None, None, :]
                - 0.5 * _LOG_2PI + np.log(np.maximum(pw, 1e-300))[:, None, None, :])
    log_mix = logsumexp(log_comp, axis=3)
    log_phi = -0.5 * x * x - 0.5 * _LOG_2PI
    inner = (log_mix - log_phi) @ wts    # (B, K)
    return np.sum(pw * inner, axis=1)


def _outer_orders(n: int):
    # outer rule over n-1 pinned coordinates
    return (_GH_ORDER, _GH_CHECK) if n == 2 else (20, 14)


def tensorize_entropy_bound(nu: GaussianMixtureND, *, inner_order: int = _GH_ORDER):
    """Per-axis slice entropies: terms[i] = E over the other coordinates of
    H(conditional slice | gamma); their sum dominates Ent_gamma of the
    relative density, with equality for products. Returns (terms, total, err).
    """
    if nu.dim < 2:
        raise DomainError("tensorization needs dimension at least 2")
    if nu.dim > 3:
        raise DomainError("tensorization bound is computed for n <= 3")
    outer_hi, outer_lo = _outer_orders(nu.dim)
    terms = np.empty(nu.dim)
    errs = np.empty(nu.dim)
    for axis in range(nu.dim):
        rest_mix = marginal_without(nu, axis)
        vals = []
        for order in (outer_hi, outer_lo):
            nodes, wts = gh_tensor(order, nu.dim - 1)
            acc = 0.0
            for k in range(rest_mix.n_components):
                pts = rest_mix.means[k] + nodes @ rest_mix._chol[k].T
                batch = conditional_slice_batch(nu, axis, pts)
                h = _batch_h_rel_gauss(batch, inner_order)
                acc += rest_mix.weights[k] * float(wts @ h)
            vals.append(acc)
        terms[axis] = vals[0]
        errs[axis] = abs(vals[0] - vals[1]) + 1e-15
    return terms, float(terms.sum()), float(errs.sum())


def mixture_from_json(payload) -> GaussianMixtureND:
    """Build a mixture from a JSON object {weights, means, covs}.

    Accepts a dict, a JSON string, or bytes. Raises ParseError with a
    description of the offending field.
    """
    if isinstance(payload, (str, bytes)):
        try:
            payload = json.loads(payload)
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(payload, dict):
        raise ParseError("mixture JSON must be an object")
    missing = {"weights", "means", "covs"} - set(payload)
    if missing:
        raise ParseError(f"mixture JSON missing fields: {sorted(missing)}")
    try:
        return GaussianMixtureND(payload["weights"], payload["means"],
                                 payload["covs"])
    except (DomainError, ConditioningError, ValueError) as exc:
        raise ParseError(f"invalid mixture parameters: {exc}") from None
