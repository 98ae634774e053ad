"""Pullback/forward attraction for dissipative nonautonomous ODE fields.

Provides the weighted-function spaces C_eta, the tempered universes
D_gamma, scalar comparison bounds under the dissipativity assumption
2 <f(t,x), x> <= a(t)|x|^2 + b(t), closed-form radius envelopes for
pullback and forward attractors, and Monte-Carlo simulation of pullback
and forward omega-limit sets with single-linkage clustering.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

from .dichotomy import DichotomyCertificate, InapplicableError
from .process import EvolutionProcess, GridSpec, TimeDomain, FULL_LINE

__all__ = [
    "WeightedFunction",
    "SetFamily",
    "UniverseFamily",
    "RadiusEnvelope",
    "DissipativitySpec",
    "CooperativeSpec",
    "OmegaCloud",
    "MarginReport",
    "weighted_norm",
    "comparison_bound",
    "pullback_radius",
    "make_pullback_envelope",
    "forward_bound",
    "forward_attractor_radius",
    "simulate_pullback_omega",
    "simulate_forward_omega",
    "verify_containment",
    "hausdorff_semidistance",
    "universe_membership",
    "attractor_coincidence",
]

_CASE_TOL = 1e-12  # declared tolerance for the forward-bound case split


# TYPES ================================================================================

@dataclasses.dataclass
class WeightedFunction:
    """A forcing profile b together with its weight exponent eta.

    Membership in C_eta (finiteness of sup e^{-eta|r|} |b(r)|) is
    certified on grids only; see :func:`weighted_norm`.
    """

    evaluator: Callable[[float], float]
    eta: float
    domain: TimeDomain = FULL_LINE

    def __call__(self, r: float):
        return self.evaluator(r)


@dataclasses.dataclass
class SetFamily:
    """Time-indexed finite point clouds: sections[t] is an (m, n) array."""

    sections: dict

    def __post_init__(self):
        if not self.sections:
            raise ValueError("a set family needs at least one section")
        fixed = {}
        for t, pts in self.sections.items():
            pts = np.atleast_2d(np.asarray(pts, dtype=float))
            if pts.shape[0] == 0:
                raise ValueError("empty section at t=%g" % t)
            fixed[float(t)] = pts
        self.sections = fixed

    def times(self):
        return sorted(self.sections)

    def section(self, t: float) -> np.ndarray:
        return self.sections[float(t)]


@dataclasses.dataclass
class UniverseFamily:
    """Tempered universe D_gamma: families growing at most like C e^{gamma |t|}.

    ``representative`` supplies seed points per time: either a SetFamily
    or a callable t -> point cloud.  The witness C certifies (on sampled
    times) that the representative stays inside the growth envelope.
    """

    gamma: float
    representative: object
    witness: float = 1.0

    def sample(self, t: float) -> np.ndarray:
        if callable(self.representative):
            return np.atleast_2d(np.asarray(self.representative(t), dtype=float))
        return self.representative.section(t)


@dataclasses.dataclass
class RadiusEnvelope:
    """A closed-form radius curve t -> R(t) with its defining parameters."""

    params: dict
    evaluator: Callable[[float], float]
    norm: str = "euclidean"

    def __call__(self, t: float) -> float:
        return float(self.evaluator(t))


@dataclasses.dataclass
class DissipativitySpec:
    """A field together with scalar dissipativity witnesses:
    2 <f(t,x), x> <= a(t) |x|^2 + b(t)."""

    field: Callable
    a: Callable[[float], float]
    b: WeightedFunction
    dimension: int = 1

    def certify(self, t_range, x_radius, n_samples: int = 10000,
                seed: int = 0):
        """Probabilistic check of the dissipativity inequality on a box.

        Samples (t, x) uniformly with t in t_range and ||x|| <= x_radius
        and returns (max violation, all-nonpositive flag).  A numeric
        sample check cannot certify the global inequality; reports
        should say so.
        """
        rng = np.random.default_rng(seed)
        lo, hi = t_range
        worst = -math.inf
        for _ in range(n_samples):
            t = rng.uniform(lo, hi)
            x = rng.normal(size=self.dimension)
            x *= rng.uniform(0.0, x_radius) / max(np.linalg.norm(x), 1e-300)
            lhs = 2.0 * float(np.dot(self.field(t, x), x))
            rhs = self.a(t) * float(np.dot(x, x)) + float(self.b(t))
            worst = max(worst, lhs - rhs)
        return worst, worst <= 0.0


@dataclasses.dataclass
class CooperativeSpec:
    """Quasimonotone comparison system x' <= A(t) x + b(t) in the
    componentwise order, measured in the max-norm."""

    a_matrix: Callable[[float], np.ndarray]
    b_vector: Callable[[float], np.ndarray]
    dimension: int
    field: Optional[Callable] = None

    def __post_init__(self):
        if not callable(self.a_matrix):
            m = np.asarray(self.a_matrix, dtype=float)
            self.a_matrix = lambda t: m
        if not callable(self.b_vector):
            v = np.asarray(self.b_vector, dtype=float)
            self.b_vector = lambda t: v
        if self.field is None:
            self.field = lambda t, x: self.a_matrix(t) @ x + self.b_vector(t)

    def certify(self, t_samples, x_radius=1.0, n_samples: int = 200, seed: int = 0):
        """Sampled checks of the structure: nonnegative off-diagonals,
        nonnegative forcing, and the boundary condition f_i >= 0 on
        {x >= 0, x_i = 0}.  Returns the worst (most negative) value."""
        rng = np.random.default_rng(seed)
        worst = math.inf
        for t in t_samples:
            m = np.asarray(self.a_matrix(t), dtype=float)
            off = m - np.diag(np.diag(m))
            worst = min(worst, float(np.min(off)))
            worst = min(worst, float(np.min(self.b_vector(t))))
            for _ in range(n_samples):
                x = rng.uniform(0.0, x_radius, size=self.dimension)
                i = rng.integers(self.dimension)
                x[i] = 0.0
                worst = min(worst, float(self.field(t, x)[i]))
        return worst


# WEIGHTED NORMS AND BOUNDS ============================================================

def weighted_norm(b: WeightedFunction, grid: GridSpec) -> float:
    """sup of e^{-eta |r|} |b(r)| over the grid."""
    vals = [math.exp(-b.eta * abs(r)) * abs(float(b(r))) for r in grid.mesh()
            if b.domain.contains(r)]
    if not vals:
        raise ValueError("grid does not intersect the weight domain")
    return max(vals)


def comparison_bound(scalar_process: EvolutionProcess, b: WeightedFunction,
                     t: float, s: float, x0_norm_sq: float,
                     cert: Optional[DichotomyCertificate] = None) -> float:
    """Right-hand side of the scalar comparison:
    T(t,s) x0_norm_sq + int_s^t T(t,tau) b(tau) dtau.

    ``scalar_process`` is the comparison propagator T generated by the
    witness coefficient a; the optional certificate is only sanity
    checked (kind II, zero unstable projection) since the numbers come
    from the process itself.
    """
    if t < s:
        raise ValueError("comparison bound needs t >= s")
    if scalar_process.dimension != 1:
        raise ValueError("comparison propagator must be scalar")
    if cert is not None and (cert.kind != "II" or cert.projection != "zero"):
        raise InapplicableError("comparison certificate must be kind II with "
                               "zero unstable projection")
    homogeneous = float(scalar_process.propagate(t, s, np.array([1.0]))[0])

    def integrand(tau):
        return float(scalar_process.propagate(t, tau, np.array([1.0]))[0]) \
            * float(b(tau))

    if t == s:
        forced = 0.0
    else:
        forced, abserr = quad(integrand, s, t, epsabs=1e-12, epsrel=1e-10,
                              limit=400)
        if abserr > 1e-6 * max(1.0, abs(forced)):
            raise RuntimeError("comparison quadrature did not converge "
                               "(error estimate %.3g)" % abserr)
    return homogeneous * x0_norm_sq + forced


def pullback_radius(cert: DichotomyCertificate, lam: float, bnorm: float,
                    t: float) -> float:
    """Pullback attractor radius on R- under a kind-II dichotomy:
    R(t) = [ (M/(alpha - delta*lam)) * ||b||_{lam*delta}
             * e^{(lam+1) delta |t|} ]^{1/2}."""
    alpha, delta = cert.stable.rate, cert.stable.growth
    denom = alpha - delta * lam
    if not (denom > 0):
        raise InapplicableError("need alpha > delta * lambda "
                                "(alpha=%g, delta=%g, lambda=%g)"
                                % (alpha, delta, lam))
    return math.sqrt((cert.m / denom) * bnorm * math.exp((lam + 1.0) * delta * abs(t)))


def make_pullback_envelope(cert: DichotomyCertificate, lam: float,
                           bnorm: float) -> RadiusEnvelope:
    alpha, delta = cert.stable.rate, cert.stable.growth
    return RadiusEnvelope(
        params={"M": cert.m, "alpha": alpha, "delta": delta,
                "lambda": lam, "bnorm": bnorm},
        evaluator=lambda t: pullback_radius(cert, lam, bnorm, t))


def forward_bound(cert: DichotomyCertificate, eta: float, bnorm: float,
                  t: float, s: float, x0_norm_sq: float) -> float:
    """Forward-in-time comparison bound on R+ under a kind-II dichotomy
    with stable pair (beta, nu).

    Three regimes depending on the weight eta of the forcing relative
    to the threshold -beta/nu (selected with tolerance 1e-12):

      eta > -beta/nu :  M e^{(nu-beta)t + beta s} x0^2
                        + (M/(beta+nu eta)) ||b|| e^{(eta+1) nu |t|}
      eta = -beta/nu :  ... + M ||b|| e^{(nu-beta)t} (t - s)
      eta < -beta/nu :  ... - (M ||b|| / (beta + eta nu))
                              e^{(nu-beta)t} e^{nu(eta+1)s}
    """
    if not (t >= s >= 0):
        raise ValueError("forward bound needs t >= s >= 0")
    beta, nu = cert.stable.rate, cert.stable.growth
    m = cert.m
    homogeneous = m * math.exp((nu - beta) * t + beta * s) * x0_norm_sq
    if bnorm == 0.0:
        return homogeneous
    if nu == 0.0:
        # Uniform case: the threshold recedes to -inf; always regime 1.
        return homogeneous + (m / beta) * bnorm
    threshold = -beta / nu
    if abs(eta - threshold) <= _CASE_TOL:
        return homogeneous + m * bnorm * math.exp((nu - beta) * t) * (t - s)
    if eta > threshold:
        return homogeneous + (m / (beta + nu * eta)) * bnorm \
            * math.exp((eta + 1.0) * nu * abs(t))
    return homogeneous - (m * bnorm / (beta + eta * nu)) \
        * math.exp((nu - beta) * t) * math.exp(nu * (eta + 1.0) * s)


def forward_attractor_radius(cert: DichotomyCertificate, eta: float,
                             bnorm: float, full_line: bool = False) -> dict:
    """Forward attractor size under a kind-I dichotomy with zero
    unstable projection and weight eta <= -1 (in delta units).

    Half-line: eta < -1 gives the point attractor {0}; eta = -1 gives
    the ball of radius (M ||b||_{-delta} / alpha)^{1/2}.  The full-line
    variant returns R_F = (M ||b||_{-delta} / (alpha - delta))^{1/2},
    which needs alpha > delta.
    """
    alpha, delta = cert.stable.rate, cert.stable.growth
    if full_line:
        if not (alpha > delta):
            raise InapplicableError("full-line radius needs alpha > delta")
        return {"kind": "ball",
                "radius": math.sqrt(cert.m * bnorm / (alpha - delta))}
    if eta < -1.0 - _CASE_TOL:
        return {"kind": "point", "radius": 0.0}
    if abs(eta + 1.0) <= _CASE_TOL:
        return {"kind": "ball", "radius": math.sqrt(cert.m * bnorm / alpha)}
    raise InapplicableError("forward attractor theorem needs eta <= -1")


# SIMULATION ===========================================================================

class TrajectoryEscapeError(RuntimeError):
    pass


def _integrate_ensemble(field, t0: float, t1: float, points: np.ndarray,
                        t_eval=None, rtol: float = 1e-10, atol: float = 1e-12,
                        guard: float = 1e8):
    """Integrate x' = f(t, x) for every row of `points` as one stacked
    system.  Returns the final ensemble, or a list of ensembles when
    t_eval is given."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    k, n = points.shape

    def rhs(tau, y):
        states = y.reshape(k, n)
        return np.stack([np.asarray(field(tau, states[i]), dtype=float)
                         for i in range(k)]).ravel()

    def escape(tau, y):
        return float(np.max(np.abs(y))) - guard
    escape.terminal = True

    sol = solve_ivp(rhs, (t0, t1), points.ravel(), method="RK45",
                    rtol=rtol, atol=atol, t_eval=t_eval, events=escape)
    if sol.status == 1:
        raise TrajectoryEscapeError(
            "ensemble escaped |x| > %g near t=%g" % (guard, sol.t_events[0][0]))
    if not sol.success:
        raise RuntimeError("integration failed: %s" % sol.message)
    if t_eval is None:
        return sol.y[:, -1].reshape(k, n)
    return [sol.y[:, j].reshape(k, n) for j in range(sol.y.shape[1])]


def _single_linkage(points: np.ndarray, eps: float):
    """Cluster labels by single linkage at radius eps (union-find)."""
    m = points.shape[0]
    parent = list(range(m))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
    close = d2 <= eps * eps
    for i in range(m):
        for j in range(i + 1, m):
            if close[i, j]:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[rj] = ri
    roots = {}
    labels = np.empty(m, dtype=int)
    for i in range(m):
        r = find(i)
        if r not in roots:
            roots[r] = len(roots)
        labels[i] = roots[r]
    return labels


@dataclasses.dataclass
class OmegaCloud:
    """Clustered endpoint cloud approximating an omega-limit section."""

    points: np.ndarray
    labels: np.ndarray
    representatives: np.ndarray
    converged: bool = True
    depth_used: int = 0
    poisoned: int = 0

    def section(self) -> np.ndarray:
        return self.representatives


def _cluster(points: np.ndarray, eps: float, converged=True, depth=0,
             poisoned=0) -> OmegaCloud:
    labels = _single_linkage(points, eps)
    reps = np.stack([points[labels == c].mean(axis=0)
                     for c in range(labels.max() + 1)])
    return OmegaCloud(points, labels, reps, converged=converged,
                      depth_used=depth, poisoned=poisoned)


def _field_of(spec):
    if hasattr(spec, "field") and hasattr(spec, "dimension"):
        return spec.field, spec.dimension
    raise TypeError("expected an object with field and dimension attributes")


def _seeds_at(seeds, s: float) -> np.ndarray:
    if isinstance(seeds, UniverseFamily):
        return seeds.sample(s)
    if isinstance(seeds, SetFamily):
        return seeds.section(s)
    if callable(seeds):
        return np.atleast_2d(np.asarray(seeds(s), dtype=float))
    return np.atleast_2d(np.asarray(seeds, dtype=float))


def simulate_pullback_omega(spec, t: float, seeds, s_schedule=None,
                            cluster_eps: float = 1e-4,
                            max_depth_exponent: int = 20) -> OmegaCloud:
    """Approximate the pullback omega-limit section at time t.

    Integrates seed clouds from ever-earlier start times s_k = t - 2^k
    (or an explicit decreasing schedule) up to t.  Depth scanning stops
    early once consecutive depth clouds agree within cluster_eps
    (horizon-doubling convergence); the first half of the processed
    schedule is discarded as burn-in before clustering.
    """
    field, _ = _field_of(spec)
    if s_schedule is None:
        s_schedule = [t - 2.0 ** k for k in range(max_depth_exponent + 1)]
    if any(b >= a for a, b in zip(s_schedule, s_schedule[1:])):
        raise ValueError("schedule must be strictly decreasing")
    per_depth = []
    poisoned = 0
    converged = False
    for s in s_schedule:
        try:
            endpoints = _integrate_ensemble(field, s, t, _seeds_at(seeds, s))
        except TrajectoryEscapeError:
            poisoned += 1
            continue
        per_depth.append(endpoints)
        if len(per_depth) >= 2:
            d = max(hausdorff_semidistance(per_depth[-1], per_depth[-2]),
                    hausdorff_semidistance(per_depth[-2], per_depth[-1]))
            if d <= cluster_eps:
                converged = True
                break
    if not per_depth:
        raise TrajectoryEscapeError("every pullback depth escaped; the "
                                    "dissipativity witness is invalid")
    # Burn-in: drop the shallow half of the processed schedule, and of
    # the remainder keep only clouds already settled near the deepest
    # one -- only late/deep samples approximate the limit set.
    deepest = per_depth[-1]
    keep = [deepest]
    for cloud in per_depth[len(per_depth) // 2:-1]:
        d = max(hausdorff_semidistance(cloud, deepest),
                hausdorff_semidistance(deepest, cloud))
        if d <= cluster_eps:
            keep.append(cloud)
    points = np.vstack(keep)
    return _cluster(points, cluster_eps, converged=converged,
                    depth=len(per_depth), poisoned=poisoned)


def simulate_forward_omega(spec, initial_cloud, tau: float,
                           horizon_schedule=None,
                           cluster_eps: float = 1e-4,
                           max_horizon_exponent: int = 7) -> OmegaCloud:
    """Approximate the forward omega-limit of a bounded set B from time
    tau: states S(tau + h, tau) B at increasing horizons h, late-time
    half clustered."""
    field, _ = _field_of(spec)
    if horizon_schedule is None:
        horizon_schedule = [2.0 ** k for k in range(max_horizon_exponent + 1)]
    if any(b <= a for a, b in zip(horizon_schedule, horizon_schedule[1:])):
        raise ValueError("horizon schedule must be strictly increasing")
    cloud = np.atleast_2d(np.asarray(initial_cloud, dtype=float))
    t_eval = [tau + h for h in horizon_schedule]
    states = _integrate_ensemble(field, tau, t_eval[-1], cloud, t_eval=t_eval)
    keep = states[len(states) // 2:]
    points = np.vstack(keep)
    return _cluster(points, cluster_eps, depth=len(states))


# REPORTS ==============================================================================

def _norms(points: np.ndarray, kind: str) -> np.ndarray:
    if kind == "max":
        return np.max(np.abs(points), axis=1)
    return np.linalg.norm(points, axis=1)


@dataclasses.dataclass
class MarginReport:
    margins: dict  # t -> R(t) - max point norm

    @property
    def min_margin(self) -> float:
        return min(self.margins.values())

    @property
    def contained(self) -> bool:
        return self.min_margin >= 0.0


def verify_containment(clouds: SetFamily, envelope: RadiusEnvelope) -> MarginReport:
    """margin(t) = R(t) - max norm over the cloud section at t."""
    margins = {}
    for t in clouds.times():
        pts = clouds.section(t)
        margins[t] = envelope(t) - float(np.max(_norms(pts, envelope.norm)))
    return MarginReport(margins)


def hausdorff_semidistance(a, b) -> float:
    """sup over a in A of inf over b in B of ||a - b||."""
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("hausdorff semidistance needs nonempty clouds")
    d2 = np.sum((a[:, None, :] - b[None, :, :]) ** 2, axis=-1)
    return float(np.max(np.sqrt(np.min(d2, axis=1))))


def universe_membership(family: SetFamily, gamma: float) -> float:
    """Witness C = sup over sections of e^{-gamma |t|} max ||x||; any
    family dominated section-wise by this one inherits the witness."""
    worst = 0.0
    for t in family.times():
        pts = family.section(t)
        worst = max(worst, math.exp(-gamma * abs(t))
                    * float(np.max(np.linalg.norm(pts, axis=1))))
    return worst


def attractor_coincidence(spec, t_grid, gamma0: float, gammas,
                          witness: float = 1.0, seeds_per_time: int = 8,
                          cluster_eps: float = 1e-4, seed: int = 0) -> dict:
    """Compare pullback sections simulated under seed universes D_gamma
    against the base universe D_gamma0.

    Returns {gamma: max over the t grid of the symmetrized Hausdorff
    distance between the two sections}.  Coincidence of the attractors
    shows up as distances at the cluster tolerance.
    """
    _, dim = _field_of(spec)
    rng = np.random.default_rng(seed)
    directions = rng.normal(size=(seeds_per_time, dim))
    directions /= np.linalg.norm(directions, axis=1, keepdims=True)

    # Representative seed radii follow the growth envelope but are capped
    # so that very deep pullback starts stay integrable; the capped family
    # still belongs to D_gamma (universes are inclusion-closed downward).
    seed_cap = 1e6

    def universe(gamma):
        return UniverseFamily(
            gamma,
            lambda s, g=gamma: witness * min(math.exp(min(g * abs(s), 700.0)),
                                             seed_cap) * directions,
            witness=witness)

    base_sections = {
        t: simulate_pullback_omega(spec, t, universe(gamma0),
                                   cluster_eps=cluster_eps).section()
        for t in t_grid}
    out = {}
    for gamma in gammas:
        worst = 0.0
        for t in t_grid:
            sec = simulate_pullback_omega(spec, t, universe(gamma),
                                          cluster_eps=cluster_eps).section()
            worst = max(worst,
                        hausdorff_semidistance(sec, base_sections[t]),
                        hausdorff_semidistance(base_sections[t], sec))
        out[float(gamma)] = worst
    return out
