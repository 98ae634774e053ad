"""Two-parameter evolution processes S(t, s) and norm sampling.

An evolution process is a family of linear operators ``S(t, s)`` on R^n
satisfying ``S(t, t) = Id`` and the cocycle identity
``S(t, s) S(s, tau) = S(t, tau)``.  Invertible processes extend the family
to ``t < s`` via ``S(s, t) = S(t, s)^{-1}``.

This module provides the process backends (closed-form exponents,
piecewise closed forms, numerically integrated coefficient matrices),
projection families, operator-norm evaluation, and grid sampling of
``log ||S(t, s) P(s)||`` used by the certificate machinery.
"""

from __future__ import annotations

import dataclasses
import json
import math
from typing import Callable, Optional

import numpy as np
from scipy.integrate import quad, solve_ivp

__all__ = [
    "DomainError",
    "FiniteEscapeError",
    "TimeDomain",
    "FULL_LINE",
    "HALF_LINE_PLUS",
    "HALF_LINE_MINUS",
    "ProjectionFamily",
    "GridSpec",
    "NormGrid",
    "EvolutionProcess",
    "ScalarExponentProcess",
    "ScalarCoefficientProcess",
    "MatrixClosedFormProcess",
    "IntegratedLinearProcess",
    "spectral_norm",
    "operator_norm",
    "propagate",
    "dual_process",
    "sample_norm_grid",
]

#: Norm threshold beyond which propagation is treated as finite-time escape.
ESCAPE_GUARD = 1e150
_LOG_GUARD = math.log(ESCAPE_GUARD)


class DomainError(ValueError):
    """Raised when (t, s) falls outside the process time domain, or when
    t < s is requested from a non-invertible process."""


class FiniteEscapeError(RuntimeError):
    """Propagation exceeded the overflow guard before reaching time t.

    Attributes
    ----------
    t, s : floats, the requested propagation interval.
    escape_time : rough estimate of the time at which the norm crossed
        the guard threshold (linear interpolation on the log scale).
    """

    def __init__(self, t, s, escape_time):
        self.t = t
        self.s = s
        self.escape_time = escape_time
        super().__init__(
            "propagation from s=%g escaped beyond %.3g near t=%g "
            "(requested t=%g)" % (s, ESCAPE_GUARD, escape_time, t)
        )


# TIME DOMAINS =========================================================================

@dataclasses.dataclass(frozen=True)
class TimeDomain:
    """One of the three time domains: the full line, R+ or R-."""

    kind: str  # "full" | "plus" | "minus"

    def __post_init__(self):
        if self.kind not in ("full", "plus", "minus"):
            raise ValueError("unknown time domain %r" % (self.kind,))

    def contains(self, t: float) -> bool:
        if self.kind == "plus":
            return t >= 0.0
        if self.kind == "minus":
            return t <= 0.0
        return True

    @property
    def is_half_line(self) -> bool:
        return self.kind != "full"

    @staticmethod
    def from_string(label: str) -> "TimeDomain":
        return TimeDomain(label)

    def __str__(self) -> str:
        return self.kind


FULL_LINE = TimeDomain("full")
HALF_LINE_PLUS = TimeDomain("plus")
HALF_LINE_MINUS = TimeDomain("minus")


# PROJECTION FAMILIES ==================================================================

class ProjectionFamily:
    """Time-indexed family of unstable projections t -> Pi^u(t).

    The stable projection is the complement ``Pi^s(t) = Id - Pi^u(t)``.
    The common degenerate cases (identically zero and identically the
    identity) are tagged so that downstream code can use full-norm
    shortcuts instead of multiplying by explicit matrices.
    """

    def __init__(self, unstable_fn: Callable[[float], np.ndarray],
                 dimension: int, descriptor: str = "explicit"):
        self._fn = unstable_fn
        self.dimension = dimension
        self.descriptor = descriptor  # "zero" | "identity" | "explicit"

    @classmethod
    def zero(cls, dimension: int) -> "ProjectionFamily":
        z = np.zeros((dimension, dimension))
        return cls(lambda t: z, dimension, descriptor="zero")

    @classmethod
    def identity(cls, dimension: int) -> "ProjectionFamily":
        eye = np.eye(dimension)
        return cls(lambda t: eye, dimension, descriptor="identity")

    @classmethod
    def constant(cls, matrix) -> "ProjectionFamily":
        matrix = np.asarray(matrix, dtype=float)
        return cls(lambda t: matrix, matrix.shape[0], descriptor="explicit")

    def unstable(self, t: float) -> np.ndarray:
        return np.asarray(self._fn(t), dtype=float)

    def stable(self, t: float) -> np.ndarray:
        return np.eye(self.dimension) - self.unstable(t)

    def idempotence_defect(self, times) -> float:
        """max_t ||P(t)^2 - P(t)|| over the given times."""
        worst = 0.0
        for t in times:
            p = self.unstable(t)
            worst = max(worst, spectral_norm(p @ p - p))
        return worst

    def invariance_defect(self, process: "EvolutionProcess", pairs) -> float:
        """max ||S(t,s) P(s) - P(t) S(t,s)|| over the given (t, s) pairs."""
        worst = 0.0
        for t, s in pairs:
            m = process.matrix(t, s)
            worst = max(worst, spectral_norm(m @ self.unstable(s) - self.unstable(t) @ m))
        return worst


# SPECTRAL NORM ========================================================================

def _power_iteration_norm(m, tol=1e-12, max_iter=10000):
    # Largest singular value via power iteration on m^T m.  Deterministic
    # start vector; a second, tilted start guards against an unlucky
    # orthogonal initialization.  The matrix is rescaled first so that
    # squaring inside the Gram product cannot underflow for very small
    # (or overflow for very large) propagators.
    scale = float(np.max(np.abs(m)))
    if scale == 0.0 or not math.isfinite(scale):
        return scale
    m = m / scale
    g = m.T @ m
    n = g.shape[0]
    for trial in range(2):
        v = np.ones(n) / math.sqrt(n)
        if trial == 1:
            v = v + 1e-3 * np.arange(1.0, n + 1.0)
            v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(max_iter):
            w = g @ v
            nw = np.linalg.norm(w)
            if nw == 0.0:
                return 0.0
            w /= nw
            lam_new = float(w @ (g @ w)) / float(w @ w)
            if abs(lam_new - lam) <= tol * max(1.0, abs(lam_new)):
                return scale * math.sqrt(max(lam_new, 0.0))
            lam = lam_new
            v = w
    return scale * math.sqrt(max(lam, 0.0))


def spectral_norm(m) -> float:
    """Largest singular value of a small dense matrix.

    Dimensions <= 3 use direct formulas / LAPACK; larger matrices fall
    back to power iteration on ``m^T m`` (tolerance 1e-12, at most 1e4
    iterations).
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if n == 1:
        return abs(float(m[0, 0]))
    if n == 2:
        # Closed-form singular values of a 2x2 block from the Gram matrix.
        g = m.T @ m
        tr = g[0, 0] + g[1, 1]
        det = g[0, 0] * g[1, 1] - g[0, 1] * g[1, 0]
        disc = max(tr * tr - 4.0 * det, 0.0)
        return math.sqrt(max(0.5 * (tr + math.sqrt(disc)), 0.0))
    if n == 3:
        return float(np.linalg.svd(m, compute_uv=False)[0])
    return _power_iteration_norm(m)


# GRIDS ================================================================================

@dataclasses.dataclass(frozen=True)
class GridSpec:
    """Uniform time mesh on [start, stop] with the origin pinned.

    The mesh always contains both endpoints, and contains 0 whenever
    0 lies in [start, stop], so that half-line anchors e^{delta |t|}
    are sampled where they are smallest.
    """

    start: float
    stop: float
    step: float
    extra_points: tuple = ()

    def __post_init__(self):
        if not (self.stop > self.start):
            raise ValueError("empty grid: stop must exceed start")
        if not (self.step > 0):
            raise ValueError("grid step must be positive")

    def mesh(self) -> np.ndarray:
        n = int(round((self.stop - self.start) / self.step))
        pts = self.start + self.step * np.arange(n + 1)
        pts = pts[pts <= self.stop + 1e-12 * max(1.0, abs(self.stop))]
        extras = [self.stop]
        if self.start < 0.0 < self.stop:
            extras.append(0.0)
        extras.extend(p for p in self.extra_points if self.start <= p <= self.stop)
        pts = np.concatenate([pts, np.asarray(extras, dtype=float)])
        pts = np.unique(np.round(pts, 12))
        return pts

    def pairs(self, part: str = "stable"):
        """All ordered mesh pairs: (t >= s) for "stable", (t < s) for
        "unstable".  Returns flat arrays (t_vals, s_vals)."""
        mesh = self.mesh()
        tt, ss = np.meshgrid(mesh, mesh, indexing="ij")
        if part == "stable":
            keep = tt >= ss
        elif part == "unstable":
            keep = tt < ss
        else:
            raise ValueError("part must be 'stable' or 'unstable'")
        return tt[keep], ss[keep]


@dataclasses.dataclass
class NormGrid:
    """Sampled values of log ||S(t, s) P(s)|| over a grid of pairs.

    samples : (n, 3) array of rows (t, s, log_norm).
    part : which projection factor was applied ("stable" or "unstable").
    poisoned : list of (t, s) pairs where propagation escaped or failed;
        these carry no log-norm value and are excluded from fitting.
    """

    samples: np.ndarray
    part: str = "stable"
    poisoned: list = dataclasses.field(default_factory=list)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,s,log_norm,part\n")
            for t, s, v in self.samples:
                fh.write("%.17g,%.17g,%.17g,%s\n" % (t, s, v, self.part))

    @staticmethod
    def from_csv(path) -> "NormGrid":
        rows = []
        part = "stable"
        with open(path) as fh:
            header = fh.readline().strip().split(",")
            if header[:3] != ["t", "s", "log_norm"]:
                raise ValueError("unrecognized norm-grid header: %r" % (header,))
            for line in fh:
                t, s, v, part = line.strip().split(",")
                rows.append((float(t), float(s), float(v)))
        return NormGrid(np.asarray(rows, dtype=float), part=part)


# PROCESSES ============================================================================

class EvolutionProcess:
    """Base class for two-parameter evolution families S(t, s).

    Subclasses implement :meth:`matrix`.  ``propagate`` applies the
    operator to a vector; scalar backends override it to avoid building
    1x1 matrices in inner loops.
    """

    dimension: int = 1
    domain: TimeDomain = FULL_LINE
    invertible: bool = False
    backend: str = "closed-form-exponent"

    def _check_args(self, t: float, s: float) -> None:
        if not (self.domain.contains(t) and self.domain.contains(s)):
            raise DomainError(
                "pair (t=%g, s=%g) outside time domain %s" % (t, s, self.domain)
            )
        if t < s and not self.invertible:
            raise DomainError(
                "t < s requires an invertible process (backend %s)" % self.backend
            )

    def matrix(self, t: float, s: float) -> np.ndarray:
        raise NotImplementedError

    def propagate(self, t: float, s: float, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape[0] != self.dimension:
            raise DomainError(
                "state dimension %d does not match process dimension %d"
                % (x.shape[0], self.dimension)
            )
        return self.matrix(t, s) @ x

    # Scalar closed-form backends override this with a vectorized version.
    def log_norm(self, t: float, s: float, projection=None, part: str = "stable"):
        return operator_norm(self, t, s, projection, part=part, log=True)


class ScalarExponentProcess(EvolutionProcess):
    """Scalar process given by a closed-form log-propagator E(t, s),
    i.e. S(t, s) x = e^{E(t, s)} x.  Always invertible."""

    dimension = 1
    invertible = True

    def __init__(self, exponent: Callable, domain: TimeDomain = FULL_LINE,
                 backend: str = "closed-form-exponent"):
        self.exponent = exponent
        self.domain = domain
        self.backend = backend

    def log_propagator(self, t, s):
        """Vectorized E(t, s); accepts arrays."""
        return self.exponent(t, s)

    def matrix(self, t: float, s: float) -> np.ndarray:
        self._check_args(t, s)
        e = float(self.exponent(t, s))
        if e > _LOG_GUARD:
            raise FiniteEscapeError(t, s, _escape_estimate(t, s, e))
        return np.array([[math.exp(e)]])

    def propagate(self, t: float, s: float, x) -> np.ndarray:
        self._check_args(t, s)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        e = float(self.exponent(t, s))
        if e > _LOG_GUARD:
            raise FiniteEscapeError(t, s, _escape_estimate(t, s, e))
        return math.exp(e) * x


def _escape_estimate(t, s, log_norm):
    # Linear interpolation of the log-norm growth over [s, t]: the guard
    # is crossed roughly a fraction log_guard / log_norm of the way in.
    if log_norm <= 0:
        return t
    return s + (t - s) * min(1.0, _LOG_GUARD / log_norm)


class ScalarCoefficientProcess(ScalarExponentProcess):
    """Scalar process x' = f(t) x with the log-propagator computed by
    adaptive quadrature of the coefficient: E(t, s) = int_s^t f.

    Antiderivative values F(t) = int_0^t f are cached per mesh point, so
    grid sweeps cost one quadrature per distinct time rather than per
    pair.  A closed-form antiderivative can be supplied to skip
    quadrature entirely.
    """

    backend = "numerically-integrated"

    def __init__(self, coefficient: Callable, domain: TimeDomain = FULL_LINE,
                 antiderivative: Optional[Callable] = None,
                 quad_kwargs: Optional[dict] = None):
        self.coefficient = coefficient
        self.antiderivative = antiderivative
        self.quad_kwargs = dict(epsabs=1e-13, epsrel=1e-12, limit=400)
        if quad_kwargs:
            self.quad_kwargs.update(quad_kwargs)
        self._cache = {}
        super().__init__(self._exponent, domain=domain,
                         backend="numerically-integrated")

    def _cumulative(self, t: float) -> float:
        if self.antiderivative is not None:
            return float(self.antiderivative(t))
        t = float(t)
        if t not in self._cache:
            val, _ = quad(self.coefficient, 0.0, t, **self.quad_kwargs)
            self._cache[t] = val
        return self._cache[t]

    def _exponent(self, t, s):
        if np.ndim(t) or np.ndim(s):
            t = np.atleast_1d(t)
            s = np.atleast_1d(s)
            ft = np.array([self._cumulative(v) for v in np.ravel(t)]).reshape(np.shape(t))
            fs = np.array([self._cumulative(v) for v in np.ravel(s)]).reshape(np.shape(s))
            return ft - fs
        return self._cumulative(t) - self._cumulative(s)


class MatrixClosedFormProcess(EvolutionProcess):
    """Finite-dimensional process with an explicit matrix map (t, s) ->
    S(t, s), e.g. piecewise-constant cocycles diagonalized in a fixed
    basis, duals, and adjoints."""

    def __init__(self, matrix_fn: Callable, dimension: int,
                 domain: TimeDomain = FULL_LINE, invertible: bool = True,
                 backend: str = "piecewise-closed-form"):
        self._matrix_fn = matrix_fn
        self.dimension = dimension
        self.domain = domain
        self.invertible = invertible
        self.backend = backend

    def matrix(self, t: float, s: float) -> np.ndarray:
        self._check_args(t, s)
        m = np.asarray(self._matrix_fn(t, s), dtype=float)
        if not np.all(np.isfinite(m)) or spectral_norm(m) > ESCAPE_GUARD:
            raise FiniteEscapeError(t, s, t)
        return m


class IntegratedLinearProcess(EvolutionProcess):
    """Process generated by x' = A(t) x with an adaptive explicit
    Runge-Kutta 4(5) pair (relative tolerance 1e-10, absolute 1e-12).

    ``matrix`` integrates the full matrix ODE from the identity;
    ``propagate`` integrates the vector directly.  Backward propagation
    (t < s) is available when ``invertible=True`` and simply integrates
    the ODE backward in time.
    """

    backend = "numerically-integrated"

    def __init__(self, coefficient_matrix: Callable, dimension: int,
                 domain: TimeDomain = FULL_LINE, invertible: bool = False,
                 rtol: float = 1e-10, atol: float = 1e-12):
        self.coefficient_matrix = coefficient_matrix
        self.dimension = dimension
        self.domain = domain
        self.invertible = invertible
        self.rtol = rtol
        self.atol = atol

    def _solve(self, t: float, s: float, y0: np.ndarray) -> np.ndarray:
        n = self.dimension

        def rhs(tau, y):
            return (np.asarray(self.coefficient_matrix(tau), dtype=float)
                    @ y.reshape(n, -1)).ravel()

        def escape(tau, y):
            return float(np.linalg.norm(y)) - ESCAPE_GUARD
        escape.terminal = True

        sol = solve_ivp(rhs, (s, t), y0.ravel(), method="RK45",
                        rtol=self.rtol, atol=self.atol, events=escape,
                        dense_output=False)
        if sol.status == 1:  # escape event fired
            raise FiniteEscapeError(t, s, float(sol.t_events[0][0]))
        if not sol.success:
            raise RuntimeError("integration failed: %s" % sol.message)
        return sol.y[:, -1].reshape(y0.shape)

    def matrix(self, t: float, s: float) -> np.ndarray:
        self._check_args(t, s)
        if t == s:
            return np.eye(self.dimension)
        return self._solve(t, s, np.eye(self.dimension))

    def propagate(self, t: float, s: float, x) -> np.ndarray:
        self._check_args(t, s)
        x = np.atleast_1d(np.asarray(x, dtype=float))
        if x.shape[0] != self.dimension:
            raise DomainError("state dimension mismatch")
        if t == s:
            return x.copy()
        return self._solve(t, s, x)


# MODULE-LEVEL OPERATIONS ==============================================================

def propagate(process: EvolutionProcess, t: float, s: float, x) -> np.ndarray:
    """Apply S(t, s) to the state x."""
    return process.propagate(t, s, x)


def operator_norm(process: EvolutionProcess, t: float, s: float,
                  projection: Optional[ProjectionFamily] = None,
                  part: str = "stable", log: bool = False):
    """Spectral norm of ``S(t, s) P(s)`` where P is the stable or
    unstable member of the projection family (full norm if None)."""
    if projection is None or (part == "stable" and projection.descriptor == "zero") \
            or (part == "unstable" and projection.descriptor == "identity"):
        # Projection factor is the identity.
        if process.dimension == 1 and isinstance(process, ScalarExponentProcess):
            process._check_args(t, s)
            e = float(process.exponent(t, s))
            return e if log else math.exp(e)
        val = spectral_norm(process.matrix(t, s))
        return math.log(val) if log else val
    if (part == "stable" and projection.descriptor == "identity") \
            or (part == "unstable" and projection.descriptor == "zero"):
        # Projection factor is the zero map.
        return -math.inf if log else 0.0
    p = projection.stable(s) if part == "stable" else projection.unstable(s)
    val = spectral_norm(process.matrix(t, s) @ p)
    if log:
        return math.log(val) if val > 0 else -math.inf
    return val


def dual_process(process: EvolutionProcess) -> MatrixClosedFormProcess:
    """Dual family T(t, s) = S(s, t)^*.

    Requires an invertible process; the dual of a process with a
    dichotomy of one kind admits a dichotomy of the other kind with the
    same bound and exponents.
    """
    if not process.invertible:
        raise DomainError("dual process requires an invertible process")
    base = process

    def matrix_fn(t, s):
        return base.matrix(s, t).T

    d = MatrixClosedFormProcess(matrix_fn, base.dimension, domain=base.domain,
                                invertible=True, backend=base.backend)
    d.primal = base
    return d


def sample_norm_grid(process: EvolutionProcess,
                     projection: Optional[ProjectionFamily],
                     grid: GridSpec, part: str = "stable") -> NormGrid:
    """Sample log ||S(t, s) P(s)|| over all grid pairs of the right
    orientation.  Escaped pairs are recorded as poisoned rather than
    aborting the sweep."""
    tv, sv = grid.pairs(part)
    full_norm = (
        projection is None
        or (part == "stable" and projection.descriptor == "zero")
        or (part == "unstable" and projection.descriptor == "identity")
    )
    if full_norm and isinstance(process, ScalarExponentProcess):
        # Vectorized closed-form path: log norm is the log-propagator.
        for v in (grid.start, grid.stop):
            if not process.domain.contains(v):
                raise DomainError("grid [%g, %g] outside domain %s"
                                  % (grid.start, grid.stop, process.domain))
        vals = np.asarray(process.log_propagator(tv, sv), dtype=float)
        ok = vals <= _LOG_GUARD
        samples = np.column_stack([tv[ok], sv[ok], vals[ok]])
        poisoned = list(zip(tv[~ok].tolist(), sv[~ok].tolist()))
        return NormGrid(samples, part=part, poisoned=poisoned)
    rows = []
    poisoned = []
    for t, s in zip(tv, sv):
        try:
            v = operator_norm(process, float(t), float(s), projection,
                              part=part, log=True)
        except FiniteEscapeError:
            poisoned.append((float(t), float(s)))
            continue
        if v == -math.inf:
            # Zero operator: satisfies every bound; skip rather than
            # propagate -inf into the fitting arithmetic.
            continue
        rows.append((float(t), float(s), float(v)))
    samples = (np.asarray(rows, dtype=float) if rows
               else np.empty((0, 3), dtype=float))
    return NormGrid(samples, part=part, poisoned=poisoned)


# CONFIG LOADING =======================================================================

def load_process_config(path_or_dict):
    """Build a process from a JSON config.

    The config names a backend plus backend-specific fields; closed-form
    families are resolved through the gallery registry.  See the CLI
    documentation for the schema.
    """
    # Imported lazily to avoid a cycle (gallery builds on this module).
    from . import gallery

    if isinstance(path_or_dict, dict):
        cfg = dict(path_or_dict)
    else:
        with open(path_or_dict) as fh:
            cfg = json.load(fh)
    try:
        backend = cfg["backend"]
        domain = TimeDomain(cfg.get("domain", "full"))
    except (KeyError, ValueError) as exc:
        raise ValueError("invalid process config: %s" % exc) from exc

    if backend in ("closed-form-exponent", "piecewise-closed-form"):
        family = cfg.get("family")
        if family is None:
            raise ValueError("closed-form configs must name a 'family'")
        entry = gallery.make_entry(family, **cfg.get("params", {}))
        return entry.process
    if backend == "numerically-integrated":
        coeff = cfg.get("coefficient")
        if coeff == "constant":
            rate = float(cfg["params"]["rate"])
            return ScalarCoefficientProcess(lambda t: rate, domain=domain,
                                            antiderivative=lambda t: rate * t)
        if coeff == "tanh":
            sigma = float(cfg["params"].get("scale", 1.0))
            return ScalarCoefficientProcess(
                lambda t: np.tanh(t / sigma), domain=domain,
                antiderivative=lambda t: sigma * np.log(np.cosh(t / sigma)))
        raise ValueError("unknown integrated coefficient %r" % (coeff,))
    raise ValueError("unknown backend %r" % (backend,))
