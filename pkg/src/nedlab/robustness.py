"""Explicit perturbation constants for dichotomy robustness.

Given a process with a kind-I dichotomy (bound M e^{upsilon |t|},
exponent omega) and a perturbation within distance epsilon in the
weighted band sup

    sup_{0 <= t-s <= 1} e^{upsilon |s|} ||S(t,s) - T(t,s)||,

the perturbed process admits a kind-I dichotomy whose constants are
explicit elementary functions of (M, omega, upsilon, epsilon).  This
module evaluates those constants, the band sups, and the dual-route
pipeline that transports kind-II dichotomies through the duality swap
(the dual admits kind I, robustness applies there, and dualizing back
recovers kind II with the same constants).
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

import numpy as np

from .dichotomy import (
    DichotomyCertificate,
    ExponentPair,
    InapplicableError,
    check_certificate,
)
from .process import (
    EvolutionProcess,
    GridSpec,
    dual_process,
    spectral_norm,
)

__all__ = [
    "RobustnessReport",
    "robustness_constants",
    "perturbation_distance",
    "growth_constant",
    "robust_nedii_pipeline",
    "PipelineResult",
]


@dataclasses.dataclass(frozen=True)
class RobustnessReport:
    """All derived constants, evaluated literally from the formulas.

    Both sign conventions of the perturbed exponent are reported:
    ``w_as_written`` = omega_tilde - omega (how the source states it,
    nonpositive for every admissible input we can evaluate) and
    ``w_sign_flipped`` = omega - omega_tilde.  ``positive_exponent``
    names whichever is positive; certificate emission uses it.
    """

    m: float
    omega: float
    upsilon: float
    eps: float
    omega_tilde: float
    beta_tilde: float
    rho: float
    m1: float
    m2: float
    m_hat: float
    w_as_written: float
    w_sign_flipped: float
    flags: dict
    l_sup: Optional[float] = None

    @property
    def admissible(self) -> bool:
        return all(self.flags.values())

    @property
    def positive_exponent(self) -> float:
        return max(self.w_as_written, self.w_sign_flipped)

    def to_dict(self) -> dict:
        d = {
            "inputs": {"M": self.m, "omega": self.omega,
                       "upsilon": self.upsilon, "eps": self.eps},
            "omega_tilde": self.omega_tilde,
            "beta_tilde": self.beta_tilde,
            "rho": self.rho,
            "M1": self.m1,
            "M2": self.m2,
            "M_hat": self.m_hat,
            "w_as_written": self.w_as_written,
            "w_sign_flipped": self.w_sign_flipped,
            "flags": dict(self.flags),
            "admissible": self.admissible,
        }
        if self.l_sup is not None:
            d["L"] = self.l_sup
        return d


def robustness_constants(m: float, omega: float, upsilon: float,
                         eps: float) -> RobustnessReport:
    """Evaluate the perturbation constants exactly as stated.

        omega_tilde = -ln(cosh w - [cosh^2 w - 1 - 2 e sinh w]^{1/2})
        beta_tilde  = omega_tilde + ln(1 + 2 e sinh w)
        rho         = e (1 + e^{-w}) / (1 - e^{-w})
        M1          = [1 - e e^{-w} / (1 - e^{-w - omega_tilde})]^{-1}
        M2          = [1 - e e^{-beta_tilde} / (1 - e^{-w - beta_tilde})]^{-1}
        M_hat       = M (1 + e / ((1 - rho)(1 - e^{-w}))) max{M1, M2}

    Inadmissible inputs (negative radical, rho >= 1, nonpositive
    denominators, upsilon >= omega) are not errors: the literal values
    are reported with the corresponding flag cleared.

    The radical is evaluated as sinh^2 w - 2 e sinh w (identical by
    cosh^2 - 1 = sinh^2) and the outer log via
    ln(cosh w - r) = ln1p(2 e sinh w) - ln(cosh w + r), which avoids the
    catastrophic cancellation of cosh w - sinh w at small eps.
    """
    sh, ch = math.sinh(omega), math.cosh(omega)
    radical = sh * sh - 2.0 * eps * sh
    flags = {
        "radical_nonnegative": radical >= 0.0,
        "upsilon_below_omega": 0.0 <= upsilon < omega,
    }
    if radical >= 0.0:
        r = math.sqrt(radical)
        # cosh w - r = (1 + 2 eps sinh w) / (cosh w + r) exactly.
        log_arg_positive = True
        omega_tilde = math.log(ch + r) - math.log1p(2.0 * eps * sh)
    else:
        log_arg_positive = False
        omega_tilde = math.nan
    flags["log_argument_positive"] = log_arg_positive
    beta_tilde = omega_tilde + math.log1p(2.0 * eps * sh)
    emw = math.exp(-omega)
    rho = eps * (1.0 + emw) / (1.0 - emw)
    flags["rho_below_one"] = rho < 1.0
    d1 = 1.0 - eps * emw / -math.expm1(-omega - omega_tilde)
    d2 = 1.0 - eps * math.exp(-beta_tilde) / -math.expm1(-omega - beta_tilde)
    flags["m1_positive"] = d1 > 0.0
    flags["m2_positive"] = d2 > 0.0
    m1 = 1.0 / d1 if d1 != 0.0 else math.inf
    m2 = 1.0 / d2 if d2 != 0.0 else math.inf
    m_hat = m * (1.0 + eps / ((1.0 - rho) * (1.0 - emw))) * max(m1, m2)
    return RobustnessReport(
        m=m, omega=omega, upsilon=upsilon, eps=eps,
        omega_tilde=omega_tilde, beta_tilde=beta_tilde, rho=rho,
        m1=m1, m2=m2, m_hat=m_hat,
        w_as_written=omega_tilde - omega,
        w_sign_flipped=omega - omega_tilde,
        flags=flags,
    )


# BAND SUPS ============================================================================

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def _golden_section_max(f, lo, hi, tol=1e-10, max_iter=200):
    """Golden-section search for a local maximum on [lo, hi]."""
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a < tol:
            break
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - _GOLDEN * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _GOLDEN * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def _band_sup(value_fn, grid: GridSpec, band_step: float = 0.01,
              with_residual: bool = False):
    """Maximize value_fn(t, s) over the band 0 <= t - s <= 1 with s in
    the grid range: coarse scan at `band_step` in both s and t-s, then
    golden-section refinement in each coordinate around the maximizer.
    """
    s_lo, s_hi = grid.start, grid.stop
    s_vals = np.arange(s_lo, s_hi + band_step / 2, max(band_step, grid.step))
    d_vals = np.arange(0.0, 1.0 + band_step / 2, band_step)
    best, bs, bd = -math.inf, s_lo, 0.0
    for s in s_vals:
        for d in d_vals:
            if not grid.stop >= s + d:
                continue
            v = value_fn(s + d, s)
            if v > best:
                best, bs, bd = v, float(s), float(d)
    coarse = best
    # Refine the offset at the best anchor, then the anchor at the best
    # offset; either refinement can only improve on the grid value.
    d_lo, d_hi = max(0.0, bd - band_step), min(1.0, bd + band_step)
    if d_hi > d_lo:
        d_ref, v = _golden_section_max(lambda d: value_fn(bs + d, bs), d_lo, d_hi)
        if v > best:
            best, bd = v, d_ref
    s_lo2, s_hi2 = max(s_lo, bs - band_step), min(s_hi - bd, bs + band_step)
    if s_hi2 > s_lo2:
        s_ref, v = _golden_section_max(lambda s: value_fn(s + bd, s), s_lo2, s_hi2)
        if v > best:
            best = v
    if with_residual:
        return best, best - coarse
    return best


def perturbation_distance(p: EvolutionProcess, q: EvolutionProcess,
                          upsilon: float, grid: GridSpec,
                          band_step: float = 0.01,
                          with_residual: bool = False):
    """sup of e^{upsilon |s|} ||S(t,s) - T(t,s)|| over 0 <= t-s <= 1.

    Approximated on a (s, t-s) grid with the given step plus
    golden-section refinement around the grid maximizer; with
    ``with_residual=True`` also returns how much refinement added.
    """
    if p.dimension != q.dimension:
        raise ValueError("processes have different dimensions")

    def value(t, s):
        return math.exp(upsilon * abs(s)) * spectral_norm(p.matrix(t, s) - q.matrix(t, s))

    return _band_sup(value, grid, band_step=band_step, with_residual=with_residual)


def growth_constant(p: EvolutionProcess, upsilon: float, grid: GridSpec,
                    band_step: float = 0.01) -> float:
    """sup of e^{-upsilon |t|} ||S(t,s)|| over 0 <= t-s <= 1."""

    def value(t, s):
        return math.exp(-upsilon * abs(t)) * spectral_norm(p.matrix(t, s))

    return _band_sup(value, grid, band_step=band_step)


# DUAL-ROUTE PIPELINE ==================================================================

@dataclasses.dataclass
class PipelineResult:
    applicable: bool
    distance: float
    report: Optional[RobustnessReport] = None
    dual_cert_of_q: Optional[DichotomyCertificate] = None
    primal_cert_of_q: Optional[DichotomyCertificate] = None
    dual_violation: Optional[float] = None
    primal_violation: Optional[float] = None
    reason: str = ""


def robust_nedii_pipeline(p: EvolutionProcess, cert: DichotomyCertificate,
                          q: EvolutionProcess, upsilon: float, eps: float,
                          grid: GridSpec) -> PipelineResult:
    """Transport a kind-II dichotomy of p to the perturbed process q.

    Route: dualize both processes (the dual of p then carries a kind-I
    dichotomy with the same constants), check that the dual perturbation
    distance stays below eps, evaluate the robustness constants, and
    emit the predicted kind-I certificate for dual(q).  Reflexivity
    turns that into the kind-II certificate of q itself.  Both emitted
    certificates are validated on the supplied grid.
    """
    if cert.kind != "II":
        raise InapplicableError("pipeline starts from a kind-II certificate")
    omega = cert.omega
    if not (0.0 <= upsilon < omega):
        raise InapplicableError(
            "need 0 <= upsilon < omega (upsilon=%g, omega=%g)" % (upsilon, omega))
    dual_p = dual_process(p)
    dual_q = dual_process(q)
    distance = perturbation_distance(dual_p, dual_q, upsilon, grid)
    if not (distance < eps):
        return PipelineResult(False, distance,
                              reason="dual perturbation distance %.6g >= eps %.6g"
                              % (distance, eps))
    report = robustness_constants(cert.m, omega, upsilon, eps)
    if not report.admissible:
        return PipelineResult(False, distance, report=report,
                              reason="robustness constants inadmissible: %s"
                              % report.flags)
    l_t = growth_constant(dual_q, upsilon, grid)
    report = dataclasses.replace(report, l_sup=l_t)
    # Bound of the emitted dichotomy: M_hat(s) = M_hat^2 e^{2 omega_tilde}
    # max{L, L^2} e^{2 upsilon |s|}, exponent the positive branch of w_hat.
    big_m = (report.m_hat ** 2) * math.exp(2.0 * report.omega_tilde) \
        * max(l_t, l_t * l_t)
    w_pos = report.positive_exponent
    if not (w_pos > 0):
        return PipelineResult(False, distance, report=report,
                              reason="no positive perturbed exponent")
    pair = ExponentPair(w_pos, 2.0 * upsilon)
    projection = cert.projection
    dual_proj = {"zero": "identity", "identity": "zero",
                 "explicit": "explicit"}[projection]
    dual_cert = DichotomyCertificate(
        "I", cert.domain, max(big_m, 1.0), pair,
        unstable=(pair if dual_proj != "zero" else None),
        projection=dual_proj,
        projection_family=None if dual_proj != "explicit" else cert.projection_family)
    primal_cert = DichotomyCertificate(
        "II", cert.domain, max(big_m, 1.0), pair,
        unstable=(pair if projection != "zero" else None),
        projection=projection,
        projection_family=cert.projection_family)
    dual_violation = check_certificate(dual_q, dual_cert, grid)
    primal_violation = check_certificate(q, primal_cert, grid)
    return PipelineResult(True, distance, report=report,
                          dual_cert_of_q=dual_cert,
                          primal_cert_of_q=primal_cert,
                          dual_violation=dual_violation,
                          primal_violation=primal_violation)
