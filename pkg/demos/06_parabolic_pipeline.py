"""From a scalar dichotomy to a reaction-diffusion certificate.

Discretizes the 1-d heat operator with Dirichlet walls, drives it with
the oscillating separable coefficient g(t) = -2 - t sin t, and lifts
the scalar bound (rate 3, growth 2, M = e^2) to the full discretized
PDE: the diffusion adds |lambda_1| to the rate, and the principal
bundle's mode-separation constants sharpen the norm factor.  Finishes
with the cubic reaction demo whose simulated sections must stay inside
the transferred envelope.
"""
import math
import time

import numpy as np

import nedlab as nl

N = 31
lap = nl.discretize(nl.Grid1D(1.0, N), nl.BoundaryCondition("dirichlet"))
print("grid: N=%d interior points, h=%.4f" % (N, lap.grid.h))
print("leading eigenvalue lambda_1 = %.6f (continuum -pi^2 = %.6f)"
      % (lap.leading_eigenvalue, -math.pi ** 2))

g = lambda t: -2.0 - t * math.sin(t)
big_g = lambda t: -2.0 * t + t * math.cos(t) - math.sin(t)
process = nl.pde_process(lap, separable_g=g, g_antiderivative=big_g)

residual = nl.variation_of_constants_check(
    process, lambda t: math.exp(-t) * np.ones(N), (0.0, 1.0), n_check=3)
print("variation-of-constants residual: %.2e" % residual)

autonomous = nl.pde_process(lap, separable_g=lambda t: 0.0,
                            g_antiderivative=lambda t: 0.0)
bundle = nl.principal_bundle(autonomous)
gap = float(lap.eigenvalues[-1] - lap.eigenvalues[-2])
print("principal bundle: nu_sep=%.6f (spectral gap %.6f), m_sep=%.4f"
      % (bundle.nu_sep, gap, bundle.m_sep))

scalar = nl.DichotomyCertificate("II", nl.FULL_LINE, math.e ** 2,
                                 nl.ExponentPair(3.0, 2.0),
                                 projection="zero")
cert = nl.scalar_to_pde_transfer(scalar, lap, bundle)
print("transferred certificate:", cert)
violation = nl.check_certificate(process, cert, nl.GridSpec(0.0, 20.0, 0.5))
print("violation on [0, 20]: %.2e" % violation)

print()
print("== cubic reaction demo (smaller grid for speed) ==")
small = nl.discretize(nl.Grid1D(1.0, 15), nl.BoundaryCondition("dirichlet"))
t0 = time.monotonic()
report = nl.parabolic_attractor_demo(
    small, g, lambda t: math.exp(-abs(t)) * np.ones(15), scalar,
    lam=0.0, t_grid=[-4.0, -2.0, 0.0], bnorm=1.0, seeds_per_time=3)
print("sections contained in envelope:", report["margins"].contained)
print("minimum margin: %.4f  (%.1f s)"
      % (report["margins"].min_margin, time.monotonic() - t0))
