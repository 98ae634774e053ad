"""Perturbation robustness: constants and certificate transport.

First evaluates the closed-form constants that govern how a dichotomy
survives a bounded perturbation, then runs the full transport pipeline:
measure the weighted distance between a process and its perturbation,
gate on the admissible size, and emit validated certificates for the
perturbed process on both the primal and dual sides.
"""
import nedlab as nl
from nedlab import GridSpec, ScalarCoefficientProcess

report = nl.robustness_constants(1.0, 1.0, 0.2, 0.1)
print("constants at (M, omega, upsilon, eps) = (1, 1, 0.2, 0.1):")
for key in ("omega_tilde", "beta_tilde", "rho", "m1", "m2", "m_hat"):
    print("  %-12s %.12f" % (key, getattr(report, key)))
print("  literal exponent difference %.6f -> usable positive rate %.6f"
      % (report.w_as_written, report.positive_exponent))
print()


def constant(rate):
    return ScalarCoefficientProcess(lambda t: rate,
                                    antiderivative=lambda t: rate * t)


base = constant(-1.0)
cert = nl.DichotomyCertificate("II", nl.FULL_LINE, 1.0,
                               nl.ExponentPair(1.0, 0.0), projection="zero")
grid = GridSpec(-3.0, 3.0, 0.5)

for rate in (-1.01, -2.0):
    perturbed = constant(rate)
    result = nl.robust_nedii_pipeline(base, cert, perturbed, 0.0, 0.1, grid)
    print("perturbed rate %g: applicable=%s" % (rate, result.applicable))
    if result.applicable:
        print("  transported certificate:", result.primal_cert_of_q)
        print("  primal violation %.2e, dual violation %.2e"
              % (result.primal_violation, result.dual_violation))
    else:
        print("  gated: %s" % result.reason)
