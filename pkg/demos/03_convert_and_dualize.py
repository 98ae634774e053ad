"""Half-line conversions and duality of dichotomy certificates.

On a half-line the two anchor conventions (|s| vs |t|) are exactly
interchangeable by shifting the growth into the rate; the conversion
round-trips bitwise.  The dual process S(t,s) -> S(s,t)^T swaps the
certificate kind and the stable/unstable roles; the swapped certificate
validates on the same window.
"""
import nedlab as nl
from nedlab import DichotomyCertificate, ExponentPair

cert = DichotomyCertificate("I", nl.HALF_LINE_PLUS, 2.0,
                            ExponentPair(1.0, 0.5), projection="zero")
print("original: ", cert)
converted = nl.convert_halfline(cert)
print("converted:", converted)
back = nl.convert_halfline(converted)
print("round-trip is bitwise:", back == cert)
print()

unified = nl.unify_exponents(
    DichotomyCertificate("II", nl.HALF_LINE_PLUS, 2.0,
                         ExponentPair(2.0, 0.5), projection="zero"))
print("growth traded for rate:", unified)
print()

entry = nl.make_entry("barreira", a=1.0, b=2.0)
claim = [c.certificate for c in entry.claims
         if c.certificate.kind == "II"
         and c.certificate.domain.kind == "plus"][0]
dual_p = nl.dual_process(entry.process)
dual_c = nl.dual_certificate(claim)
grid = nl.GridSpec(0.0, 40.0, 0.25)
print("primal kind %s -> dual kind %s" % (claim.kind, dual_c.kind))
print("primal violation: %.2e" % nl.check_certificate(entry.process,
                                                      claim, grid))
print("dual violation:   %.2e" % nl.check_certificate(dual_p, dual_c, grid))
