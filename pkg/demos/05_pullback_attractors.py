"""Pullback and forward attractors of dissipative scalar systems.

Simulates pullback omega-limit sections by starting ever deeper in the
past, compares them against the radius envelope predicted from a
dichotomy certificate, and checks order preservation for a cooperative
two-dimensional system.
"""
import math

import numpy as np

import nedlab as nl

print("== x' = -x + cos t: sections track the bounded solution ==")
spec = nl.DissipativitySpec(field=lambda t, x: -x + math.cos(t),
                            a=lambda t: -1.0, b=lambda t: 1.0, dimension=1)
for t in (-2.0, 0.0, 2.0):
    cloud = nl.simulate_pullback_omega(spec, t, np.array([[0.0], [3.0]]))
    expect = 0.5 * (math.cos(t) + math.sin(t))
    print("  t=%5.1f section %.8f  bounded solution %.8f"
          % (t, cloud.representatives[0, 0], expect))
print()

print("== oscillating cubic system vs its certificate envelope ==")
# x' = g(t) x - x^3 + e^{-2|t|} with g(t) = -2 - t sin t.  Squaring the
# comparison inequality turns the half-line bound (rate 1, growth 2,
# M=e^2) into (rate 1, growth 4, M=e^4), giving the constant envelope
# sqrt(e^4 / 5).
squared = nl.DichotomyCertificate("II", nl.HALF_LINE_MINUS, math.e ** 4,
                                  nl.ExponentPair(1.0, 4.0),
                                  projection="zero")
g = lambda t: -2.0 - t * math.sin(t)
forcing = lambda t: math.exp(-2.0 * abs(t))
driven = nl.DissipativitySpec(
    field=lambda t, x: g(t) * x - x ** 3 + forcing(t),
    a=lambda t: 2.0 * g(t) + 1.0, b=lambda t: forcing(t) ** 2, dimension=1)
envelope = nl.make_pullback_envelope(squared, -1.0, 1.0)
sections = {}
for t in np.arange(-20.0, 0.1, 2.5):
    cloud = nl.simulate_pullback_omega(
        driven, float(t), np.array([[0.0], [1.0], [-1.0]]))
    sections[float(t)] = cloud.representatives
    radius = max(abs(v) for v in cloud.representatives.ravel())
    print("  t=%6.1f  section radius %.4f  envelope %.4f"
          % (t, radius, envelope(float(t))))
report = nl.verify_containment(nl.SetFamily(sections), envelope)
print("  contained:", report.contained, " min margin %.4f" % report.min_margin)
print()

print("== cooperative system: pullback equilibrium and ordering ==")
a = np.array([[-2.0, 1.0], [1.0, -2.0]])
spec2 = nl.CooperativeSpec(a_matrix=a, b_vector=np.array([1.0, 1.0]),
                           dimension=2)
cloud = nl.simulate_pullback_omega(
    spec2, 0.0, np.array([[0.0, 0.0], [2.0, 3.0]]), cluster_eps=1e-10)
print("  section:", cloud.representatives[0], " (equilibrium is (1, 1))")
worst = spec2.certify([-1.0, 0.0, 1.0])
print("  worst cooperative-structure value: %.3g (>= 0 means cooperative)"
      % worst)
