"""
Gagliardo seminorms: an exact oracle and the dilation law
=========================================================

For u(x) = x on (0, 1) with s = 1/2 and p = 2 the seminorm integrand
|u(x)-u(y)|^2 / |x-y|^2 is identically one, so the squared seminorm equals
the area of the unit square.  That closed form pins down the quadrature,
including its treatment of the diagonal singularity.
"""

from fractions import Fraction

from hardylab import geometry as geo
from hardylab import quadrature as quad

slab = geo.Slab(n=1, d=1)
params = quad.FracParams(d=1, p=Fraction(2), s=Fraction(1, 2), tau=Fraction(2))

u = quad.AxisPolynomial((0.0, 1.0), slab.box)  # u(x) = x
for res in (16, 64, 128):
    val = quad.gagliardo_seminorm(u, slab, params, quad.GridSpec(res, slab.box))
    print(f"resolution {res:4d}: seminorm = {val:.12f} (exact value 1)")

# dilation law: squeezing u and its domain by lam multiplies the p-th power
# of the seminorm by lam^(d - sp); at the critical coupling sp = 1 = d the
# seminorm is scale invariant
bump = quad.TensorBump((0.5,), (0.35,))
base = quad.gagliardo_seminorm(bump, None, params, quad.GridSpec(128, geo.Box((0.0,), (1.0,))))
print(f"\nbump seminorm at scale 1:   {base:.10f}")
for lam in (0.5, 0.25, 0.125):
    val = quad.gagliardo_seminorm(
        bump.dilated(lam), None, params,
        quad.GridSpec(128, geo.Box((0.0,), (1.0,)).scaled(lam)),
    )
    print(f"bump seminorm at scale {lam}: {val:.10f} (scale invariant for sp = d)")

# away from that coupling the law has the exponent d - sp; here d=2, sp=1
params2 = quad.FracParams(d=2, p=Fraction(2), s=Fraction(1, 2), tau=Fraction(2))
square = geo.Box((0.0, 0.0), (1.0, 1.0))
bump2 = quad.TensorBump((0.5, 0.5), (0.35, 0.35))
base2 = quad.gagliardo_seminorm(bump2, None, params2, quad.GridSpec(64, square))
for lam in (0.5, 0.25):
    val = quad.gagliardo_seminorm(
        bump2.dilated(lam), None, params2, quad.GridSpec(64, square.scaled(lam))
    )
    print(f"d=2: [u_lam]^p / [u]^p = {val**2 / base2**2:.6f}  vs  lam^(d-sp) = {lam:.6f}")

# pullback across the flattening shear: unit Jacobian, equal integrals
graph = geo.ConeGraph(1.0)
support = geo.Box((-0.5, 1.2), (0.5, 2.2))
w = quad.TensorBump(support.center, (0.5, 0.5))
direct = quad.integrate(w, quad.GridSpec(128, support))
g_lo, g_hi = graph.range_on_box(support.lo[:-1], support.hi[:-1])
image = geo.Box(
    support.lo[:-1] + (support.lo[-1] - g_hi,),
    support.hi[:-1] + (support.hi[-1] - g_lo,),
)
pulled = quad.integrate(geo.pullback(w, graph), quad.GridSpec(128, image))
print(f"\npullback invariance: {direct:.8f} vs {pulled:.8f}")
