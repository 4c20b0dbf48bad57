"""Assembly of Duhamel right-hand sides and a per-mode scalar flux check.

The theorem-form right-hand side is beta_s int_0^inf P_z(G(., z)) z^{1-2s} dz.
Forcings are evaluated lazily at each quadrature node and smoothed by one
Poisson application per node, so memory stays O(grid); node contributions
are accumulated in a fixed order, so results are deterministic given the
rule.  Forcings with different endpoint exponents (horizontal-gradient vs
dz-gradient terms) are assembled with their matched rule and summed.
"""

from __future__ import annotations

import numpy as np
from scipy.integrate import quad

from .manifolds import GridField
from .operators import poisson_apply
from .special import FracParams, poisson_multiplier
from .zquad import ZRule

__all__ = ["assemble_rhs", "assemble_rhs_split", "duhamel_mode_check"]


def assemble_rhs(
    forcing,
    p: FracParams,
    rule: ZRule,
    *,
    theorem_form: bool = True,
    include_weight: bool = True,
    out_refine: int = 1,
) -> GridField:
    """sum_i w_i P_{z_i}(G(., z_i)), scaled by beta_s in theorem form.

    `forcing` maps a height z to a GridField.  With include_weight=False the
    rule's plain-dz weights are used instead (for forcings that already
    carry the z^{1-2s} factor).
    """
    weights = rule.weights if include_weight else rule.plain_weights()
    acc = None
    man = None
    for z, w in zip(rule.nodes, weights):
        g = forcing(float(z))
        smoothed = poisson_apply(g, p, float(z), out_refine=out_refine)
        if acc is None:
            man = smoothed.manifold
            acc = w * smoothed.values
        else:
            acc = acc + w * smoothed.values
    if acc is None:
        raise ValueError("empty quadrature rule")
    if theorem_form:
        acc = p.beta * acc
    return GridField(man, acc, out_refine)


def assemble_rhs_split(terms, p: FracParams, *, theorem_form: bool = True, out_refine: int = 1) -> GridField:
    """Sum of assemble_rhs over (forcing, rule) pairs with matched endpoint classes."""
    total = None
    for forcing, rule in terms:
        part = assemble_rhs(forcing, p, rule, theorem_form=theorem_form, out_refine=out_refine)
        if total is None:
            total = part
        else:
            total = GridField(part.manifold, total.values + part.values, out_refine)
    if total is None:
        raise ValueError("no forcing terms given")
    return total


def _fd5(g, z: float, h: float) -> float:
    return (-g(z + 2 * h) + 8.0 * g(z + h) - 8.0 * g(z - h) + g(z - 2 * h)) / (12.0 * h)


def duhamel_mode_check(
    g,
    lam: float,
    p: FracParams,
    g_deriv=None,
    g_deriv2=None,
    z_inf: float = 40.0,
    z0: float = 0.01,
) -> float:
    """Residual of the single-mode flux identity

        lim_{z->inf} z^{1-2s} g' - lim_{z->0} z^{1-2s} g'
            = int_0^inf theta_s(z sqrt(lam)) [ (z^{1-2s} g')' - lam z^{1-2s} g ] dz

    for smooth g with g(0') = 0 and exponential decay.  Both sides are
    computed with quadrature independent of the z-rule machinery (adaptive
    QUADPACK).  Derivatives default to 5-point finite differences; pass
    `g_deriv`/`g_deriv2` for the sharpest residuals.
    """
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    s = p.s
    analytic = g_deriv is not None
    if g_deriv is None:
        g_deriv = lambda z: _fd5(g, z, 1e-2 * max(min(z, 1.0), 1e-3))
    if g_deriv2 is None:
        g_deriv2 = lambda z: _fd5(g_deriv, z, 2e-2 * max(min(z, 1.0), 1e-3))

    scale = max(abs(g(0.5)), abs(g(1.0)), abs(g(2.0)), 1e-30)
    while (abs(g(z_inf)) > 1e-10 * scale or abs(g_deriv(z_inf)) > 1e-8 * scale) and z_inf < 400.0:
        z_inf *= 2.0
    if abs(g(z_inf)) > 1e-10 * scale or abs(g_deriv(z_inf)) > 1e-8 * scale:
        raise ValueError("forcing profile g does not decay")
    if s > 0.5:
        dscale = max(abs(g_deriv(0.05)), abs(g_deriv(0.1)), abs(g_deriv(0.3)), 1e-30)
        if abs(g_deriv(1e-6)) > 1e-3 * dscale:
            raise ValueError("for s > 1/2 the flux limit requires g'(0) = 0")

    def flux(z):
        return z ** (1.0 - 2.0 * s) * g_deriv(z)

    # z -> 0 flux limit for smooth g: zero unless s = 1/2 exactly, where it
    # equals g'(0) (extrapolated on the integer ladder, well-conditioned)
    if abs(1.0 - 2.0 * s) < 1e-12:
        levels = 5
        zs = z0 * 0.5 ** np.arange(levels)
        A = np.ones((levels, levels))
        for j in range(1, levels):
            A[:, j] = zs**j
        lim0 = float(np.linalg.solve(A, np.array([g_deriv(z) for z in zs]))[0])
    else:
        lim0 = 0.0
    lim_inf = flux(z_inf)
    lhs = lim_inf - lim0

    root = np.sqrt(lam)

    def integrand(z):
        theta = poisson_multiplier(p, root * z) if lam > 0 else 1.0
        div_term = z ** (1.0 - 2.0 * s) * g_deriv2(z) + (1.0 - 2.0 * s) * z ** (-2.0 * s) * g_deriv(z)
        return theta * (div_term - lam * z ** (1.0 - 2.0 * s) * g(z))

    if analytic:
        inner = quad(integrand, 0.0, 1.0, epsabs=1e-12, epsrel=1e-12, limit=400, full_output=1)[0]
        outer = quad(integrand, 1.0, z_inf, epsabs=1e-12, epsrel=1e-12, limit=400, full_output=1)[0]
    else:
        # finite-difference noise in g' is amplified by z^{-2s} at the
        # endpoint; model g by a polynomial fit (pure g evaluations) on the
        # head interval and differentiate the model exactly there
        a, deg = 0.25, 10
        nodes = 0.5 * a * (1.0 - np.cos(np.pi * np.arange(2 * deg + 1) / (2 * deg)))
        V = np.vander(nodes, deg + 1, increasing=True)[:, 1:]  # g(0) = 0
        b, *_ = np.linalg.lstsq(V, np.array([g(z) for z in nodes]), rcond=None)

        def integrand_head(z):
            j = np.arange(1, deg + 1)
            gz = float(np.sum(b * z**j))
            dgz = float(np.sum(b * j * z ** (j - 1)))
            d2gz = float(np.sum(b[1:] * j[1:] * (j[1:] - 1) * z ** (j[1:] - 2)))
            theta = poisson_multiplier(p, root * z) if lam > 0 else 1.0
            div_term = z ** (1.0 - 2.0 * s) * d2gz + (1.0 - 2.0 * s) * z ** (-2.0 * s) * dgz
            return theta * (div_term - lam * z ** (1.0 - 2.0 * s) * gz)

        inner = quad(integrand_head, 0.0, a, epsabs=1e-12, epsrel=1e-12, limit=400, full_output=1)[0]
        outer = quad(integrand, a, z_inf, epsabs=1e-12, epsrel=1e-12, limit=400, full_output=1)[0]
    return abs(lhs - (inner + outer))
