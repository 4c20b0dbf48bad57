"""Two-sided verification of the exact pointwise identities.

Every verifier computes its left-hand side purely spectrally (no
z-quadrature) and its right-hand side as a Duhamel assembly of
Poisson-smoothed forcings, so the two routes share no code path beyond the
transforms; agreement is evidence, not circularity.  Reports carry sup and
L2 residuals, the effective tolerance (relative sup against the field
scale), and per-identity diagnostics in `metadata`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as _dc_field

import numpy as np

from .manifolds import (
    GridField,
    SpectralField,
    analyze,
    gradient,
    hessian_sq_norm,
    integrate as volume_integral,
    laplacian,
    pointwise_map,
    pointwise_product,
    ricci_quadratic,
    spectral_inner,
    synthesize,
)
from .operators import (
    frac_laplacian,
    hs_inner,
    slice_coeffs,
)
from .duhamel import assemble_rhs_split
from .special import FracParams
from .zquad import ZRulePair, build_rule_pair, integrate as z_integrate

__all__ = [
    "IdentityReport",
    "Nonlinearity",
    "default_tolerance",
    "rules_for",
    "gamma1",
    "defect_a",
    "defect_b",
    "verify_leibniz",
    "verify_bochner",
    "verify_gamma2",
    "verify_cordoba",
    "verify_sv",
    "verify_decay",
    "nonlin_square",
    "nonlin_quartic",
    "nonlin_cosh",
    "nonlin_abs_power",
]

# Default relative sup tolerances; sphere transforms and per-slice work
# accumulate more rounding than the flat bases.
_DEFAULT_TOL = {"circle": 1e-6, "torus": 1e-6, "sphere": 1e-4}
_SCALE_FLOOR = 1e-8


@dataclass
class IdentityReport:
    identity: str
    manifold: str
    s: float
    resolution: int
    z_nodes: int
    lhs: object
    rhs: object
    residual_sup: float
    residual_l2: float
    tolerance: float          # absolute: rel_tol * max(scale, floor)
    passed: bool
    metadata: dict = _dc_field(default_factory=dict)


@dataclass
class Nonlinearity:
    """Scalar nonlinearity phi with first and second derivatives.

    `convex` is caller-asserted and only gates the remainder-sign check.
    phi(0) = 0 matters on non-compact bases only; recorded informationally.
    """

    phi: object
    dphi: object
    d2phi: object
    convex: bool = False
    name: str = ""
    vanishes_at_zero: bool = True


def nonlin_square() -> Nonlinearity:
    return Nonlinearity(lambda t: t * t, lambda t: 2.0 * t, lambda t: 2.0 * np.ones_like(t),
                        convex=True, name="square")


def nonlin_quartic() -> Nonlinearity:
    return Nonlinearity(lambda t: t**4, lambda t: 4.0 * t**3, lambda t: 12.0 * t * t,
                        convex=True, name="quartic")


def nonlin_cosh() -> Nonlinearity:
    return Nonlinearity(np.cosh, np.sinh, np.cosh, convex=True, name="cosh",
                        vanishes_at_zero=False)


def nonlin_abs_power(q: float, eps: float = 0.0) -> Nonlinearity:
    """phi(t) = ((t^2 + eps^2)^{q/2} - eps^q)/q; smooth regularization of |t|^q / q."""
    if q <= 1.0:
        raise ValueError("q > 1 required")

    def phi(t):
        return ((t * t + eps * eps) ** (q / 2.0) - eps**q) / q

    def dphi(t):
        return t * (t * t + eps * eps) ** (q / 2.0 - 1.0)

    def d2phi(t):
        w = t * t + eps * eps
        return w ** (q / 2.0 - 1.0) + (q - 2.0) * t * t * w ** (q / 2.0 - 2.0)

    return Nonlinearity(phi, dphi, d2phi, convex=q >= 2.0, name=f"abs-power-{q}-eps{eps}")


def default_tolerance(man, identity: str = "") -> float:
    tol = _DEFAULT_TOL.get(man.kind, 1e-6)
    if identity == "gamma2":
        tol = max(tol, 1e-4)
    return tol


def rules_for(man, p: FracParams, tol: float = 1e-10, z_nodes: int | None = None) -> ZRulePair:
    """Quadrature rule pair matched to the manifold spectrum."""
    lam = man.eigenvalues()
    lam_pos = lam[lam > 0]
    return build_rule_pair(p, float(np.min(lam_pos)), tol,
                           lambda_max=float(np.max(lam)), z_nodes=z_nodes)


def _finish(identity, man, p, lhs_vals, rhs_vals, rel_tol, z_nodes, metadata=None) -> IdentityReport:
    diff = lhs_vals - rhs_vals
    scale = max(float(np.max(np.abs(lhs_vals))), float(np.max(np.abs(rhs_vals))))
    res_sup = float(np.max(np.abs(diff)))
    w = man.weights(1)
    res_l2 = float(np.sqrt(np.sum(w * diff**2)))
    tol_abs = rel_tol * max(scale, _SCALE_FLOOR)
    md = dict(metadata or {})
    md.setdefault("scale", scale)
    md.setdefault("rel_tol", rel_tol)
    return IdentityReport(
        identity=identity, manifold=man.kind, s=p.s, resolution=man.resolution,
        z_nodes=z_nodes, lhs=GridField(man, lhs_vals, 1), rhs=GridField(man, rhs_vals, 1),
        residual_sup=res_sup, residual_l2=res_l2, tolerance=tol_abs,
        passed=res_sup <= tol_abs, metadata=md,
    )


# -- first-order carre du champ -------------------------------------------------

def gamma1(u: SpectralField, v: SpectralField, p: FracParams) -> GridField:
    """Gamma_1(u, v) = (Lambda^s(uv) - u Lambda^s v - v Lambda^s u) / 2."""
    man = u.manifold
    s = p.s
    t1 = synthesize(frac_laplacian(analyze(pointwise_product(u, v)), s))
    t2 = pointwise_product(u, frac_laplacian(v, s))
    t3 = pointwise_product(v, frac_laplacian(u, s))
    return GridField(man, 0.5 * (t1.values - t2.values - t3.values), 1)


def _grad_dot(man, ca, cb, refine=2) -> np.ndarray:
    ga = man.gradient_values(ca, refine)
    gb = man.gradient_values(cb, refine)
    acc = ga[0] * gb[0]
    for a, b in zip(ga[1:], gb[1:]):
        acc = acc + a * b
    return acc


def verify_leibniz(u, v, p: FracParams, rules: ZRulePair | None = None,
                   rel_tol: float | None = None) -> IdentityReport:
    """Gamma_1(u,v) against beta_s int P_z(grad U . grad V + dU dV) z^{1-2s} dz."""
    man = u.manifold
    rules = rules or rules_for(man, p)
    rel_tol = rel_tol if rel_tol is not None else default_tolerance(man)
    lhs = gamma1(u, v, p)

    def g_grad(z):
        uz, _ = slice_coeffs(u, p, z)
        vz, _ = slice_coeffs(v, p, z)
        return GridField(man, _grad_dot(man, uz.coeffs, vz.coeffs), 2)

    def g_dz(z):
        _, du = slice_coeffs(u, p, z)
        _, dv = slice_coeffs(v, p, z)
        vals = man.synthesize_coeffs(du.coeffs, 2) * man.synthesize_coeffs(dv.coeffs, 2)
        return GridField(man, vals, 2)

    rhs = assemble_rhs_split([(g_grad, rules.grad), (g_dz, rules.dz)], p)
    return _finish("leibniz", man, p, lhs.values, rhs.values, rel_tol,
                   len(rules.grad.nodes),
                   {"tail_error_estimate": rules.grad.est_tail_error})


# -- Bochner defects --------------------------------------------------------------

def defect_a(u: SpectralField, p: FracParams) -> GridField:
    """A(u) = (Delta Gamma_1(u) - 2 Gamma_1(u, Delta u)) / 2."""
    man = u.manifold
    g1 = analyze(gamma1(u, u, p))
    lap_g1 = synthesize(laplacian(g1))
    cross = gamma1(u, laplacian(u), p)
    return GridField(man, 0.5 * lap_g1.values - cross.values, 1)


def defect_b(u: SpectralField, p: FracParams) -> GridField:
    """B(u) = Lambda^s(|grad u|^2)/2 - grad u . grad Lambda^s u."""
    man = u.manifold
    energy = man.analyze_values(_grad_dot(man, u.coeffs, u.coeffs), 2)
    t1 = man.synthesize_coeffs(frac_laplacian(SpectralField(man, energy), p.s).coeffs, 1)
    t2 = man.analyze_values(_grad_dot(man, u.coeffs, frac_laplacian(u, p.s).coeffs), 2)
    t2 = man.synthesize_coeffs(t2, 1)
    return GridField(man, 0.5 * t1 - t2, 1)


def verify_bochner(u, p: FracParams, rules: ZRulePair | None = None,
                   rel_tol: float | None = None, include_ricci: bool = True) -> IdentityReport:
    """A(u) and B(u) against beta_s int P_z(|Hess U|^2 + |grad dU|^2 + Ric(grad U)) z^{1-2s} dz.

    Three residuals are asserted at once (A vs RHS, B vs RHS, A vs B);
    `include_ricci=False` drops the curvature forcing, which must break the
    identity on the sphere (ablation check).
    """
    man = u.manifold
    rules = rules or rules_for(man, p)
    rel_tol = rel_tol if rel_tol is not None else default_tolerance(man)
    a_vals = defect_a(u, p).values
    b_vals = defect_b(u, p).values
    mass_grad, mass_dz = [], []  # per-node L1(M) masses, in node order

    def g_grad(z):
        uz, _ = slice_coeffs(u, p, z)
        hess = man.hessian_sq_values(uz.coeffs, 2)
        if include_ricci:
            grads = tuple(GridField(man, gv, 2) for gv in man.gradient_values(uz.coeffs, 2))
            hess = hess + ricci_quadratic(grads).values
        mass_grad.append(float(np.sum(np.abs(hess) * man.weights(2))))
        return GridField(man, hess, 2)

    def g_dz(z):
        _, du = slice_coeffs(u, p, z)
        gs = man.gradient_values(du.coeffs, 2)
        acc = gs[0] * gs[0]
        for c in gs[1:]:
            acc = acc + c * c
        mass_dz.append(float(np.sum(acc * man.weights(2))))
        return GridField(man, acc, 2)

    rhs = assemble_rhs_split([(g_grad, rules.grad), (g_dz, rules.dz)], p)
    l1_grad = float(np.dot(rules.grad.weights, mass_grad))
    l1_dz = float(np.dot(rules.dz.weights, mass_dz))
    res_a = float(np.max(np.abs(a_vals - rhs.values)))
    res_b = float(np.max(np.abs(b_vals - rhs.values)))
    res_ab = float(np.max(np.abs(a_vals - b_vals)))
    md = {
        "residual_a_sup": res_a,
        "residual_b_sup": res_b,
        "residual_ab_sup": res_ab,
        "ricci_included": include_ricci,
        # evidence for the integrability hypothesis: weighted L1 masses of
        # the two forcing families over the strip
        "integrand_l1_grad": l1_grad,
        "integrand_l1_dz": l1_dz,
        "tail_error_estimate": rules.grad.est_tail_error,
    }
    rep = _finish("bochner", man, p, a_vals, rhs.values, rel_tol,
                  len(rules.grad.nodes), md)
    rep.residual_sup = max(res_a, res_b, res_ab)
    rep.passed = rep.residual_sup <= rep.tolerance
    rep.metadata["defect_b"] = GridField(man, b_vals, 1)
    return rep


def verify_gamma2(u, p: FracParams, rules: ZRulePair | None = None,
                  rel_tol: float | None = None) -> IdentityReport:
    """Gamma_2(u) against beta_s int P_z(B(U(., z)) + Gamma_1(dU(., z))) z^{1-2s} dz."""
    man = u.manifold
    rules = rules or rules_for(man, p)
    rel_tol = rel_tol if rel_tol is not None else default_tolerance(man, "gamma2")
    g1 = analyze(gamma1(u, u, p))
    lhs = 0.5 * synthesize(frac_laplacian(g1, p.s)).values - gamma1(u, frac_laplacian(u, p.s), p).values

    def g_grad(z):
        uz, _ = slice_coeffs(u, p, z)
        return defect_b(uz, p)

    def g_dz(z):
        _, du = slice_coeffs(u, p, z)
        return gamma1(du, du, p)

    rhs = assemble_rhs_split([(g_grad, rules.grad), (g_dz, rules.dz)], p)
    return _finish("gamma2", man, p, lhs, rhs.values, rel_tol, len(rules.grad.nodes),
                   {"tail_error_estimate": rules.grad.est_tail_error})


# -- Cordoba-Cordoba remainder -----------------------------------------------------

def _composition_tail(man, coeffs) -> float:
    """Crude truncation indicator: coefficient mass in the top quarter of modes."""
    mag = np.abs(coeffs)
    total = float(np.max(mag)) or 1.0
    if man.kind == "circle":
        tail = float(np.max(mag[-max(1, len(mag) // 4):]))
    elif man.kind == "torus":
        N = man.resolution
        k = max(1, N // 4)
        tail = float(max(np.max(mag[:, -k:]), np.max(mag[:k, :]), np.max(mag[-k:, :])))
    else:
        tail = float(np.max(mag[-max(1, mag.shape[0] // 4):, :]))
    return tail / total


def verify_cordoba(u, nl: Nonlinearity, p: FracParams, rules: ZRulePair | None = None,
                   rel_tol: float | None = None) -> IdentityReport:
    """Lambda^s(phi(u)) - phi'(u) Lambda^s u against the extension remainder.

    Compositions are evaluated on the 4x dealiasing grid then truncated; the
    reported `composition_tail` bounds the induced truncation error.
    """
    man = u.manifold
    rules = rules or rules_for(man, p)
    rel_tol = rel_tol if rel_tol is not None else default_tolerance(man)
    phi_u = analyze(pointwise_map(nl.phi, u, 4))
    t1 = synthesize(frac_laplacian(phi_u, p.s)).values
    lam_u4 = man.synthesize_coeffs(frac_laplacian(u, p.s).coeffs, 4)
    u4 = man.synthesize_coeffs(u.coeffs, 4)
    t2c = man.analyze_values(nl.dphi(u4) * lam_u4, 4)
    t2 = man.synthesize_coeffs(t2c, 1)
    lhs = t1 - t2

    def g_grad(z):
        uz, _ = slice_coeffs(u, p, z)
        u_vals = man.synthesize_coeffs(uz.coeffs, 4)
        gs = man.gradient_values(uz.coeffs, 4)
        acc = gs[0] * gs[0]
        for c in gs[1:]:
            acc = acc + c * c
        return GridField(man, nl.d2phi(u_vals) * acc, 4)

    def g_dz(z):
        uz, du = slice_coeffs(u, p, z)
        u_vals = man.synthesize_coeffs(uz.coeffs, 4)
        dv = man.synthesize_coeffs(du.coeffs, 4)
        return GridField(man, nl.d2phi(u_vals) * dv * dv, 4)

    rhs = assemble_rhs_split([(g_grad, rules.grad), (g_dz, rules.dz)], p)
    md = {
        "nonlinearity": nl.name,
        "convex": nl.convex,
        "composition_tail": _composition_tail(man, phi_u.coeffs),
        "min_remainder": float(np.min(lhs)),
        "tail_error_estimate": rules.grad.est_tail_error,
    }
    return _finish("cordoba", man, p, lhs, rhs.values, rel_tol, len(rules.grad.nodes), md)


# -- Stroock-Varopoulos -------------------------------------------------------------

def _lift_circle(u: SpectralField, resolution: int) -> SpectralField:
    from .manifolds import Circle

    man = Circle(resolution)
    coeffs = man.zero_coeffs()
    coeffs[: len(u.coeffs)] = u.coeffs
    return SpectralField(man, coeffs)


def _richardson(values, eps_ladder, exponents):
    """Solve values_j = L + sum_k c_k eps_j^{e_k} for L (fields or scalars)."""
    m = len(eps_ladder)
    A = np.ones((m, m))
    for k, e in enumerate(exponents[: m - 1]):
        A[:, k + 1] = np.asarray(eps_ladder) ** e
    coef = np.linalg.solve(A, np.eye(m))[0]  # row extracting L
    out = coef[0] * values[0]
    for c, v in zip(coef[1:], values[1:]):
        out = out + c * v
    return out


def verify_sv(u, q: float, p: FracParams, rules: ZRulePair | None = None,
              rel_tol: float | None = None, eps_ladder=(0.1, 0.05, 0.025),
              lift_resolution: int = 2048, eps_check: bool = True) -> IdentityReport:
    """Pointwise Stroock-Varopoulos identity plus the integral inequality.

    (1/q) Lambda^s |u|^q - |u|^{q-2} u Lambda^s u
        = (4(q-1)/q^2) beta_s int P_z(|grad~ |U|^{q/2}|^2) z^{1-2s} dz.

    For u bounded away from zero (or q an even integer) both sides are
    smooth and computed at the native cutoff.  Otherwise the computation is
    lifted to a fine cutoff where the kinked quantities |u|^q and
    |U|^{q-2} |grad~ U|^2 are resolved; the eps-regularized family
    phi_eps(t) = ((t^2+eps^2)^{q/2} - eps^q)/q is additionally verified at
    each eps of the ladder (each is an exact smooth identity) and
    Richardson-extrapolated on the {2, q} exponent ladder as supporting
    evidence (the extrapolation converges pointwise away from the zero set;
    see metadata).
    """
    if q <= 1.0:
        raise ValueError("q > 1 required")
    man = u.manifold
    rel_tol = rel_tol if rel_tol is not None else default_tolerance(man)
    vals_u = man.synthesize_coeffs(u.coeffs, 4)
    positive = float(np.min(np.abs(vals_u))) > 0.1 * float(np.max(np.abs(vals_u)))
    even_integer = abs(q - round(q)) < 1e-12 and int(round(q)) % 2 == 0
    smooth = positive or even_integer

    if not smooth:
        if man.kind != "circle":
            raise NotImplementedError("the kinked-|u| route is circle-only")
        work = _lift_circle(u, max(man.resolution, lift_resolution))
        rules = rules_for(work.manifold, p)  # spectrum changed with the lift
    else:
        work = u
    wman = work.manifold
    rules = rules or rules_for(wman, p)

    # direct |u|-based left-hand side
    w4 = wman.synthesize_coeffs(work.coeffs, 4)
    absq = wman.analyze_values(np.abs(w4) ** q, 4)
    t1 = wman.synthesize_coeffs(frac_laplacian(SpectralField(wman, absq), p.s).coeffs, 1) / q
    lam_u = wman.synthesize_coeffs(frac_laplacian(work, p.s).coeffs, 1)
    u1 = wman.synthesize_coeffs(work.coeffs, 1)
    lhs = t1 - np.abs(u1) ** (q - 2.0) * u1 * lam_u

    def rhs_for(eps):
        nl = nonlin_abs_power(q, eps)

        def g_grad(z):
            uz, _ = slice_coeffs(work, p, z)
            uvals = wman.synthesize_coeffs(uz.coeffs, 2)
            gs = wman.gradient_values(uz.coeffs, 2)
            acc = gs[0] * gs[0]
            for c in gs[1:]:
                acc = acc + c * c
            return GridField(wman, nl.d2phi(uvals) * acc, 2)

        def g_dz(z):
            uz, du = slice_coeffs(work, p, z)
            uvals = wman.synthesize_coeffs(uz.coeffs, 2)
            dv = wman.synthesize_coeffs(du.coeffs, 2)
            return GridField(wman, nl.d2phi(uvals) * dv * dv, 2)

        return assemble_rhs_split([(g_grad, rules.grad), (g_dz, rules.dz)], p).values

    md = {"q": q, "route": "smooth-direct" if smooth else "lifted-direct"}
    rhs = rhs_for(0.0)
    if not smooth and eps_check:
        # regularized family: each phi_eps identity is exact and smooth; the
        # extrapolation to eps = 0 converges away from the moving eps-layer
        # at the zero set of u (reported, not asserted in sup norm)
        fields = []
        eps_resid = []
        for e in eps_ladder:
            nl = nonlin_abs_power(q, e)
            r_eps = rhs_for(e)
            phi_u = wman.analyze_values(nl.phi(w4), 4)
            lhs_eps = (wman.synthesize_coeffs(frac_laplacian(SpectralField(wman, phi_u), p.s).coeffs, 1)
                       - wman.synthesize_coeffs(wman.analyze_values(nl.dphi(w4) * wman.synthesize_coeffs(
                           frac_laplacian(work, p.s).coeffs, 4), 4), 1))
            eps_resid.append(float(np.max(np.abs(lhs_eps - r_eps))))
            fields.append(r_eps)
        extrap = _richardson(fields, eps_ladder, (2.0, float(q)))
        away = np.abs(u1) >= 0.1 * float(np.max(np.abs(u1)))
        md["eps_ladder"] = list(eps_ladder)
        md["eps_identity_residuals"] = eps_resid
        md["eps_extrap_sup"] = float(np.max(np.abs(extrap - lhs)))
        md["eps_extrap_sup_away_from_zeros"] = float(np.max(np.abs((extrap - lhs)[away])))

    # integral inequality: int (|u|^{q-2} u)(-Delta)^s u >= (4(q-1)/q^2) ||(-D)^{s/2}|u|^{q/2}||^2
    signed_pow = np.abs(w4) ** (q - 2.0) * w4
    minus_lam4 = -wman.synthesize_coeffs(frac_laplacian(work, p.s).coeffs, 4)
    lhs_int = float(np.sum(wman.weights(4) * signed_pow * minus_lam4))
    half_pow = SpectralField(wman, wman.analyze_values(np.abs(w4) ** (q / 2.0), 4))
    rhs_int = 4.0 * (q - 1.0) / (q * q) * hs_inner(half_pow, half_pow, p.s)
    md["integral_lhs"] = lhs_int
    md["integral_rhs"] = rhs_int
    md["integral_slack"] = lhs_int - rhs_int
    md["tail_error_estimate"] = rules.grad.est_tail_error

    return _finish("sv", wman, p, lhs, rhs, rel_tol, len(rules.grad.nodes), md)


# -- decay properties ----------------------------------------------------------------

def verify_decay(u, p: FracParams, rules: ZRulePair | None = None,
                 z_grid=None) -> IdentityReport:
    """Decay bounds for the extension along a log z-grid.

    Checks z ||dU/dz||_p / ||u||_p <= C_s = 4 s^s e^{-s} / Gamma(s) for
    p in {1, 2, inf}, the gradient contraction ||grad U||_2 <= ||grad u||_2,
    z ||d_z grad U||_2 / ||grad u||_2 <= C_s, and that the ratios are
    non-increasing for large z.  Also reports the weighted L1 mass of
    z^{1-2s} |grad dU/dz|^2 over the strip (integrability evidence).
    """
    from .special import gamma as _gamma

    man = u.manifold
    if z_grid is None:
        z_grid = np.geomspace(0.01, 20.0, 40)
    c_s = 4.0 * p.s**p.s * math.exp(-p.s) / _gamma(p.s)
    w1 = man.weights(1)
    uvals = man.synthesize_coeffs(u.coeffs, 1)
    norms_u = {
        1: float(np.sum(w1 * np.abs(uvals))),
        2: float(np.sqrt(np.sum(w1 * uvals**2))),
        np.inf: float(np.max(np.abs(uvals))),
    }
    lam = man.eigenvalues()
    grad_u = math.sqrt(max(spectral_inner(u, u, weight=lam), 0.0))
    ratios = {1: [], 2: [], np.inf: []}
    grad_ratio = []
    dz_grad_ratio = []
    for z in z_grid:
        uz, du = slice_coeffs(u, p, z)
        dvals = man.synthesize_coeffs(du.coeffs, 1)
        ratios[1].append(z * float(np.sum(w1 * np.abs(dvals))) / norms_u[1])
        ratios[2].append(z * float(np.sqrt(np.sum(w1 * dvals**2))) / norms_u[2])
        ratios[np.inf].append(z * float(np.max(np.abs(dvals))) / norms_u[np.inf])
        if grad_u > 0:
            grad_ratio.append(math.sqrt(max(spectral_inner(uz, uz, weight=lam), 0.0)) / grad_u)
            dz_grad_ratio.append(z * math.sqrt(max(spectral_inner(du, du, weight=lam), 0.0)) / grad_u)
    sup_ratios = {str(k): float(np.max(v)) if len(v) else 0.0 for k, v in ratios.items()}
    md = {
        "c_s_bound": c_s,
        "sup_ratio_p": sup_ratios,
        "sup_grad_ratio": float(np.max(grad_ratio)) if grad_ratio else 0.0,
        "sup_dz_grad_ratio": float(np.max(dz_grad_ratio)) if dz_grad_ratio else 0.0,
        "z_grid": np.asarray(z_grid),
    }
    # monotone tail: ratios non-increasing over the last half of the grid
    tail_ok = True
    for k, v in ratios.items():
        arr = np.asarray(v)
        half = arr[len(arr) // 2:]
        if np.any(np.diff(half) > 1e-12 * max(1.0, float(np.max(arr)))):
            tail_ok = False
    md["tail_nonincreasing"] = tail_ok

    if rules is not None:
        def dz_grad_mass(z):
            _, du = slice_coeffs(u, p, z)
            return spectral_inner(du, du, weight=lam)

        md["l1_dz_grad"] = z_integrate(rules.dz, [dz_grad_mass(z) for z in rules.dz.nodes])

    excess = max(
        max(sup_ratios.values()) - c_s,
        md["sup_grad_ratio"] - 1.0,
        md["sup_dz_grad_ratio"] - c_s,
        0.0 if tail_ok else 1.0,
    )
    tol_abs = 1e-9 * max(c_s, 1.0)
    return IdentityReport(
        identity="decay", manifold=man.kind, s=p.s, resolution=man.resolution,
        z_nodes=len(z_grid), lhs=max(sup_ratios.values()), rhs=c_s,
        residual_sup=max(excess, 0.0), residual_l2=max(excess, 0.0),
        tolerance=tol_abs, passed=excess <= tol_abs, metadata=md,
    )
