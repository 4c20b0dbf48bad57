"""Quadrature over z in (0, inf) for integrals with the weight z^{1-2s}.

A rule approximates int_0^inf z^{1-2s} f(z) dz = sum_i w_i f(z_i).  The head
segment [0, z_split] uses Gauss-Jacobi nodes after the substitution z = y^2,
which keeps the rule exact for z^{1-2s} times polynomials and tames the
multiplier's z^{2s}-correction ladder; the tail uses composite Gauss on
geometrically growing panels up to a truncation height set by the slowest
exponential decay exp(-z sqrt(lambda_1)).

Two exactness classes are provided and selected by the verifiers from the
endpoint behavior of the integrand:

  cls="grad": f smooth near 0 (horizontal-gradient forcings),
  cls="dz":   f ~ z^{4s-2} x smooth (products of two dz-derivatives, whose
              weighted integrand behaves like z^{2s-1}).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import roots_jacobi, roots_legendre

from .special import FracParams

__all__ = ["ZRule", "ZRulePair", "build_rule", "build_rule_pair", "integrate"]


@dataclass
class ZRule:
    s: float
    cls: str
    nodes: np.ndarray          # strictly increasing, in (0, z_max)
    weights: np.ndarray        # positive, incorporate the z^{1-2s} measure
    z_split: float
    z_max: float
    est_tail_error: float

    def plain_weights(self) -> np.ndarray:
        """Weights for int_0^inf f(z) dz (measure dz, no weight)."""
        return self.weights * self.nodes ** (2.0 * self.s - 1.0)


@dataclass
class ZRulePair:
    grad: ZRule
    dz: ZRule


def _tail_panels(s: float, z_split: float, z_max: float, panel_nodes: int):
    xg, wg = roots_legendre(panel_nodes)
    zs, ws = [], []
    a = z_split
    while a < z_max:
        b = min(2.0 * a, z_max)
        zm = 0.5 * (a + b) + 0.5 * (b - a) * xg
        zs.append(zm)
        ws.append(0.5 * (b - a) * wg * zm ** (1.0 - 2.0 * s))
        a = b
    return np.concatenate(zs), np.concatenate(ws)


def build_rule(
    p: FracParams,
    lambda_min_nonzero: float,
    tol: float = 1e-10,
    *,
    cls: str = "grad",
    head_nodes: int = 48,
    panel_nodes: int = 12,
    z_split: float | None = None,
    lambda_max: float | None = None,
) -> ZRule:
    """Build a weighted rule; see the module docstring for the two classes."""
    if not (1e-14 < tol < 1e-2):
        raise ValueError("tol must lie in (1e-14, 1e-2)")
    if lambda_min_nonzero <= 0:
        raise ValueError("lambda_min_nonzero must be positive")
    if cls not in ("grad", "dz"):
        raise ValueError(f"unknown integrand class {cls!r}")
    s = p.s
    if z_split is None:
        # keep the head short enough that the fastest mode is still
        # polynomial-resolvable there
        z_split = 0.3 if lambda_max is None else min(0.3, 12.0 / math.sqrt(max(lambda_max, 1.0)))
    Y = math.sqrt(z_split)
    # head in y = sqrt(z): z^{1-2s} dz = 2 y^{3-4s} dy
    if cls == "grad":
        alpha = 3.0 - 4.0 * s   # Jacobi weight y^alpha; f smooth in exactness class
        shift = 0.0
    else:
        alpha = 4.0 * s - 1.0   # class f ~ y^{8s-4} x smooth; weights absorb y^{4-8s}
        shift = 4.0 - 8.0 * s
    xj, wj = roots_jacobi(head_nodes, 0.0, alpha)
    y = Y * 0.5 * (xj + 1.0)
    wy = (0.5 * Y) ** (alpha + 1.0) * wj
    z_head = y * y
    w_head = 2.0 * wy * y**shift

    root_lam = math.sqrt(lambda_min_nonzero)
    z_max = math.log(1.0 / tol) / root_lam + 2.0
    z_tail, w_tail = _tail_panels(s, z_split, z_max, panel_nodes)

    # truncation estimate for forcings decaying like exp(-z sqrt(lambda_1))
    est = z_max ** (1.0 - 2.0 * s) * math.exp(-root_lam * z_max) / root_lam
    nodes = np.concatenate([z_head, z_tail])
    weights = np.concatenate([w_head, w_tail])
    return ZRule(s=s, cls=cls, nodes=nodes, weights=weights,
                 z_split=z_split, z_max=z_max, est_tail_error=est)


def build_rule_pair(
    p: FracParams,
    lambda_min_nonzero: float,
    tol: float = 1e-10,
    *,
    lambda_max: float | None = None,
    z_nodes: int | None = None,
) -> ZRulePair:
    """Matched grad/dz rules; `z_nodes` scales the per-rule node budget."""
    head, panel = 48, 12
    if z_nodes is not None:
        head = max(3, int(round(0.4 * z_nodes)))
        span = math.log(1.0 / tol) / math.sqrt(lambda_min_nonzero) + 2.0
        z_split = 0.3 if lambda_max is None else min(0.3, 12.0 / math.sqrt(max(lambda_max, 1.0)))
        n_panels = max(1, math.ceil(math.log2(span / z_split)))
        panel = max(2, int(round(0.6 * z_nodes / n_panels)))
    kw = dict(tol=tol, head_nodes=head, panel_nodes=panel, lambda_max=lambda_max)
    grad = build_rule(p, lambda_min_nonzero, cls="grad", **kw)
    if p.s >= 0.5:
        # the dz-class integrand vanishes at z = 0 (exponent 4s-2 >= 0) and
        # lies inside or near the grad rule's exactness class; sharing nodes
        # also makes the two rules agree identically on smooth integrands
        dz = grad
    else:
        kw2 = dict(kw, head_nodes=2 * head)
        dz = build_rule(p, lambda_min_nonzero, cls="dz", **kw2)
    return ZRulePair(grad=grad, dz=dz)


def integrate(rule: ZRule, samples) -> float:
    """Weighted sum approximating int_0^inf z^{1-2s} f(z) dz; linear in samples."""
    samples = np.asarray(samples, dtype=float)
    if samples.shape != rule.nodes.shape:
        raise ValueError("sample count does not match rule nodes")
    return float(np.dot(rule.weights, samples))
