"""Transforms of the first observed threshold crossing.

Write ``A_n`` for the accumulated mark at the n-th inspection, ``nu`` for
the first n with ``A_n > M``, ``tau_pre = tau_{nu-1}`` and
``tau_cross = tau_nu`` for the straddling inspection epochs.  The joint
functionals computed here are Laplace transforms in the running time t of

    G1(t) = E[u^{A_{nu-1}} v^{A_nu} e^{-w tau_pre - x gap} y^{A(t)}; t < tau_pre]
    G2(t) = E[  same weight                                   ; tau_pre <= t < tau_cross]

and their sum G (window t < tau_cross).  Each transform is a partial
coefficient sum, at order M, of an explicit function of the level-tagging
variable s built from three resolvent blocks (B1, B2, B3) and two
difference blocks (Gamma0, Gamma).

Two evaluation paths produce the s-coefficients:

* an exact rational-series path when marks are geometric and gaps are
  exponential (every factor is ``(1 - F s)``-type, so truncated series
  arithmetic is exact);
* a sampling path for general laws: the integrand is evaluated on a
  circle well inside the unit disk (where per-epoch contraction always
  holds) and coefficients are read off by FFT.  All removable
  singularities are crossed via divided differences, never raw division.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DivergenceError, DomainError
from .model import (
    DegenerateZero,
    Exponential,
    Geometric,
    ProcessModel,
    TransformArgs,
    delay_lst,
    mark_pgf,
)
from .series import TruncatedSeries, d_inverse, series_from_rational
from .transforms import (
    SINGULARITY_TOL,
    gamma_is_contractive,
    lst_divided_diff,
    resolvent_divided_diff,
)

__all__ = [
    "BlockValues",
    "blocks_at",
    "g1_star",
    "g2_star",
    "g_star",
    "lst_tau_pre",
    "lst_tau_cross",
]

# Fall back to the sampling path when an exact-path pole factor would
# amplify truncated-series cancellation beyond ~1e-6 of headroom.
_ROOT_AMPLIFICATION_CAP = 1e6


# ---------------------------------------------------------------------------
# pointwise block evaluation


@dataclass(frozen=True)
class BlockValues:
    """The five building blocks of the crossing transforms at one point s.

    ``b1`` alone has a genuine pole where its denominator
    ``theta + lam(g(uvs) - g(uvys))`` vanishes (reported as inf); the
    crossing functionals stay finite only through the product
    ``b1 * (b2 - b3)``, which :func:`g1_star` evaluates jointly.
    """

    b1: complex
    b2: complex
    b3: complex
    gamma0: complex
    gamma: complex


def _gamma_rec(model: ProcessModel, z: complex, damp: complex) -> complex:
    return delay_lst(model.observation.recurring, damp + model.rate * (1.0 - mark_pgf(model.marks, z)))


def blocks_at(model: ProcessModel, args: TransformArgs, s: complex) -> BlockValues:
    """Evaluate all five blocks at an explicit point s.

    Requires per-epoch contraction at the tagged arguments ``(uvs, w)``
    and ``(uvys, theta + w)``; otherwise the geometric resolvents inside
    b2/b3 diverge and :class:`DivergenceError` is raised.
    """
    args.validate()
    lam = model.rate
    g = lambda z: mark_pgf(model.marks, z)
    s = complex(s)
    u, v, w, x, y, theta = (complex(args.u), complex(args.v), complex(args.w),
                            complex(args.x), complex(args.y), complex(args.theta))
    uvs, uvys = u * v * s, u * v * y * s
    if not gamma_is_contractive(model, uvs, w):
        raise DivergenceError("per-epoch transform at (u*v*s, w) is not contractive")
    if not gamma_is_contractive(model, uvys, theta + w):
        raise DivergenceError("per-epoch transform at (u*v*y*s, theta + w) is not contractive")

    obs = model.observation
    eta2 = w + lam * (1.0 - g(uvs))
    eta3 = theta + w + lam * (1.0 - g(uvys))
    b2 = delay_lst(obs.initial, eta2) / (1.0 - delay_lst(obs.recurring, eta2))
    b3 = delay_lst(obs.initial, eta3) / (1.0 - delay_lst(obs.recurring, eta3))

    denom = theta + lam * (g(uvs) - g(uvys))
    numer = _gamma_rec(model, v, x) - _gamma_rec(model, v * s, x)
    if abs(denom) >= SINGULARITY_TOL:
        b1 = numer / denom
    else:
        b1 = complex(math.inf) if abs(numer) >= SINGULARITY_TOL else complex(0.0)

    zeta1 = x + lam * (1.0 - g(v))
    d1 = theta + lam * (g(v) - g(v * y))
    zeta2 = x + lam * (1.0 - g(v * s))
    d2 = theta + lam * (g(v * s) - g(v * y * s))
    gamma0 = lst_divided_diff(obs.initial, zeta1, d1) - lst_divided_diff(obs.initial, zeta2, d2)
    gamma_ = lst_divided_diff(obs.recurring, zeta1, d1) - lst_divided_diff(obs.recurring, zeta2, d2)
    return BlockValues(b1=b1, b2=b2, b3=b3, gamma0=gamma0, gamma=gamma_)


def _g1_integrand(model: ProcessModel, args: TransformArgs, s: complex) -> complex:
    """b1 * (b2 - b3) with the removable pole crossed as a divided difference."""
    lam = model.rate
    g = lambda z: mark_pgf(model.marks, z)
    u, v, y = complex(args.u), complex(args.v), complex(args.y)
    w, x, theta = complex(args.w), complex(args.x), complex(args.theta)
    uvs = u * v * complex(s)
    eta2 = w + lam * (1.0 - g(uvs))
    d = theta + lam * (g(uvs) - g(uvs * y))
    numer = _gamma_rec(model, v, x) - _gamma_rec(model, v * complex(s), x)
    return numer * resolvent_divided_diff(model, eta2, d)


def _g2_integrand(model: ProcessModel, args: TransformArgs, s: complex) -> complex:
    """gamma0 + gamma * b3, all parts finite through coincident arguments."""
    lam = model.rate
    g = lambda z: mark_pgf(model.marks, z)
    obs = model.observation
    u, v, y = complex(args.u), complex(args.v), complex(args.y)
    w, x, theta = complex(args.w), complex(args.x), complex(args.theta)
    s = complex(s)

    zeta1 = x + lam * (1.0 - g(v))
    d1 = theta + lam * (g(v) - g(v * y))
    zeta2 = x + lam * (1.0 - g(v * s))
    d2 = theta + lam * (g(v * s) - g(v * y * s))
    gamma0 = lst_divided_diff(obs.initial, zeta1, d1) - lst_divided_diff(obs.initial, zeta2, d2)
    gamma_ = lst_divided_diff(obs.recurring, zeta1, d1) - lst_divided_diff(obs.recurring, zeta2, d2)

    eta3 = theta + w + lam * (1.0 - g(u * v * y * s))
    b3 = delay_lst(obs.initial, eta3) / (1.0 - delay_lst(obs.recurring, eta3))
    return gamma0 + gamma_ * b3


# ---------------------------------------------------------------------------
# coefficient extraction: sampling path


def _coeffs_by_sampling(f: Callable[[complex], complex], order: int) -> TruncatedSeries:
    """Taylor coefficients 0..order of f via FFT on a circle inside the unit disk.

    The radius is 0.5 for small orders and drifts toward 1 for large ones
    (coefficient j is divided by radius**j, so a too-small radius would
    amplify sampling noise).  The node count is kept well above the
    requested order so aliasing from truncation is negligible.
    """
    rho = 0.5 if order <= 32 else 2.0 ** (-32.0 / order)
    n = 1
    while n < max(4 * (order + 1), 128):
        n <<= 1
    nodes = rho * np.exp(2j * np.pi * np.arange(n) / n)
    vals = np.array([f(s) for s in nodes], dtype=complex)
    # forward transform: sum_j f(rho w^j) w^{-jk} = n * c_k * rho^k
    coeffs = np.fft.fft(vals)[: order + 1] / (n * rho ** np.arange(order + 1))
    return TruncatedSeries(coeffs)


# ---------------------------------------------------------------------------
# coefficient extraction: exact rational path (geometric marks, exponential gaps)


def _exact_path_applicable(model: ProcessModel) -> bool:
    return (
        isinstance(model.marks, Geometric)
        and isinstance(model.observation.recurring, Exponential)
        and isinstance(model.observation.initial, (DegenerateZero, Exponential))
    )


def _pole_factor(model: ProcessModel, q: complex, zpre: complex) -> complex:
    """F with gamma(zpre*s, q) = const * (1 - b*zpre*s) / (1 - F s) for exp gaps."""
    lam, b = model.rate, model.marks.b
    return zpre * (b * q + lam) / (q + lam)


def _pole_pair(model: ProcessModel, theta: complex, zpre: complex, y: complex):
    """Roots (r1, r2) with theta*(1-r1 s)(1-r2 s) equal to the block denominator

    theta*(1 - b*zpre*s)(1 - b*zpre*y*s) + lam*a*zpre*(1-y)*s.  Requires
    theta != 0.
    """
    lam = model.rate
    a, b = model.marks.a, model.marks.b
    alpha = -b * zpre * (1.0 + y) + lam * a * zpre * (1.0 - y) / theta
    beta = b * b * zpre * zpre * y
    sq = cmath.sqrt(alpha * alpha - 4.0 * beta)
    r1 = (-alpha + sq) / 2.0 if abs(-alpha + sq) >= abs(-alpha - sq) else (-alpha - sq) / 2.0
    r2 = beta / r1 if abs(r1) > 0.0 else 0.0 + 0.0j
    return r1, r2


def _roots_tame(roots, order: int) -> bool:
    worst = max((abs(r) for r in roots), default=0.0)
    return worst ** max(order, 1) <= _ROOT_AMPLIFICATION_CAP


def _resolvent_series(model: ProcessModel, zpre: complex, damp: complex, order: int) -> TruncatedSeries:
    """Series of gamma0(zpre*s, damp) / (1 - gamma(zpre*s, damp))."""
    lam, b = model.rate, model.marks.b
    mu = model.observation.recurring.rate
    scale = (mu + damp + lam) / (damp + lam)
    numer = np.array([1.0, -_pole_factor(model, mu + damp, zpre)], dtype=complex)
    roots = [_pole_factor(model, damp, zpre)]
    initial = model.observation.initial
    if isinstance(initial, Exponential):
        rho = initial.rate
        scale *= rho / (rho + damp + lam)
        numer = np.convolve(numer, np.array([1.0, -b * zpre], dtype=complex))
        roots.append(_pole_factor(model, rho + damp, zpre))
    return series_from_rational(scale * numer, roots, order)


class _ExactPathUnavailable(Exception):
    """Internal: this argument combination needs the sampling path."""


def _series_g1_exact(model: ProcessModel, args: TransformArgs, order: int) -> TruncatedSeries:
    lam, a, b = model.rate, model.marks.a, model.marks.b
    mu = model.observation.recurring.rate
    u, v, y = complex(args.u), complex(args.v), complex(args.y)
    w, x, theta = complex(args.w), complex(args.x), complex(args.theta)
    if abs(theta) < 1e-6:
        raise _ExactPathUnavailable
    uv = u * v
    r1, r2 = _pole_pair(model, theta, uv, y)
    if not _roots_tame([r1, r2, _pole_factor(model, mu + x, v)], order):
        raise _ExactPathUnavailable

    # (gamma(v, x) - gamma(v*s, x)) as P(s) / (1 - F(mu+x, v) s)
    c0 = _gamma_rec(model, v, x)
    f_mx = _pole_factor(model, mu + x, v)
    scale_vx = mu / (mu + x + lam)
    p1 = np.array([c0 - scale_vx, -c0 * f_mx + scale_vx * b * v], dtype=complex)

    numer = np.convolve(p1, np.convolve(np.array([1.0, -b * uv]), np.array([1.0, -b * uv * y])))
    b1 = series_from_rational(numer / theta, [f_mx, r1, r2], order)
    b2 = _resolvent_series(model, uv, w, order)
    b3 = _resolvent_series(model, uv * y, theta + w, order)
    return b1 * (b2 - b3)


def _gamma_diff_series(
    model: ProcessModel, m_rate: complex, args: TransformArgs, r1: complex, r2: complex, order: int
) -> TruncatedSeries:
    """Series of [gamma(v s, x) - gamma(v y s, theta + x)] / D(s) for an
    exponential gap law of rate ``m_rate``, D from the (v, vy) pole pair."""
    lam, b = model.rate, model.marks.b
    v, y = complex(args.v), complex(args.y)
    x, theta = complex(args.x), complex(args.theta)
    f_mx = _pole_factor(model, m_rate + x, v)
    f_mtx = _pole_factor(model, m_rate + theta + x, v * y)
    s1 = m_rate / (m_rate + x + lam)
    s2 = m_rate / (m_rate + theta + x + lam)
    n2 = s1 * np.convolve(np.array([1.0, -b * v]), np.array([1.0, -f_mtx])) - s2 * np.convolve(
        np.array([1.0, -b * v * y]), np.array([1.0, -f_mx])
    )
    numer = np.convolve(n2, np.convolve(np.array([1.0, -b * v]), np.array([1.0, -b * v * y])))
    return series_from_rational(numer / theta, [f_mx, f_mtx, r1, r2], order)


def _series_g2_exact(model: ProcessModel, args: TransformArgs, order: int) -> TruncatedSeries:
    lam = model.rate
    mu = model.observation.recurring.rate
    u, v, y = complex(args.u), complex(args.v), complex(args.y)
    w, x, theta = complex(args.w), complex(args.x), complex(args.theta)
    if abs(theta) < 1e-6:
        raise _ExactPathUnavailable
    r1, r2 = _pole_pair(model, theta, v, y)
    if not _roots_tame([r1, r2], order):
        raise _ExactPathUnavailable
    g = lambda z: mark_pgf(model.marks, z)
    obs = model.observation

    zeta1 = x + lam * (1.0 - g(v))
    d1 = theta + lam * (g(v) - g(v * y))
    gam = TruncatedSeries.constant(lst_divided_diff(obs.recurring, zeta1, d1), order) - _gamma_diff_series(
        model, mu, args, r1, r2, order
    )
    if isinstance(obs.initial, DegenerateZero):
        gam0 = TruncatedSeries.constant(0.0, order)
    else:
        rho = obs.initial.rate
        gam0 = TruncatedSeries.constant(lst_divided_diff(obs.initial, zeta1, d1), order) - _gamma_diff_series(
            model, rho, args, r1, r2, order
        )

    b3 = _resolvent_series(model, u * v * y, theta + w, order)
    return gam0 + gam * b3


# ---------------------------------------------------------------------------
# public transforms


def _crossing_series(model: ProcessModel, args: TransformArgs, which: str) -> TruncatedSeries:
    args.validate()
    order = model.threshold
    if which == "g1":
        exact, pointwise = _series_g1_exact, _g1_integrand
    else:
        exact, pointwise = _series_g2_exact, _g2_integrand
    if _exact_path_applicable(model):
        try:
            return exact(model, args, order)
        except _ExactPathUnavailable:
            pass
    return _coeffs_by_sampling(lambda s: pointwise(model, args, s), order)


def g1_star(model: ProcessModel, args: TransformArgs) -> complex:
    """Transform (in t) of the crossing functional on the window t < tau_pre.

    Partial coefficient sum, at the threshold order, of
    ``b1 * (b2 - b3)`` in the level-tagging variable.
    """
    return d_inverse(_crossing_series(model, args, "g1"), model.threshold)


def g2_star(model: ProcessModel, args: TransformArgs) -> complex:
    """Transform of the crossing functional on the window tau_pre <= t < tau_cross.

    Partial coefficient sum of ``gamma0 + gamma * b3``.
    """
    return d_inverse(_crossing_series(model, args, "g2"), model.threshold)


def g_star(model: ProcessModel, args: TransformArgs) -> complex:
    """Transform on the full pre-crossing window t < tau_cross (sum of the two parts)."""
    return g1_star(model, args) + g2_star(model, args)


def lst_tau_pre(model: ProcessModel, theta: complex) -> complex:
    """LST E[exp(-theta * tau_pre)] of the last inspection at or below the threshold.

    Uses the identity ``theta * G1(theta; 1,1,0,0,1) = 1 - LST`` that the
    window t < tau_pre yields at the all-ones tagging point.  Re theta > 0.
    """
    theta = complex(theta)
    if theta.real <= 0.0:
        raise DomainError("lst_tau_pre requires Re theta > 0")
    return 1.0 - theta * g1_star(model, TransformArgs(theta=theta))


def lst_tau_cross(model: ProcessModel, theta: complex) -> complex:
    """LST E[exp(-theta * tau_cross)] of the first inspection above the threshold."""
    theta = complex(theta)
    if theta.real <= 0.0:
        raise DomainError("lst_tau_cross requires Re theta > 0")
    return 1.0 - theta * g_star(model, TransformArgs(theta=theta))
