"""Oracle-equivalence battery behind the ``validate`` command.

Every analytic operation in the package is pitted against at least one
independent route to the same number: quadrature, direct series sums,
exact combinatorial identities, numerical transform inversion, or plain
Monte Carlo.  Each check reports the worst observed discrepancy, its
tolerance, and the remaining margin; the report is machine-readable and
byte-stable for a fixed (model, seed).

The battery doubles as a tripwire: it must detect a deliberately
corrupted composite ratio c (``c_shift``), which silently changes the
time-domain closed forms while leaving the transform side intact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from . import closedform, fluctuation, laplace, montecarlo, series, transforms
from .errors import DomainError, TableInvariantError
from .model import (
    DegenerateZero,
    Exponential,
    GeneralDiscrete,
    Geometric,
    ProcessModel,
    TransformArgs,
    delay_sample,
    mark_pgf,
    obs_lst,
)

__all__ = ["ANALYTIC_OPS", "CLOSED_FORM_OPS", "run_battery"]

# Registry of analytic operations the battery must cover.  The coverage
# meta-check fails if any applicable operation has no oracle check.
ANALYTIC_OPS = (
    "model.mark_pgf",
    "model.obs_lst",
    "transforms.phi",
    "transforms.psi",
    "transforms.gamma",
    "transforms.gamma_is_contractive",
    "transforms.f1_star",
    "transforms.f2_star",
    "series.series_from_rational",
    "series.d_op_indicator",
    "series.d_inverse",
    "series.d_inverse_double_geometric",
    "fluctuation.blocks_at",
    "fluctuation.g1_star",
    "fluctuation.g2_star",
    "fluctuation.g_star",
    "fluctuation.lst_tau_pre",
    "fluctuation.lst_tau_cross",
    "closedform.f_of",
    "closedform.g1_star_special",
    "closedform.reg_gamma_p",
    "closedform.coeff_g",
    "closedform.coeff_h",
    "closedform.ev_v_anu_before",
    "closedform.r_coeff",
    "closedform.joint_dist",
    "closedform.dist_table",
    "closedform.crossing_level_pmf",
    "laplace.invert",
    "laplace.survival_curve",
)

# Operations meaningful only under geometric marks + exponential gaps +
# zero initial delay; excluded from the required set for other models.
CLOSED_FORM_OPS = tuple(op for op in ANALYTIC_OPS if op.startswith("closedform."))


@dataclass
class _CheckResult:
    name: str
    passed: bool
    observed: float
    tolerance: float
    covers: tuple[str, ...]
    detail: str = ""
    skipped: bool = False

    @property
    def margin(self) -> float:
        return self.tolerance - self.observed

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "skipped": bool(self.skipped),
            "observed": float(self.observed),
            "tolerance": float(self.tolerance),
            "margin": float(self.margin),
            "covers": list(self.covers),
            "detail": self.detail,
        }


@dataclass
class _Context:
    model: ProcessModel
    special: closedform.SpecialModel | None
    seed: int
    n_paths: int
    _crossing: dict | None = field(default=None, repr=False)

    def rng(self, salt: int) -> np.random.Generator:
        return np.random.default_rng([self.seed, salt])

    @property
    def crossing_sample(self) -> dict:
        if self._crossing is None:
            self._crossing = montecarlo._crossing_sample(self.model, self.n_paths, self.seed)
        return self._crossing


def _skip(name: str, covers: tuple[str, ...], reason: str) -> _CheckResult:
    return _CheckResult(
        name=name, passed=True, observed=0.0, tolerance=0.0, covers=covers,
        detail=reason, skipped=True,
    )


# ---------------------------------------------------------------------------
# transform primitives


def _check_increment_pgf(ctx: _Context) -> _CheckResult:
    """phi against the Poisson mixture sum; mark_pgf against direct summation."""
    covers = ("transforms.phi", "model.mark_pgf")
    model = ctx.model
    lam = model.rate
    worst = 0.0
    for z in (0.3, 0.95, -0.4 + 0.2j, 0.6 + 0.6j):
        gz = mark_pgf(model.marks, z)
        if isinstance(model.marks, Geometric):
            a, b = model.marks.a, model.marks.b
            direct = sum(a * b ** (k - 1) * z**k for k in range(1, 4000))
        else:
            direct = sum(p * z**k for k, p in enumerate(model.marks.pmf))
        worst = max(worst, abs(gz - direct))
        for s in (0.5, 2.0):
            mix, term, n = 0.0 + 0.0j, math.exp(-lam * s), 0
            while n < 500:
                mix += term * gz**n
                n += 1
                term *= lam * s / n
                if term < 1e-18 and n > lam * s:
                    break
            worst = max(worst, abs(transforms.phi(model, z, s) - mix))
    return _CheckResult("increment-pgf-quadrature", worst <= 1e-10, worst, 1e-10, covers,
                        "closed forms vs direct Poisson-mixture and power sums")


def _check_split_window(ctx: _Context) -> _CheckResult:
    """psi against Simpson quadrature of the split-window integrand."""
    covers = ("transforms.psi", "transforms.phi")
    model = ctx.model
    worst = 0.0
    for b_arg, c_arg, theta, horizon in ((0.4, 0.8, 0.5, 0.7), (0.9, 0.2, 1.5, 2.0)):
        n = 2000
        t = np.linspace(0.0, horizon, n + 1)
        vals = np.array(
            [math.exp(-theta * ti) * (transforms.phi(model, b_arg, ti) * transforms.phi(model, c_arg, horizon - ti)).real
             for ti in t]
        )
        w = np.ones(n + 1)
        w[1:-1:2], w[2:-1:2] = 4.0, 2.0
        quad = (horizon / n / 3.0) * float(w @ vals)
        spec = transforms.ConvolutionSpec(b_arg=b_arg, c_arg=c_arg, theta=theta, horizon=horizon)
        worst = max(worst, abs(transforms.psi(model, spec) - quad))
    return _CheckResult("window-transform-quadrature", worst <= 1e-8, worst, 1e-8, covers,
                        "damped split-window closed form vs Simpson quadrature")


def _check_increment_transform_mc(ctx: _Context) -> _CheckResult:
    """gamma against a direct Monte Carlo average over one inspection gap."""
    covers = ("transforms.gamma", "model.obs_lst", "model.mark_pgf")
    model = ctx.model
    rng = ctx.rng(3)
    n = 400_000
    z, theta = 0.6, 0.7
    worst = 0.0
    for which in ("initial", "recurring"):
        law = model.observation.initial if which == "initial" else model.observation.recurring
        if isinstance(law, DegenerateZero):
            exact = transforms.gamma(model, which, z, theta)
            worst = max(worst, abs(exact - 1.0) / 1e-9)  # a zero gap transforms to one
            continue
        gaps = delay_sample(law, rng, n)
        sums = montecarlo._compound_sums(model.marks, rng.poisson(model.rate * gaps), rng)
        draws = z ** sums.astype(float) * np.exp(-theta * gaps)
        est = float(np.mean(draws))
        se = float(np.std(draws, ddof=1) / math.sqrt(n))
        exact = transforms.gamma(model, which, z, theta)
        lst_route = obs_lst(model.observation, which, theta + model.rate * (1.0 - mark_pgf(model.marks, z)))
        worst = max(worst, abs(exact - lst_route) / 5e-3)
        worst = max(worst, abs(est - exact) / (5.0 * se + 1e-6))
    return _CheckResult("increment-transform-vs-mc", worst <= 1.0, worst, 1.0, covers,
                        "per-gap joint transform vs sample average (normalized to 5 sigma)")


def _check_contraction(ctx: _Context) -> _CheckResult:
    covers = ("transforms.gamma_is_contractive", "transforms.gamma")
    model = ctx.model
    rng = ctx.rng(4)
    worst_norm = 0.0
    flags_ok = True
    for _ in range(200):
        radius = rng.uniform(0.0, 1.0 - 1e-6)
        z = radius * np.exp(1j * rng.uniform(0.0, 2.0 * np.pi))
        theta = rng.uniform(1e-6, 5.0) if rng.random() < 0.5 else 0.0
        if theta == 0.0 and radius > 1.0 - 1e-6:
            continue
        inside = radius < 1.0 - 1e-12 or theta > 1e-12
        if not inside:
            continue
        flags_ok &= transforms.gamma_is_contractive(model, z, theta)
        worst_norm = max(worst_norm, abs(transforms.gamma(model, "recurring", z, theta)))
    boundary = abs(transforms.gamma(model, "recurring", 1.0, 0.0) - 1.0)
    passed = flags_ok and worst_norm < 1.0 and boundary <= 1e-12
    observed = max(worst_norm, boundary)
    return _CheckResult("contraction-bound", passed, observed, 1.0, covers,
                        f"max interior norm {worst_norm:.6f}; boundary defect {boundary:.2e}")


def _check_window_transforms_mc(ctx: _Context) -> _CheckResult:
    """Split-window transforms vs their two-stage simulation estimate."""
    covers = ("transforms.f1_star", "transforms.f2_star")
    model = ctx.model
    t_law, d_law = Exponential(1.0), Exponential(1.0)
    args = TransformArgs(theta=0.8, u=0.7, v=0.9, w=0.2, x=0.3, y=0.6)
    worst = 0.0
    details = []
    for name, analytic_fn, mc_fn in (
        ("f1", transforms.f1_star, montecarlo.estimate_f1_star),
        ("f2", transforms.f2_star, montecarlo.estimate_f2_star),
    ):
        exact = complex(analytic_fn(model, t_law, d_law, args)).real
        est = mc_fn(model, t_law, d_law, args, n_samples=100_000, seed=ctx.seed + 5)
        tol = 5.0 * est.std_error + 0.01 * abs(exact) + 1e-5
        worst = max(worst, abs(est.mean - exact) / tol)
        details.append(f"{name}: exact {exact:.6f}, mc {est.mean:.6f} +/- {est.std_error:.2e}")
    return _CheckResult("window-transforms-vs-mc", worst <= 1.0, worst, 1.0, covers,
                        "; ".join(details))


# ---------------------------------------------------------------------------
# series machinery


def _check_series_roundtrip(ctx: _Context) -> _CheckResult:
    covers = (
        "series.series_from_rational",
        "series.d_op_indicator",
        "series.d_inverse",
        "series.d_inverse_double_geometric",
    )
    rng = ctx.rng(6)
    worst = 0.0
    # generating-transform round trip on integer sequences, exact
    for _ in range(50):
        k_max = int(rng.integers(1, 31))
        f_seq = rng.integers(-50, 51, size=k_max + 1).astype(float)
        coeffs = np.concatenate(([f_seq[0]], np.diff(f_seq)))
        ts = series.TruncatedSeries(coeffs)
        for k in range(k_max + 1):
            worst = max(worst, abs(series.d_inverse(ts, k) - f_seq[k]))
    # indicator transform identity at explicit points
    for _ in range(20):
        a_prev = int(rng.integers(0, 10))
        a_next = a_prev + int(rng.integers(1, 10))
        s = rng.uniform(0.05, 0.95)
        direct = (1.0 - s) * sum(s**p for p in range(a_prev, a_next))
        worst = max(worst, abs(series.d_op_indicator(a_prev, a_next, s) - direct))
    # double-geometric inverse vs rational-series extraction
    for _ in range(100):
        f_root = rng.uniform(-0.9, 0.9) + 1j * rng.uniform(-0.4, 0.4)
        g_root = rng.uniform(-0.9, 0.9) + 1j * rng.uniform(-0.4, 0.4)
        k = int(rng.integers(0, 13))
        direct = series.d_inverse_double_geometric(f_root, g_root, k)
        via_series = series.d_inverse(series.series_from_rational([1.0], [f_root, g_root], k), k)
        worst = max(worst, abs(direct - via_series))
    return _CheckResult("series-extraction-roundtrip", worst <= 1e-12, worst, 1e-12, covers,
                        "integer round trips and dual-route coefficient extraction")


def _check_series_paths(ctx: _Context) -> _CheckResult:
    """Crossing transforms via the exact rational path vs contour sampling."""
    covers = ("fluctuation.blocks_at", "fluctuation.g1_star", "fluctuation.g2_star")
    model = ctx.model
    args = TransformArgs(theta=0.9, u=0.95, v=0.85, w=0.1, x=0.2, y=0.9)
    if not fluctuation._exact_path_applicable(model):
        return _skip("crossing-series-path-agreement", covers,
                     "rational path needs geometric marks and exponential gaps")
    order = model.threshold
    worst = 0.0
    for which, integrand in (("g1", fluctuation._g1_integrand), ("g2", fluctuation._g2_integrand)):
        sampled = series.d_inverse(
            fluctuation._coeffs_by_sampling(partial(integrand, model, args), order), order
        )
        exact = fluctuation.g1_star(model, args) if which == "g1" else fluctuation.g2_star(model, args)
        worst = max(worst, abs(sampled - exact) / max(1.0, abs(exact)))
    return _CheckResult("crossing-series-path-agreement", worst <= 1e-9, worst, 1e-9, covers,
                        "closed rational coefficients vs FFT contour sampling")


# ---------------------------------------------------------------------------
# closed-form suite (special family only)


def _check_transform_chain(ctx: _Context) -> _CheckResult:
    covers = ("fluctuation.g1_star", "closedform.g1_star_special", "closedform.f_of")
    if ctx.special is None:
        return _skip("transform-chain-agreement", covers, "needs the closed-form family")
    worst = 0.0
    for theta in (0.5, 2.0):
        for v in (0.3, 0.7):
            args = TransformArgs(theta=theta, u=1.0, v=v, w=0.0, x=0.0, y=1.0)
            series_route = fluctuation.g1_star(ctx.model, args)
            closed_route = closedform.g1_star_special(ctx.special, theta, v)
            worst = max(worst, abs(series_route - closed_route) / abs(closed_route))
    return _CheckResult("transform-chain-agreement", worst <= 1e-8, worst, 1e-8, covers,
                        "series-extraction route vs rational closed form")


def _check_partition(ctx: _Context) -> _CheckResult:
    covers = ("fluctuation.g_star",)
    model = ctx.model
    worst = 0.0
    for theta in (0.1, 1.0, 10.0):
        args = TransformArgs(theta=theta, u=1.0, v=1.0, w=0.0, x=0.0, y=1.0)
        g1 = fluctuation.g1_star(model, args)
        g2 = fluctuation.g2_star(model, args)
        g = fluctuation.g_star(model, args)
        worst = max(worst, abs(g - (g1 + g2)))
        total = theta * (g1 + g2) + fluctuation.lst_tau_cross(model, theta)
        worst = max(worst, abs(total - 1.0))
        pre = fluctuation.lst_tau_pre(model, theta)
        cross = fluctuation.lst_tau_cross(model, theta)
        worst = max(worst, max(0.0, abs(pre.imag)), max(0.0, cross.real - pre.real - 1e-12))
    return _CheckResult("partition-identity", worst <= 1e-10, worst, 1e-10, covers,
                        "windows partition [0, tau_nu); transform ordering sanity")


def _check_inversion_pairs(ctx: _Context) -> _CheckResult:
    covers = ("laplace.invert",)
    del ctx
    from scipy.special import gammainc

    pairs = [
        (lambda q: 1.0 / (q + 1.0), lambda t: math.exp(-t)),
        (lambda q: 1.0 / q**2, lambda t: t),
        (lambda q: 1.0 / (q + 0.5) ** 2, lambda t: t * math.exp(-0.5 * t)),
        (lambda q: (2.0 / (q + 2.0)) ** 3 / q, lambda t: float(gammainc(3, 2.0 * t))),
        (lambda q: q / (q + 1.0) ** 2, lambda t: (1.0 - t) * math.exp(-t)),
    ]
    worst = 0.0
    for transform, original in pairs:
        for t in (0.25, 1.0, 4.0):
            worst = max(worst, abs(laplace.invert(transform, t) - original(t)))
    return _CheckResult("inversion-roundtrip-known-pairs", worst <= 1e-7, worst, 1e-7, covers,
                        "five analytic transform/original pairs on t in {0.25, 1, 4}")


def _check_time_domain_inversion(ctx: _Context) -> _CheckResult:
    """The c-sensitive tripwire: invert the transform, compare to the closed form."""
    covers = (
        "closedform.g1_star_special",
        "closedform.ev_v_anu_before",
        "closedform.coeff_g",
        "closedform.coeff_h",
        "laplace.invert",
    )
    if ctx.special is None:
        return _skip("time-domain-inversion-agreement", covers, "needs the closed-form family")
    sp = ctx.special
    worst = 0.0
    for t in (0.25, 1.0, 4.0):
        for v in (0.3, 0.6, 0.9):
            inverted = laplace.invert(lambda q: closedform.g1_star_special(sp, q, v), t)
            direct = closedform.ev_v_anu_before(sp, v, t).real
            worst = max(worst, abs(inverted - direct) / max(1e-12, abs(direct)))
    return _CheckResult("time-domain-inversion-agreement", worst <= 1e-6, worst, 1e-6, covers,
                        "numeric inversion of the window transform vs its exact original")


def _check_pgf_extraction(ctx: _Context) -> _CheckResult:
    covers = ("closedform.joint_dist", "closedform.r_coeff", "closedform.ev_v_anu_before")
    if ctx.special is None:
        return _skip("pgf-extraction-consistency", covers, "needs the closed-form family")
    sp = ctx.special
    worst = 0.0
    for t in (0.25, 1.0, 4.0):
        for v in (0.3, 0.6, 0.9):
            total, r, quiet = 0.0, 0, 0
            while r <= 500:
                term = v**r * closedform.joint_dist(sp, r, t)
                total += term
                quiet = quiet + 1 if abs(term) < 1e-14 and r > sp.m else 0
                if quiet >= 4:
                    break
                r += 1
            direct = closedform.ev_v_anu_before(sp, v, t).real
            worst = max(worst, abs(total - direct))
    return _CheckResult("pgf-extraction-consistency", worst <= 1e-8, worst, 1e-8, covers,
                        "v**r-weighted coefficient sums vs the generating function")


def _check_gamma_cdf(ctx: _Context) -> _CheckResult:
    covers = ("closedform.reg_gamma_p",)
    del ctx
    worst = 0.0
    for x in (0.3, 1.0, 5.0, 20.0):
        tail = 1.0
        term = math.exp(-x)
        for k in range(0, 26):
            # tail = P{Poisson(x) >= k}, updated before use at each k
            worst = max(worst, abs(closedform.reg_gamma_p(k, x) - tail))
            tail -= term
            term *= x / (k + 1)
    conv = abs(closedform.reg_gamma_p(0, 0.5) - 1.0) + abs(closedform.reg_gamma_p(0, 0.0))
    worst = max(worst, conv)
    return _CheckResult("gamma-cdf-identity", worst <= 1e-12, worst, 1e-12, covers,
                        "regularized lower gamma vs exact Poisson tail recursion")


def _check_gh_limits(ctx: _Context) -> _CheckResult:
    covers = ("closedform.coeff_g", "closedform.coeff_h")
    if ctx.special is None:
        return _skip("gh-coefficient-limits", covers, "needs the closed-form family")
    sp = ctx.special
    b, ratio = sp.b, sp.mu / sp.lam
    t_inf = 200.0 / min(1.0, sp.lam)
    worst = 0.0
    for j in range(7):
        worst = max(worst, abs(closedform.coeff_g(j, 0.0, sp) - b**j))
        worst = max(worst, abs(closedform.coeff_h(j, 0.0, sp) - b ** (j + 1)))
        worst = max(worst, abs(closedform.coeff_g(j, t_inf, sp) - (1.0 + ratio)))
        worst = max(worst, abs(closedform.coeff_h(j, t_inf, sp) - (b + ratio)))
    return _CheckResult("gh-coefficient-limits", worst <= 1e-10, worst, 1e-10, covers,
                        "t -> 0 and t -> infinity limits of the inversion coefficients")


def _check_dist_table(ctx: _Context) -> _CheckResult:
    covers = ("closedform.dist_table",)
    if ctx.special is None:
        return _skip("dist-table-invariants", covers, "needs the closed-form family")
    try:
        closedform.dist_table(ctx.special, [0.0, 0.5, 1.0, 2.0], 12)
    except TableInvariantError as exc:
        cells = ", ".join(str(cell) for cell in exc.cells[:5])
        return _CheckResult("dist-table-invariants", False, 1.0, 0.0, covers,
                            f"invariant violation at cells {cells}")
    return _CheckResult("dist-table-invariants", True, 0.0, 1e-9, covers,
                        "support, range, monotonicity, and row-sum invariants hold")


# ---------------------------------------------------------------------------
# Monte Carlo cross-checks


def _check_mc_joint(ctx: _Context) -> _CheckResult:
    covers = ("closedform.dist_table", "closedform.joint_dist")
    if ctx.special is None:
        return _skip("mc-joint-agreement", covers, "needs the closed-form family")
    grid = np.array([0.0, 0.5, 1.0, 2.0])
    r_max = 10
    table = closedform.dist_table(ctx.special, grid, r_max)
    sample = ctx.crossing_sample
    n = ctx.n_paths
    worst = 0.0
    for i, t in enumerate(grid):
        for k in range(r_max + 1):
            hits = float(np.count_nonzero((sample["a_cross"] == k) & (sample["tau_pre"] > t)))
            freq = hits / n
            se = math.sqrt(max(freq * (1.0 - freq), 1e-12) / n)
            tol_cell = max(4.0 * se, 0.008)
            worst = max(worst, abs(freq - table.values[i, k]) / tol_cell)
    return _CheckResult("mc-joint-agreement", worst <= 1.0, worst, 1.0, covers,
                        f"joint table vs {n} simulated crossings (normalized to cell tolerance)")


def _check_survival_mc(ctx: _Context) -> _CheckResult:
    covers = (
        "laplace.survival_curve",
        "fluctuation.lst_tau_pre",
        "fluctuation.lst_tau_cross",
        "laplace.invert",
    )
    model = ctx.model
    sample = ctx.crossing_sample
    grid = np.linspace(0.0, 4.0, 9)
    worst = 0.0
    for key, lst in (
        ("tau_pre", lambda q: fluctuation.lst_tau_pre(model, q)),
        ("tau_cross", lambda q: fluctuation.lst_tau_cross(model, q)),
    ):
        curve = laplace.survival_curve(lst, grid)
        empirical = np.array([np.mean(sample[key] > t) for t in grid])
        worst = max(worst, float(np.max(np.abs(curve - empirical))))
    return _CheckResult("survival-vs-mc", worst <= 0.01, worst, 0.01, covers,
                        "inverted survival curves vs empirical exceedance frequencies")


def _check_overshoot_pmf(ctx: _Context) -> _CheckResult:
    covers = ("closedform.crossing_level_pmf",)
    if ctx.special is None:
        return _skip("overshoot-pmf-vs-mc", covers, "needs the closed-form family")
    sample = ctx.crossing_sample
    n = ctx.n_paths
    m = ctx.special.m
    worst = 0.0
    for k in range(1, 11):
        freq = float(np.count_nonzero(sample["a_cross"] == m + k)) / n
        worst = max(worst, abs(freq - closedform.crossing_level_pmf(ctx.special, m + k)))
    return _CheckResult("overshoot-pmf-vs-mc", worst <= 0.01, worst, 0.01, covers,
                        "geometric overshoot law vs empirical crossing levels")


def _check_functional_mc(ctx: _Context) -> _CheckResult:
    covers = ("fluctuation.g1_star", "fluctuation.g2_star", "fluctuation.g_star")
    model = ctx.model
    worst = 0.0
    details = []
    args_fast = TransformArgs(theta=1.0, u=0.8, v=0.9, w=0.15, x=0.25, y=1.0)
    args_slow = TransformArgs(theta=1.0, u=0.9, v=0.95, w=0.1, x=0.1, y=0.8)
    for tag, args, n, which in (
        ("G1|y=1", args_fast, ctx.n_paths, "G1"),
        ("G2|y=1", args_fast, ctx.n_paths, "G2"),
        ("G1|y<1", args_slow, max(10_000, ctx.n_paths // 5), "G1"),
    ):
        exact = {
            "G1": fluctuation.g1_star,
            "G2": fluctuation.g2_star,
            "G": fluctuation.g_star,
        }[which](model, args).real
        est = montecarlo.estimate_functional(model, args, which, n_paths=n, seed=ctx.seed + 19)
        tol = 5.0 * est.std_error + 0.01 * abs(exact) + 1e-5
        worst = max(worst, abs(est.mean - exact) / tol)
        details.append(f"{tag}: exact {exact:.6f}, mc {est.mean:.6f}")
    g_est = montecarlo.estimate_functional(model, args_fast, "G", n_paths=ctx.n_paths, seed=ctx.seed + 19)
    g1_est = montecarlo.estimate_functional(model, args_fast, "G1", n_paths=ctx.n_paths, seed=ctx.seed + 19)
    g2_est = montecarlo.estimate_functional(model, args_fast, "G2", n_paths=ctx.n_paths, seed=ctx.seed + 19)
    if g_est.mean != g1_est.mean + g2_est.mean:
        worst = max(worst, 2.0)
        details.append("additivity violated")
    return _CheckResult("functional-vs-mc", worst <= 1.0, worst, 1.0, covers,
                        "; ".join(details))


_CHECKS = (
    _check_increment_pgf,
    _check_split_window,
    _check_increment_transform_mc,
    _check_contraction,
    _check_window_transforms_mc,
    _check_series_roundtrip,
    _check_series_paths,
    _check_transform_chain,
    _check_partition,
    _check_inversion_pairs,
    _check_time_domain_inversion,
    _check_pgf_extraction,
    _check_gamma_cdf,
    _check_gh_limits,
    _check_dist_table,
    _check_mc_joint,
    _check_survival_mc,
    _check_overshoot_pmf,
    _check_functional_mc,
)


def _model_echo(model: ProcessModel) -> dict:
    marks: dict
    if isinstance(model.marks, Geometric):
        marks = {"geometric": {"a": model.marks.a}}
    elif isinstance(model.marks, GeneralDiscrete):
        marks = {"pmf": [float(p) for p in model.marks.pmf]}
    else:
        marks = {"law": type(model.marks).__name__}
    initial = model.observation.initial
    obs = {
        "recurring": type(model.observation.recurring).__name__,
        "initial": type(initial).__name__,
    }
    if isinstance(model.observation.recurring, Exponential):
        obs["mu"] = model.observation.recurring.rate
    return {
        "rate": model.rate,
        "marks": marks,
        "obs": obs,
        "threshold": model.threshold,
    }


def run_battery(
    model: ProcessModel,
    seed: int = 0,
    c_shift: float = 0.0,
    n_paths: int = 100_000,
) -> dict:
    """Run every oracle check and return the machine-readable report.

    ``c_shift`` perturbs the composite ratio used by the time-domain
    closed forms (negative control); the battery is expected to fail
    loudly for any nonzero shift beyond roundoff.
    """
    if n_paths < 1_000:
        raise DomainError(f"battery needs at least 1000 paths, got {n_paths}")
    try:
        special = closedform.SpecialModel.from_process_model(model)
    except DomainError:
        special = None
    if special is not None and c_shift != 0.0:
        special = closedform.SpecialModel(
            lam=special.lam, a=special.a, mu=special.mu, m=special.m,
            c_override=special.c + c_shift,
        )
    ctx = _Context(model=model, special=special, seed=int(seed), n_paths=int(n_paths))

    results = [check(ctx) for check in _CHECKS]

    required = set(ANALYTIC_OPS) if special is not None else set(ANALYTIC_OPS) - set(CLOSED_FORM_OPS)
    covered: set[str] = set()
    for res in results:
        if not res.skipped:
            covered.update(res.covers)
    missing = sorted(required - covered)
    results.append(
        _CheckResult(
            name="coverage-complete",
            passed=not missing,
            observed=float(len(missing)),
            tolerance=0.0,
            covers=(),
            detail="every applicable analytic operation has an oracle check"
            if not missing else f"uncovered: {', '.join(missing)}",
        )
    )

    results.sort(key=lambda res: res.name)
    report = {
        "schema_version": 1,
        "seed": int(seed),
        "c_shift": float(c_shift),
        "n_paths": int(n_paths),
        "model": _model_echo(model),
        "checks": [res.as_dict() for res in results],
        "coverage": {
            "required": sorted(required),
            "covered": sorted(covered & required),
            "missing": missing,
        },
        "failed_checks": [res.name for res in results if not res.skipped and not res.passed],
        "all_passed": all(res.passed for res in results if not res.skipped),
    }
    return report
