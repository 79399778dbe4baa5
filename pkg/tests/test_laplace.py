"""Transform inversion: the two algorithms, the self-check fallback
machinery, and survival-curve extraction from LSTs.

Accuracy is pinned against a dictionary of transform/original pairs with
known closed forms.  Measured worst-case errors carry roughly 10-100x
headroom over the asserted bounds.
"""

import math

import numpy as np
import pytest

from crosswatch.errors import DomainError, InversionError
from crosswatch.laplace import InversionConfig, invert, survival_curve

# (transform, original); all originals smooth and nonoscillatory
SMOOTH_PAIRS = [
    (lambda s: 1.0 / s, lambda t: 1.0),
    (lambda s: 1.0 / s**2, lambda t: t),
    (lambda s: 2.0 / s**3, lambda t: t * t),
    (lambda s: 1.0 / (s + 1.0), lambda t: math.exp(-t)),
    (lambda s: 1.0 / (s + 0.5), lambda t: math.exp(-0.5 * t)),
    (lambda s: 1.0 / (s + 1.0) ** 2, lambda t: t * math.exp(-t)),
    (lambda s: 2.0 / (s + 2.0) ** 3, lambda t: t * t * math.exp(-2 * t)),
    (lambda s: 6.0 / (s + 1.0) ** 4, lambda t: t**3 * math.exp(-t)),
    (lambda s: 1.0 / (s * (s + 1.0)), lambda t: 1.0 - math.exp(-t)),
    (lambda s: 4.0 / (s * (s + 2.0) ** 2), lambda t: 1.0 - math.exp(-2 * t) * (1 + 2 * t)),
    (
        lambda s: 1.0 / (s * (s + 1.0) ** 3),
        lambda t: 1.0 - math.exp(-t) * (1 + t + t * t / 2),
    ),
    (
        lambda s: 0.3 / (s + 1.0) + 0.7 / (s + 3.0),
        lambda t: 0.3 * math.exp(-t) + 0.7 * math.exp(-3 * t),
    ),
    (
        lambda s: (1.0 - (0.5 / (1.0 + s) + 1.0 / (2.0 + s))) / s,
        lambda t: 0.5 * math.exp(-t) + 0.5 * math.exp(-2 * t),
    ),
    (
        lambda s: 1.0 / (s * (s + 1.0) * (s + 2.0)),
        lambda t: 0.5 - math.exp(-t) + 0.5 * math.exp(-2 * t),
    ),
    (
        lambda s: (s + 3.0) / ((s + 1.0) * (s + 2.0)),
        lambda t: 2 * math.exp(-t) - math.exp(-2 * t),
    ),
    (lambda s: 1.0 / (s + 1.0) - 1.0 / (s + 2.0), lambda t: math.exp(-t) - math.exp(-2 * t)),
]

OSCILLATORY_PAIRS = [
    (lambda s: 1.0 / (s * s + 1.0), lambda t: math.sin(t)),
    (lambda s: s / (s * s + 1.0), lambda t: math.cos(t)),
    (lambda s: 1.0 / ((s + 0.5) ** 2 + 1.0), lambda t: math.exp(-0.5 * t) * math.sin(t)),
    (
        lambda s: (s + 0.3) / ((s + 0.3) ** 2 + 4.0),
        lambda t: math.exp(-0.3 * t) * math.cos(2 * t),
    ),
]

GRID = (0.1, 0.5, 1.0, 2.0, 5.0, 10.0)


class TestConfig:
    def test_defaults(self):
        cfg = InversionConfig()
        assert cfg.method == "auto" and cfg.terms == 14 and cfg.nodes == 32

    def test_method_whitelist(self):
        with pytest.raises(DomainError):
            InversionConfig(method="euler")

    def test_terms_window(self):
        for bad in (6, 20, 13, True):
            with pytest.raises(DomainError):
                InversionConfig(terms=bad)
        for ok in (8, 12, 18):
            InversionConfig(terms=ok)

    def test_nodes_floor(self):
        with pytest.raises(DomainError):
            InversionConfig(nodes=4)

    def test_window_ordering(self):
        with pytest.raises(DomainError):
            InversionConfig(t_min=2.0, t_max=1.0)
        with pytest.raises(DomainError):
            InversionConfig(t_min=-1.0)

    def test_scale_positive(self):
        with pytest.raises(DomainError):
            InversionConfig(abscissa_scale=0.0)


class TestInvert:
    def test_unit_step(self):
        assert abs(invert(lambda s: 1.0 / s, 1.0) - 1.0) < 1e-8

    def test_unit_exponential(self):
        assert abs(invert(lambda s: 1.0 / (s + 1.0), 1.0) - math.exp(-1.0)) < 1e-8

    def test_smooth_dictionary(self):
        cfg = InversionConfig()
        for transform, original in SMOOTH_PAIRS:
            for t in GRID:
                assert abs(invert(transform, t, cfg) - original(t)) < 1e-7

    def test_oscillatory_dictionary(self):
        # the contour sum's e^{rt} factor grows with the node count, so
        # more nodes is not monotonically better; 48 sits in the sweet spot
        cfg = InversionConfig(nodes=48)
        for transform, original in OSCILLATORY_PAIRS:
            for t in GRID:
                assert abs(invert(transform, t, cfg) - original(t)) < 1e-6

    def test_pure_real_axis_method(self):
        # documented ceiling of the real-abscissa method on smooth laws
        cfg = InversionConfig(method="gaver-stehfest", terms=16)
        subset = SMOOTH_PAIRS[3:5] + SMOOTH_PAIRS[8:12]
        for transform, original in subset:
            for t in GRID:
                assert abs(invert(transform, t, cfg) - original(t)) < 5e-4

    def test_contour_method_direct(self):
        cfg = InversionConfig(method="talbot")
        for transform, original in SMOOTH_PAIRS[:14]:
            for t in GRID:
                assert abs(invert(transform, t, cfg) - original(t)) < 1e-9

    def test_time_rescaling_covariance(self):
        transform = lambda s: 1.0 / (s + 1.0) ** 2
        scaled = invert(transform, 1.5, InversionConfig(abscissa_scale=2.0))
        direct = invert(transform, 3.0, InversionConfig())
        assert abs(scaled - direct) < 1e-12

    def test_rejects_nonpositive_time(self):
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, 0.0)
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, -1.0)
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, math.inf)

    def test_enforces_configured_window(self):
        cfg = InversionConfig(t_min=1.0, t_max=5.0)
        invert(lambda s: 1.0 / s, 2.0, cfg)
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, 0.5, cfg)
        with pytest.raises(DomainError):
            invert(lambda s: 1.0 / s, 6.0, cfg)

    def test_non_finite_transform_is_an_error(self):
        with pytest.raises(InversionError):
            invert(lambda s: float("nan"), 1.0)

    def test_real_only_transform_never_raises_on_fallback(self):
        # oscillatory original trips the self-check, but the transform
        # refuses complex abscissas; the real-axis estimate must stand
        def real_only(s):
            if isinstance(s, complex):
                raise TypeError("real abscissas only")
            return s / (s * s + 1.0)

        value = invert(real_only, 5.0, InversionConfig())
        assert math.isfinite(value)


class TestSurvivalCurve:
    def test_exponential_law(self):
        grid = np.array([0.0, 0.1, 0.5, 1.0, 2.0, 5.0])
        out = survival_curve(lambda s: 1.0 / (1.0 + s), grid)
        assert np.max(np.abs(out - np.exp(-grid))) < 1e-7

    def test_erlang_law(self):
        grid = np.array([0.5, 1.0, 3.0])
        out = survival_curve(lambda s: (1.0 / (1.0 + s)) ** 2, grid)
        want = np.exp(-grid) * (1.0 + grid)
        assert np.max(np.abs(out - want)) < 1e-7

    def test_atom_at_zero(self):
        out = survival_curve(lambda s: 0.3 + 0.7 / (1.0 + s), np.array([0.0]))
        assert abs(out[0] - 0.7) < 1e-9

    def test_no_atom_reports_one_at_zero(self):
        out = survival_curve(lambda s: 1.0 / (1.0 + s), np.array([0.0]))
        assert abs(out[0] - 1.0) < 1e-9

    def test_clamped_to_unit_interval(self):
        out = survival_curve(lambda s: 1.0 / (1.0 + s), np.array([50.0, 80.0, 120.0]))
        assert np.all(out >= 0.0) and np.all(out <= 1.0)

    def test_nonincreasing(self):
        grid = np.linspace(0.0, 6.0, 61)
        out = survival_curve(lambda s: (1.0 / (1.0 + s)) ** 2, grid)
        assert np.all(np.diff(out) <= 1e-9)

    def test_empty_grid(self):
        out = survival_curve(lambda s: 1.0 / (1.0 + s), np.array([]))
        assert out.size == 0

    def test_grid_validation(self):
        with pytest.raises(DomainError):
            survival_curve(lambda s: 1.0 / (1.0 + s), np.ones((2, 2)))
        with pytest.raises(DomainError):
            survival_curve(lambda s: 1.0 / (1.0 + s), np.array([-1.0, 1.0]))
