"""Mark laws, delay laws, model validation, and config loading."""

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from crosswatch.errors import ConfigError, DomainError, UnsupportedLawError
from crosswatch.model import (
    DegenerateZero,
    Exponential,
    GeneralDiscrete,
    GeneralNonneg,
    Geometric,
    ObservationLaw,
    ProcessModel,
    TransformArgs,
    delay_lst,
    delay_sample,
    load_model,
    mark_mean,
    mark_pgf,
    mark_sample,
    obs_lst,
)


class TestMarkLaws:
    def test_geometric_pgf_closed_form(self):
        # P{X=k} = a b^{k-1}, k >= 1, so E[z^X] = a z / (1 - b z)
        law = Geometric(0.25)
        z = 0.3 + 0.1j
        want = 0.25 * z / (1.0 - 0.75 * z)
        assert mark_pgf(law, z) == pytest.approx(want, rel=1e-14)

    def test_geometric_b_complement(self):
        assert Geometric(0.7).b == pytest.approx(0.3)

    def test_degenerate_unit_marks(self):
        # a = 1 collapses to a point mass at 1: the pgf is the identity
        law = Geometric(1.0)
        for z in (0.0, 0.5, -0.3 + 0.2j, 1.0):
            assert mark_pgf(law, z) == pytest.approx(z)

    def test_geometric_rejects_bad_parameter(self):
        for a in (0.0, -0.1, 1.5, math.nan):
            with pytest.raises(DomainError):
                Geometric(a)

    def test_general_discrete_pgf_is_dot_product(self):
        pmf = [0.1, 0.2, 0.3, 0.4]
        law = GeneralDiscrete(pmf)
        z = 0.6
        want = sum(p * z**k for k, p in enumerate(pmf))
        assert mark_pgf(law, z) == pytest.approx(want, rel=1e-14)

    def test_general_discrete_validation(self):
        with pytest.raises(DomainError):
            GeneralDiscrete([])
        with pytest.raises(DomainError):
            GeneralDiscrete([0.5, -0.1, 0.6])
        with pytest.raises(DomainError):
            GeneralDiscrete([0.5, 0.4])  # mass 0.9

    def test_mark_mean(self):
        assert mark_mean(Geometric(0.5)) == pytest.approx(2.0)
        assert mark_mean(GeneralDiscrete([0.0, 0.5, 0.5])) == pytest.approx(1.5)

    def test_mark_sample_matches_law(self):
        rng = np.random.default_rng(11)
        draws = mark_sample(Geometric(0.5), rng, 200_000)
        # mean 2, variance b/a^2 = 2
        assert draws.min() >= 1
        assert abs(draws.mean() - 2.0) < 5 * math.sqrt(2.0 / 200_000)

    @given(
        a=st.floats(0.05, 1.0),
        r=st.floats(0.0, 1.0),
        phase=st.floats(0.0, 2.0 * math.pi),
    )
    def test_pgf_bounded_on_unit_disk(self, a, r, phase):
        z = r * complex(math.cos(phase), math.sin(phase))
        val = mark_pgf(Geometric(a), z)
        assert abs(val) <= 1.0 + 1e-12

    def test_pgf_normalization(self):
        assert mark_pgf(Geometric(0.3), 1.0) == pytest.approx(1.0)
        assert mark_pgf(GeneralDiscrete([0.2, 0.8]), 1.0) == pytest.approx(1.0)


class TestDelayLaws:
    def test_degenerate_zero_lst_is_one(self):
        assert delay_lst(DegenerateZero(), 3.7 + 1.0j) == 1.0

    def test_exponential_lst(self):
        # E[e^{-zT}] = rate / (rate + z)
        assert delay_lst(Exponential(2.0), 3.0) == pytest.approx(0.4)

    def test_exponential_rejects_nonpositive_rate(self):
        with pytest.raises(DomainError):
            Exponential(0.0)

    def test_general_nonneg_passthrough(self):
        law = GeneralNonneg(lst=lambda z: (1.0 + z) ** -2, quantile=lambda u: 1.0)
        assert delay_lst(law, 1.0) == pytest.approx(0.25)

    def test_delay_sample_exponential_moments(self):
        rng = np.random.default_rng(5)
        draws = delay_sample(Exponential(2.0), rng, 100_000)
        assert draws.min() >= 0.0
        assert abs(draws.mean() - 0.5) < 5 * 0.5 / math.sqrt(100_000)

    def test_delay_sample_general_uses_quantile(self):
        law = GeneralNonneg(lst=lambda z: 1.0, quantile=lambda u: 42.0 * u)
        rng = np.random.default_rng(0)
        draws = delay_sample(law, rng, 1000)
        assert np.all((0.0 <= draws) & (draws < 42.0))


class TestObservationLaw:
    def test_recurring_must_be_positive(self):
        with pytest.raises(UnsupportedLawError):
            ObservationLaw(initial=DegenerateZero(), recurring=DegenerateZero())

    def test_obs_lst_dispatch(self):
        obs = ObservationLaw(initial=DegenerateZero(), recurring=Exponential(1.0))
        assert obs_lst(obs, "initial", 5.0) == 1.0
        assert obs_lst(obs, "recurring", 1.0) == pytest.approx(0.5)
        with pytest.raises(DomainError):
            obs_lst(obs, "final", 1.0)


class TestProcessModel:
    def test_validation(self):
        obs = ObservationLaw(initial=DegenerateZero(), recurring=Exponential(1.0))
        with pytest.raises(DomainError):
            ProcessModel(rate=0.0, marks=Geometric(0.5), observation=obs, threshold=3)
        with pytest.raises(DomainError):
            ProcessModel(rate=1.0, marks=Geometric(0.5), observation=obs, threshold=-1)
        with pytest.raises(DomainError):
            ProcessModel(rate=1.0, marks=Geometric(0.5), observation=obs, threshold=2.5)

    def test_zero_threshold_allowed(self):
        obs = ObservationLaw(initial=DegenerateZero(), recurring=Exponential(1.0))
        m = ProcessModel(rate=1.0, marks=Geometric(0.5), observation=obs, threshold=0)
        assert m.threshold == 0

    def test_initial_is_zero_flag(self, std_model, exp_initial_model):
        assert std_model.initial_is_zero
        assert not exp_initial_model.initial_is_zero


class TestTransformArgs:
    def test_defaults_are_neutral(self):
        args = TransformArgs()
        assert (args.u, args.v, args.y) == (1.0, 1.0, 1.0)
        assert (args.theta, args.w, args.x) == (0.0, 0.0, 0.0)

    def test_unit_disk_bounds(self):
        with pytest.raises(DomainError):
            TransformArgs(v=1.5).validate()
        with pytest.raises(DomainError):
            TransformArgs(theta=-0.5).validate()
        # complex tags inside the disk pass
        TransformArgs(theta=0.3 + 1.0j, u=0.5j, v=-0.2).validate()


class TestLoadModel:
    def _config(self, **overrides):
        cfg = {
            "schema_version": 1,
            "lambda": 1.0,
            "marks": {"geometric": {"a": 0.5}},
            "obs": {"mu": 1.0, "initial": "zero"},
            "threshold": 3,
        }
        cfg.update(overrides)
        return cfg

    def test_mapping_roundtrip(self):
        m = load_model(self._config())
        assert m.rate == 1.0
        assert isinstance(m.marks, Geometric)
        assert m.threshold == 3
        assert m.initial_is_zero

    def test_file_roundtrip(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text(json.dumps(self._config()))
        m = load_model(path)
        assert m.marks.a == 0.5

    def test_pmf_marks(self):
        m = load_model(self._config(marks={"pmf": [0.0, 0.4, 0.6]}))
        assert isinstance(m.marks, GeneralDiscrete)

    def test_exponential_initial(self):
        m = load_model(self._config(obs={"mu": 2.0, "initial": "exp"}))
        assert isinstance(m.observation.initial, Exponential)

    def test_unknown_key_rejected(self):
        with pytest.raises(ConfigError):
            load_model(self._config(extra=1))

    def test_bad_schema_version(self):
        with pytest.raises(ConfigError):
            load_model(self._config(schema_version=2))

    def test_marks_exactly_one_kind(self):
        bad = self._config()
        bad["marks"] = {"geometric": {"a": 0.5}, "pmf": [0.0, 1.0]}
        with pytest.raises(ConfigError):
            load_model(bad)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_model(tmp_path / "absent.json")
