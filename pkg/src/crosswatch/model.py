"""Process model: mark laws, observation-delay laws, and argument bundles.

The modelled system is a Poisson stream of events at rate ``lam``; event
``k`` carries an integer mark (its damage size), and ``A(t)`` is the total
mark accumulated on ``[0, t]``.  The process is only inspected on a delayed
renewal grid ``tau_0 = D_0``, ``tau_n = tau_{n-1} + D_n`` where ``D_0``
follows the initial delay law and ``D_1, D_2, ...`` the recurring one.  The
exit index ``nu`` is the first inspection ``n`` with ``A(tau_n) > M``.

This module holds the value types and the elementary transforms attached to
them: probability generating function of the mark law and Laplace-Stieltjes
transform of each delay law (plus the LST derivatives the analytic layers
need for removable-singularity limits).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Mapping, Union

import numpy as np

from .errors import ConfigError, DomainError, UnsupportedLawError

__all__ = [
    "Geometric",
    "GeneralDiscrete",
    "MarkLaw",
    "DegenerateZero",
    "Exponential",
    "GeneralNonneg",
    "DelayLaw",
    "ObservationLaw",
    "ProcessModel",
    "TransformArgs",
    "mark_pgf",
    "mark_mean",
    "mark_sample",
    "delay_lst",
    "delay_sample",
    "obs_lst",
    "load_model",
]

MAX_THRESHOLD = 10_000
_UNIT_TOL = 1e-12


# ---------------------------------------------------------------------------
# mark laws


@dataclass(frozen=True)
class Geometric:
    """Geometric mark law on {1, 2, ...}: P{mark = k} = a * b**(k-1), b = 1 - a.

    ``a`` is the success parameter; the mean mark size is ``1/a``.
    """

    a: float
    b: float = field(init=False)

    def __post_init__(self):
        if not 0.0 < self.a <= 1.0:
            raise DomainError(f"geometric parameter a must lie in (0, 1], got {self.a}")
        object.__setattr__(self, "b", 1.0 - self.a)


@dataclass(frozen=True, eq=False)
class GeneralDiscrete:
    """Finite-support mark law: ``pmf[k]`` is the probability of mark ``k``.

    Accepts a sequence indexed by mark size or a ``{mark: prob}`` mapping.
    """

    pmf: np.ndarray

    def __init__(self, pmf):
        if isinstance(pmf, Mapping):
            size = max(pmf) + 1
            vec = np.zeros(size)
            for k, p in pmf.items():
                if not (isinstance(k, (int, np.integer)) and k >= 0):
                    raise DomainError(f"mark support must be nonnegative integers, got {k!r}")
                vec[k] = p
        else:
            vec = np.asarray(pmf, dtype=float)
        if vec.ndim != 1 or vec.size == 0:
            raise DomainError("pmf must be a nonempty vector")
        if np.any(vec < 0.0) or abs(vec.sum() - 1.0) > 1e-9:
            raise DomainError("pmf entries must be nonnegative and sum to 1")
        vec = vec / vec.sum()
        vec.setflags(write=False)
        object.__setattr__(self, "pmf", vec)


MarkLaw = Union[Geometric, GeneralDiscrete]


def mark_pgf(law: MarkLaw, z: complex) -> complex:
    """Probability generating function E[z**mark] of a mark law."""
    z = complex(z)
    if isinstance(law, Geometric):
        denom = 1.0 - law.b * z
        if abs(denom) < _UNIT_TOL:
            raise DomainError("geometric pgf evaluated at its pole z = 1/b")
        return law.a * z / denom
    if isinstance(law, GeneralDiscrete):
        # Horner evaluation of sum_k pmf[k] z^k.
        acc = 0.0 + 0.0j
        for p in law.pmf[::-1]:
            acc = acc * z + p
        return acc
    raise UnsupportedLawError(f"unknown mark law {type(law).__name__}")


def mark_mean(law: MarkLaw) -> float:
    """Mean mark size."""
    if isinstance(law, Geometric):
        return 1.0 / law.a
    if isinstance(law, GeneralDiscrete):
        return float(np.arange(law.pmf.size) @ law.pmf)
    raise UnsupportedLawError(f"unknown mark law {type(law).__name__}")


def mark_sample(law: MarkLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` iid marks."""
    if isinstance(law, Geometric):
        return rng.geometric(law.a, size=size)
    if isinstance(law, GeneralDiscrete):
        return rng.choice(law.pmf.size, p=law.pmf, size=size)
    raise UnsupportedLawError(f"unknown mark law {type(law).__name__}")


# ---------------------------------------------------------------------------
# delay laws


@dataclass(frozen=True)
class DegenerateZero:
    """Point mass at zero; the undelayed (immediate first inspection) case."""


@dataclass(frozen=True)
class Exponential:
    """Exponential delay with the given rate (mean ``1/rate``)."""

    rate: float

    def __post_init__(self):
        if not self.rate > 0.0:
            raise DomainError(f"exponential rate must be positive, got {self.rate}")


@dataclass(frozen=True, eq=False)
class GeneralNonneg:
    """General nonnegative delay given by an LST evaluator and a quantile sampler.

    ``lst`` must accept complex arguments with nonnegative real part (it is
    also probed at nearby points for numerical derivatives).  ``quantile``
    maps a uniform variate in [0, 1) to a sample of the delay.
    """

    lst: Callable[[complex], complex]
    quantile: Callable[[float], float]


DelayLaw = Union[DegenerateZero, Exponential, GeneralNonneg]


def delay_lst(law: DelayLaw, z: complex) -> complex:
    """Laplace-Stieltjes transform E[exp(-z * delay)]."""
    z = complex(z)
    if isinstance(law, DegenerateZero):
        return 1.0 + 0.0j
    if isinstance(law, Exponential):
        denom = law.rate + z
        if abs(denom) < _UNIT_TOL:
            raise DomainError("exponential LST evaluated at its pole z = -rate")
        return law.rate / denom
    if isinstance(law, GeneralNonneg):
        return complex(law.lst(z))
    raise UnsupportedLawError(f"unknown delay law {type(law).__name__}")


def _delay_lst_derivs(law: DelayLaw, z: complex, order: int) -> list[complex]:
    """Derivatives d/dz^k of the LST at z for k = 1..order (order <= 3).

    Exact for the closed-form laws; central finite differences otherwise.
    """
    z = complex(z)
    if isinstance(law, DegenerateZero):
        return [0.0 + 0.0j] * order
    if isinstance(law, Exponential):
        m = law.rate
        out = [-m / (m + z) ** 2, 2.0 * m / (m + z) ** 3, -6.0 * m / (m + z) ** 4]
        return out[:order]
    if isinstance(law, GeneralNonneg):
        h = 1e-5 * (1.0 + abs(z))
        f = law.lst
        d1 = (complex(f(z + h)) - complex(f(z - h))) / (2.0 * h)
        out = [d1]
        if order >= 2:
            out.append((complex(f(z + h)) - 2.0 * complex(f(z)) + complex(f(z - h))) / h**2)
        if order >= 3:
            out.append(0.0 + 0.0j)  # third derivative is only a Taylor refinement
        return out
    raise UnsupportedLawError(f"unknown delay law {type(law).__name__}")


def delay_sample(law: DelayLaw, rng: np.random.Generator, size: int) -> np.ndarray:
    """Draw ``size`` iid delays."""
    if isinstance(law, DegenerateZero):
        return np.zeros(size)
    if isinstance(law, Exponential):
        return rng.exponential(1.0 / law.rate, size=size)
    if isinstance(law, GeneralNonneg):
        u = rng.random(size)
        return np.array([float(law.quantile(ui)) for ui in u])
    raise UnsupportedLawError(f"unknown delay law {type(law).__name__}")


# ---------------------------------------------------------------------------
# observation grid and full model


@dataclass(frozen=True)
class ObservationLaw:
    """Delay laws of the inspection grid: one initial gap, then iid recurring gaps.

    The recurring gap must be a.s. positive (DegenerateZero would freeze the
    grid), so only Exponential and GeneralNonneg are accepted there.
    """

    initial: DelayLaw
    recurring: DelayLaw

    def __post_init__(self):
        if not isinstance(self.initial, (DegenerateZero, Exponential, GeneralNonneg)):
            raise UnsupportedLawError(f"unsupported initial delay {type(self.initial).__name__}")
        if not isinstance(self.recurring, (Exponential, GeneralNonneg)):
            raise UnsupportedLawError(
                f"recurring delay must be Exponential or GeneralNonneg, got {type(self.recurring).__name__}"
            )


def obs_lst(law: ObservationLaw, which: str, z: complex) -> complex:
    """LST of the requested grid component, ``which`` in {"initial", "recurring"}."""
    if which == "initial":
        return delay_lst(law.initial, z)
    if which == "recurring":
        return delay_lst(law.recurring, z)
    raise DomainError(f'which must be "initial" or "recurring", got {which!r}')


@dataclass(frozen=True)
class ProcessModel:
    """Marked Poisson process watched through a delayed renewal grid.

    Attributes
    ----------
    rate : float
        Arrival intensity of the marked Poisson stream (lambda > 0).
    marks : MarkLaw
        Law of the integer mark attached to each arrival.
    observation : ObservationLaw
        Laws of the initial and recurring inspection gaps.
    threshold : int
        Crossing level M; the exit index is the first inspection with
        accumulated marks strictly above M.  Bounded by 10_000.
    """

    rate: float
    marks: MarkLaw
    observation: ObservationLaw
    threshold: int

    def __post_init__(self):
        if not self.rate > 0.0:
            raise DomainError(f"arrival rate must be positive, got {self.rate}")
        if not math.isfinite(self.rate):
            raise DomainError("arrival rate must be finite")
        m = self.threshold
        if not (isinstance(m, (int, np.integer)) and 0 <= m <= MAX_THRESHOLD):
            raise DomainError(f"threshold must be an integer in [0, {MAX_THRESHOLD}], got {m!r}")

    @property
    def initial_is_zero(self) -> bool:
        return isinstance(self.observation.initial, DegenerateZero)


# ---------------------------------------------------------------------------
# transform argument bundle


@dataclass(frozen=True)
class TransformArgs:
    """Arguments (theta, u, v, w, x, y) of the joint crossing functionals.

    theta damps the running time t, u tags the pre-crossing level, v the
    crossing level, w the pre-crossing epoch, x the final gap, and y the
    level A(t) at the running time.  Validity: |u|, |v|, |y| <= 1 and
    Re theta, Re w, Re x >= 0 (small numerical slack allowed).
    """

    theta: complex = 0.0
    u: complex = 1.0
    v: complex = 1.0
    w: complex = 0.0
    x: complex = 0.0
    y: complex = 1.0

    def validate(self) -> "TransformArgs":
        for name in ("u", "v", "y"):
            val = complex(getattr(self, name))
            if abs(val) > 1.0 + _UNIT_TOL:
                raise DomainError(f"|{name}| must be <= 1, got {abs(val)}")
        for name in ("theta", "w", "x"):
            val = complex(getattr(self, name))
            if val.real < -_UNIT_TOL:
                raise DomainError(f"Re {name} must be >= 0, got {val.real}")
        return self


# ---------------------------------------------------------------------------
# configuration loading

_TOP_KEYS = {"schema_version", "lambda", "marks", "obs", "threshold"}
_OBS_INITIAL = {"zero", "exp"}


def _require_keys(section: Mapping, allowed: set[str], where: str) -> None:
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in {where}")


def load_model(source: Union[str, Path, Mapping]) -> ProcessModel:
    """Build a :class:`ProcessModel` from a JSON file path or a mapping.

    Schema (version 1)::

        {
          "schema_version": 1,
          "lambda": 1.0,
          "marks": {"geometric": {"a": 0.5}}      # or {"pmf": [0, 0.3, 0.7]}
          "obs": {"mu": 1.0, "initial": "zero"},   # initial in {"zero", "exp"}
          "threshold": 3
        }

    Unknown keys anywhere are rejected (fail fast on typos).
    """
    if isinstance(source, (str, Path)):
        try:
            raw = json.loads(Path(source).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {source}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {source} is not valid JSON: {exc}") from exc
    else:
        raw = dict(source)
    if not isinstance(raw, Mapping):
        raise ConfigError("config root must be a JSON object")

    _require_keys(raw, _TOP_KEYS, "config root")
    for key in _TOP_KEYS:
        if key not in raw:
            raise ConfigError(f"missing required key {key!r}")
    if raw["schema_version"] != 1:
        raise ConfigError(f"unsupported schema_version {raw['schema_version']!r}")

    lam = raw["lambda"]
    if not (isinstance(lam, (int, float)) and lam > 0.0):
        raise ConfigError(f"lambda must be a positive number, got {lam!r}")

    marks_cfg = raw["marks"]
    if not isinstance(marks_cfg, Mapping):
        raise ConfigError("marks must be an object")
    _require_keys(marks_cfg, {"geometric", "pmf"}, "marks")
    if ("geometric" in marks_cfg) == ("pmf" in marks_cfg):
        raise ConfigError('marks needs exactly one of "geometric" or "pmf"')
    if "geometric" in marks_cfg:
        geo = marks_cfg["geometric"]
        if not isinstance(geo, Mapping):
            raise ConfigError("marks.geometric must be an object")
        _require_keys(geo, {"a"}, "marks.geometric")
        if "a" not in geo:
            raise ConfigError("marks.geometric.a is required")
        try:
            marks: MarkLaw = Geometric(float(geo["a"]))
        except (TypeError, ValueError, DomainError) as exc:
            raise ConfigError(f"bad marks.geometric.a: {exc}") from exc
    else:
        try:
            marks = GeneralDiscrete(marks_cfg["pmf"])
        except (TypeError, ValueError, DomainError) as exc:
            raise ConfigError(f"bad marks.pmf: {exc}") from exc

    obs_cfg = raw["obs"]
    if not isinstance(obs_cfg, Mapping):
        raise ConfigError("obs must be an object")
    _require_keys(obs_cfg, {"mu", "initial"}, "obs")
    for key in ("mu", "initial"):
        if key not in obs_cfg:
            raise ConfigError(f"obs.{key} is required")
    mu = obs_cfg["mu"]
    if not (isinstance(mu, (int, float)) and mu > 0.0):
        raise ConfigError(f"obs.mu must be a positive number, got {mu!r}")
    if obs_cfg["initial"] not in _OBS_INITIAL:
        raise ConfigError(f'obs.initial must be one of {sorted(_OBS_INITIAL)}, got {obs_cfg["initial"]!r}')
    initial: DelayLaw = DegenerateZero() if obs_cfg["initial"] == "zero" else Exponential(float(mu))
    observation = ObservationLaw(initial=initial, recurring=Exponential(float(mu)))

    thr = raw["threshold"]
    if not (isinstance(thr, int) and not isinstance(thr, bool)):
        raise ConfigError(f"threshold must be an integer, got {thr!r}")

    try:
        return ProcessModel(rate=float(lam), marks=marks, observation=observation, threshold=thr)
    except DomainError as exc:
        raise ConfigError(str(exc)) from exc
