"""Growth kinetics for the two competing species.

The analysis modules only ever talk to a :class:`GrowthModel`: a pair of
rates ``f_i(S, x_j)`` that vanish without substrate, increase with the
substrate and decrease with the competitor. :class:`MonodInhibition` is the
shipped instance; :class:`RescaledModel` maps rates written for raw biomass
concentrations onto yield-scaled ones.
"""
from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import asdict, dataclass, fields

from .errors import ParameterError

SPECIES = (1, 2)
FD_STEP = 1e-6


def _check_species(i):
    if i not in SPECIES:
        raise ParameterError(f"species index must be 1 or 2, got {i!r}")


@dataclass(frozen=True)
class BioParams:
    """Fixed biological constants of the competition model.

    Attributes:
        m1, m2: maximum growth rates (1/time)
        K1, K2: half-saturation constants (concentration)
        beta1, beta2: inhibition of species i by the other species
        alpha1, alpha2: fraction of the dilution rate removing species i
        a1, a2: death rates (1/time)
        Y1, Y2: yield coefficients in (0, 1]
    """

    m1: float = 4.0
    K1: float = 1.5
    beta1: float = 1.2
    m2: float = 2.2
    K2: float = 2.0
    beta2: float = 0.1
    alpha1: float = 0.2
    alpha2: float = 0.5
    a1: float = 0.8
    a2: float = 0.2
    Y1: float = 1.0
    Y2: float = 1.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, bool) or not isinstance(v, (int, float)):
                raise ParameterError(f"{f.name} must be a number, got {v!r}")
            if not math.isfinite(v):
                raise ParameterError(f"{f.name} must be finite, got {v!r}")
            object.__setattr__(self, f.name, float(v))
        for name in ("m1", "m2", "K1", "K2"):
            if getattr(self, name) <= 0:
                raise ParameterError(f"{name} must be > 0")
        for name in ("beta1", "beta2", "a1", "a2"):
            if getattr(self, name) < 0:
                raise ParameterError(f"{name} must be >= 0")
        for name in ("alpha1", "alpha2"):
            if not 0 <= getattr(self, name) <= 1:
                raise ParameterError(f"{name} must lie in [0, 1]")
        for name in ("Y1", "Y2"):
            if not 0 < getattr(self, name) <= 1:
                raise ParameterError(f"{name} must lie in (0, 1]")
        for i in SPECIES:
            if self.alpha(i) == 0 and self.death(i) == 0:
                raise ParameterError(
                    f"alpha{i} and a{i} are both zero: species {i} is never removed"
                )

    def m(self, i):
        return self.m1 if i == 1 else self.m2

    def K(self, i):
        return self.K1 if i == 1 else self.K2

    def beta(self, i):
        return self.beta1 if i == 1 else self.beta2

    def alpha(self, i):
        return self.alpha1 if i == 1 else self.alpha2

    def death(self, i):
        return self.a1 if i == 1 else self.a2

    def yield_(self, i):
        return self.Y1 if i == 1 else self.Y2

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "BioParams":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown parameter(s): {sorted(unknown)}")
        return cls(**data)


def removal_rate(i: int, D: float, p: BioParams) -> float:
    """Removal rate ``alpha_i * D + a_i`` of species ``i``."""
    _check_species(i)
    if not D >= 0:
        raise ParameterError(f"dilution rate must be >= 0, got {D!r}")
    return p.alpha(i) * D + p.death(i)


class GrowthModel(ABC):
    """Pair of density-dependent growth rates ``f_i(S, x_other)``.

    Subclasses must provide :meth:`rate` and :meth:`sup_rate`. The partial
    derivatives default to central differences; override them when closed
    forms are available.
    """

    @abstractmethod
    def rate(self, i: int, S: float, x: float) -> float:
        """Growth rate of species ``i`` at substrate ``S`` and competitor ``x``."""

    @abstractmethod
    def sup_rate(self, i: int) -> float:
        """Limit of ``rate(i, S, 0)`` as ``S`` grows without bound."""

    def dS(self, i: int, S: float, x: float) -> float:
        h = FD_STEP * max(1.0, abs(S))
        if S < h:
            return (self.rate(i, S + h, x) - self.rate(i, S, x)) / h
        return (self.rate(i, S + h, x) - self.rate(i, S - h, x)) / (2 * h)

    def dX(self, i: int, S: float, x: float) -> float:
        h = FD_STEP * max(1.0, abs(x))
        if x < h:
            return (self.rate(i, S, x + h) - self.rate(i, S, x)) / h
        return (self.rate(i, S, x + h) - self.rate(i, S, x - h)) / (2 * h)


def _check_state(S, x):
    if not (S >= 0 and x >= 0):
        raise ParameterError(f"concentrations must be >= 0, got S={S!r}, x={x!r}")


def monod_inhibition(i: int, S: float, x_other: float, p: BioParams) -> float:
    """Monod growth inhibited by the competitor: ``m S / (K + S + beta x)``."""
    _check_species(i)
    _check_state(S, x_other)
    return p.m(i) * S / (p.K(i) + S + p.beta(i) * x_other)


def monod_inhibition_partials(
    i: int, S: float, x_other: float, p: BioParams
) -> tuple[float, float]:
    """Closed-form ``(d rate/dS, d rate/dx_other)`` of :func:`monod_inhibition`."""
    _check_species(i)
    _check_state(S, x_other)
    m, K, b = p.m(i), p.K(i), p.beta(i)
    den = K + S + b * x_other
    return m * (K + b * x_other) / (den * den), -m * S * b / (den * den)


@dataclass(frozen=True)
class MonodInhibition(GrowthModel):
    """Monod kinetics with interspecific inhibition, parameterised by ``p``."""

    p: BioParams = BioParams()

    def rate(self, i, S, x):
        p = self.p
        if i == 1:
            return p.m1 * S / (p.K1 + S + p.beta1 * x)
        return p.m2 * S / (p.K2 + S + p.beta2 * x)

    def dS(self, i, S, x):
        return monod_inhibition_partials(i, S, x, self.p)[0]

    def dX(self, i, S, x):
        return monod_inhibition_partials(i, S, x, self.p)[1]

    def sup_rate(self, i):
        return self.p.m(i)


@dataclass(frozen=True)
class RescaledModel(GrowthModel):
    """Rates in yield-scaled variables: ``f_i(S, x_j) = Y_i mu_i(S, Y_j x_j)``."""

    base: GrowthModel
    Y1: float
    Y2: float

    def _scales(self, i):
        return (self.Y1, self.Y2) if i == 1 else (self.Y2, self.Y1)

    def rate(self, i, S, x):
        yi, yj = self._scales(i)
        return yi * self.base.rate(i, S, yj * x)

    def dS(self, i, S, x):
        yi, yj = self._scales(i)
        return yi * self.base.dS(i, S, yj * x)

    def dX(self, i, S, x):
        yi, yj = self._scales(i)
        return yi * yj * self.base.dX(i, S, yj * x)

    def sup_rate(self, i):
        return self._scales(i)[0] * self.base.sup_rate(i)


def rescale_from_yields(mu_pair: GrowthModel, p: BioParams) -> GrowthModel:
    """Map rates ``mu_i(S, X_j)`` written for raw biomass onto ``x_i = X_i / Y_i``.

    Unit yields return ``mu_pair`` unchanged.
    """
    for name in ("Y1", "Y2"):
        y = getattr(p, name, None)
        if y is None or not 0 < y <= 1:
            raise ParameterError(f"{name} must lie in (0, 1], got {y!r}")
    if p.Y1 == 1.0 and p.Y2 == 1.0:
        return mu_pair
    return RescaledModel(mu_pair, p.Y1, p.Y2)


def default_model(p: BioParams) -> GrowthModel:
    """Monod-inhibition rates for ``p``, rescaled by its yields."""
    return rescale_from_yields(MonodInhibition(p), p)
