"""Steady states of the two-species competition chemostat.

All nonlinear equations solved here are monotone in the unknown, so each is
handled by :func:`chemostat.roots.bisect` on an explicit bracket.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import BracketError, ConsistencyError, DomainError, ParameterError
from .growth import BioParams, GrowthModel, removal_rate
from .roots import bisect

RESIDUAL_TOL = 1e-8
TIE_BAND = 1e-9
KINDS = ("E0", "E1", "E2", "Estar")


@dataclass(frozen=True)
class OperatingPoint:
    """Feed concentration ``S_in`` and dilution rate ``D``, both > 0."""

    S_in: float
    D: float

    def __post_init__(self):
        for name in ("S_in", "D"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not v > 0 or v == float("inf"):
                raise ParameterError(f"{name} must be a finite number > 0, got {v!r}")
            object.__setattr__(self, name, float(v))


@dataclass(frozen=True)
class SteadyState:
    kind: str
    S: float
    x1: float
    x2: float
    residual: float
    stability: Optional[object] = field(default=None, compare=False)

    @property
    def state(self) -> tuple[float, float, float]:
        return (self.S, self.x1, self.x2)


@dataclass(frozen=True)
class CaseLabel:
    """Relative position of the axis intercepts of the two isoclines.

    ``label`` is ``Case1``, ``Case2``, ``Case3``, ``Boundary`` (some
    comparison within the tie band) or ``Undefined`` (a species cannot
    persist on its own).
    """

    label: str
    x_tilde1: Optional[float] = None
    x_bar1: Optional[float] = None
    x_tilde2: Optional[float] = None
    x_bar2: Optional[float] = None


def _other(i):
    return 2 if i == 1 else 1


def in_membrane(x1: float, x2: float, op: OperatingPoint, p: BioParams) -> bool:
    """Whether ``(x1, x2)`` lies in the simplex ``D1 x1/D + D2 x2/D <= S_in``."""
    D = op.D
    return (
        x1 >= 0
        and x2 >= 0
        and removal_rate(1, D, p) * x1 + removal_rate(2, D, p) * x2 <= D * op.S_in
    )


def break_even(i: int, D: float, model: GrowthModel, p: BioParams) -> Optional[float]:
    """Substrate level where species ``i`` grows exactly at its removal rate.

    Returns ``None`` when ``rate(i, S, 0)`` never reaches the removal rate.
    """
    if not D > 0:
        raise ParameterError(f"dilution rate must be > 0, got {D!r}")
    Di = removal_rate(i, D, p)
    if Di >= model.sup_rate(i):
        return None
    hi = 1.0
    while model.rate(i, hi, 0.0) <= Di:
        hi *= 2.0
        if hi > 1e300:
            return None
    # relative tolerance keeps the iteration count bounded for large hi
    return bisect(lambda S: model.rate(i, S, 0.0) - Di, 0.0, hi, xtol=1e-12 * max(1.0, hi))


def x_tilde(i: int, op: OperatingPoint, model: GrowthModel, p: BioParams,
            lam: Optional[float] = None) -> Optional[float]:
    """Biomass of species ``i`` at its single-species equilibrium.

    May be zero or negative when ``S_in <= lambda_i``; ``None`` when the
    break-even concentration is undefined.
    """
    if lam is None:
        lam = break_even(i, op.D, model, p)
        if lam is None:
            return None
    return op.D * (op.S_in - lam) / removal_rate(i, op.D, p)


def x_bar(i: int, op: OperatingPoint, model: GrowthModel, p: BioParams) -> Optional[float]:
    """Amount of species ``i`` at which the other species' growth balances its removal.

    Solves ``f_j(S_in - D_i x_i / D, x_i) = D_j`` on ``[0, D S_in / D_i]``.
    The left side decreases in ``x_i``; ``None`` means it has no root there.
    """
    j = _other(i)
    D, S_in = op.D, op.S_in
    Di, Dj = removal_rate(i, D, p), removal_rate(j, D, p)
    hi = D * S_in / Di

    def g(xi):
        return model.rate(j, max(S_in - Di * xi / D, 0.0), xi) - Dj

    if g(0.0) <= 0.0:
        return None
    return bisect(g, 0.0, hi)


def curve_F(which: int, x1: float, op: OperatingPoint, model: GrowthModel, p: BioParams,
            x1_max: Optional[float] = None) -> float:
    """Isocline ``x2 = F_which(x1)``.

    ``F_1`` solves ``f1(S_in - D1 x1/D - D2 x2/D, x2) = D1`` and lives on
    ``[0, x_tilde1]``; ``F_2`` solves ``f2(..., x1) = D2`` on ``[0, x_bar1]``.
    ``x1_max`` skips recomputing the domain end when the caller has it.
    """
    if which not in (1, 2):
        raise ParameterError(f"curve index must be 1 or 2, got {which!r}")
    D, S_in = op.D, op.S_in
    D1, D2 = removal_rate(1, D, p), removal_rate(2, D, p)
    if x1_max is None:
        x1_max = x_tilde(1, op, model, p) if which == 1 else x_bar(1, op, model, p)
        if x1_max is None or x1_max <= 0:
            raise DomainError(f"F{which} is undefined at S_in={S_in}, D={D}")
    if not -1e-12 <= x1 <= x1_max + 1e-12:
        raise DomainError(f"x1={x1!r} outside [0, {x1_max!r}] for F{which}")
    x1 = min(max(x1, 0.0), x1_max)
    base = S_in - D1 * x1 / D
    hi = max(D * S_in - D1 * x1, 0.0) / D2

    if which == 1:
        def g(x2):
            return model.rate(1, max(base - D2 * x2 / D, 0.0), x2) - D1
    else:
        def g(x2):
            return model.rate(2, max(base - D2 * x2 / D, 0.0), x1) - D2

    if g(0.0) <= 0.0 or hi <= 0.0:
        return 0.0
    return bisect(g, 0.0, hi)


def _tie(value, band=TIE_BAND):
    return abs(value) <= band


def break_evens(D: float, model: GrowthModel, p: BioParams) -> tuple:
    """``(lambda_1(D), lambda_2(D))``; entries are ``None`` where undefined."""
    return break_even(1, D, model, p), break_even(2, D, model, p)


def classify_case(op: OperatingPoint, model: GrowthModel, p: BioParams,
                  lams: Optional[tuple] = None) -> CaseLabel:
    """Sort the operating point into Case 1, 2 or 3 of the isocline geometry.

    Case 1: ``x_bar1 < x_tilde1`` and ``x_tilde2 < x_bar2``; Case 2: both
    ``x_bar_i < x_tilde_i``; Case 3: ``x_tilde1 < x_bar1`` and
    ``x_bar2 < x_tilde2``. The sign of each comparison is cross-checked
    against the growth of the invader at the resident's equilibrium.
    ``lams`` may carry precomputed break-even concentrations at ``op.D``.
    """
    D, S_in = op.D, op.S_in
    lam1, lam2 = lams if lams is not None else break_evens(D, model, p)
    if lam1 is None or lam2 is None or S_in - lam1 <= TIE_BAND or S_in - lam2 <= TIE_BAND:
        return CaseLabel("Undefined")
    D1, D2 = removal_rate(1, D, p), removal_rate(2, D, p)
    xt1, xt2 = x_tilde(1, op, model, p, lam1), x_tilde(2, op, model, p, lam2)
    xb1, xb2 = x_bar(1, op, model, p), x_bar(2, op, model, p)
    if xb1 is None or xb2 is None:
        raise ConsistencyError(f"x_bar undefined although S_in exceeds both break-even levels at {op}")

    d1 = xb1 - xt1
    d2 = xb2 - xt2
    # invasion rates: negative iff x_bar_i < x_tilde_i
    inv1 = model.rate(2, lam1, xt1) - D2
    inv2 = model.rate(1, lam2, xt2) - D1
    for d, inv, name in ((d1, inv1, "1"), (d2, inv2, "2")):
        if not (_tie(d) or _tie(inv)) and (d < 0) != (inv < 0):
            raise ConsistencyError(
                f"x_bar{name} - x_tilde{name} = {d!r} disagrees with invasion rate {inv!r} at {op}"
            )

    vals = dict(x_tilde1=xt1, x_bar1=xb1, x_tilde2=xt2, x_bar2=xb2)
    if _tie(d1) or _tie(d2):
        return CaseLabel("Boundary", **vals)
    if d1 < 0 and d2 > 0:
        return CaseLabel("Case1", **vals)
    if d1 < 0 and d2 < 0:
        return CaseLabel("Case2", **vals)
    if d1 > 0 and d2 < 0:
        return CaseLabel("Case3", **vals)
    # both x_bar above x_tilde would need the isoclines to cross twice
    raise ConsistencyError(f"impossible isocline configuration at {op}: {vals}")


def residual(state, op: OperatingPoint, model: GrowthModel, p: BioParams) -> float:
    """Largest absolute component of the vector field at ``state``."""
    S, x1, x2 = state
    D = op.D
    f1 = model.rate(1, S, x2)
    f2 = model.rate(2, S, x1)
    return max(
        abs(D * (op.S_in - S) - f1 * x1 - f2 * x2),
        abs((f1 - removal_rate(1, D, p)) * x1),
        abs((f2 - removal_rate(2, D, p)) * x2),
    )


def _make(kind, S, x1, x2, op, model, p):
    res = residual((S, x1, x2), op, model, p)
    if res > RESIDUAL_TOL:
        raise ConsistencyError(f"{kind} at {op} has residual {res:.3e} > {RESIDUAL_TOL}")
    return SteadyState(kind, S, x1, x2, res)


def coexistence(op: OperatingPoint, model: GrowthModel, p: BioParams,
                case: Optional[CaseLabel] = None) -> Optional[SteadyState]:
    """The positive steady state, or ``None`` outside Case 2.

    The crossing of the isoclines is the root of ``F1 - F2``, increasing on
    ``(0, x_bar1)``. Because ``f2(S(x1, x2), x1) - D2`` decreases in ``x2``
    and vanishes at ``F2(x1)``, its value at ``x2 = F1(x1)`` has the
    opposite sign of ``F1 - F2``; bisecting that saves the inner solve for
    ``F2``.
    """
    if case is None:
        case = classify_case(op, model, p)
    if case.label != "Case2":
        return None
    xt1, xb1 = case.x_tilde1, case.x_bar1
    D, S_in = op.D, op.S_in
    D1, D2 = removal_rate(1, D, p), removal_rate(2, D, p)

    def neg_F(x1):
        x2 = curve_F(1, x1, op, model, p, x1_max=xt1)
        S = max(S_in - D1 * x1 / D - D2 * x2 / D, 0.0)
        return model.rate(2, S, x1) - D2

    try:
        x1 = bisect(neg_F, 0.0, min(xt1, xb1))
    except BracketError as exc:
        raise ConsistencyError(f"F1 - F2 has no sign change in Case 2 at {op}") from exc
    x2 = curve_F(1, x1, op, model, p, x1_max=xt1)
    S = S_in - D1 * x1 / D - D2 * x2 / D
    if not (S > 0 and x1 > 0 and x2 > 0):
        raise ConsistencyError(f"coexistence state ({S}, {x1}, {x2}) is not positive at {op}")
    return _make("Estar", S, x1, x2, op, model, p)


def find_steady_states(op: OperatingPoint, model: GrowthModel, p: BioParams,
                       lams: Optional[tuple] = None,
                       case: Optional[CaseLabel] = None) -> list[SteadyState]:
    """All steady states at ``op`` in the order E0, E1, E2, Estar.

    ``lams`` and ``case`` may be passed in when the caller already has them.
    """
    if lams is None:
        lams = break_evens(op.D, model, p)
    out = [SteadyState("E0", op.S_in, 0.0, 0.0, 0.0)]
    for i, lam in zip((1, 2), lams):
        if lam is None or op.S_in - lam <= 0:
            continue
        xt = x_tilde(i, op, model, p, lam)
        state = (lam, xt, 0.0) if i == 1 else (lam, 0.0, xt)
        out.append(_make(f"E{i}", *state, op, model, p))
    if case is None:
        case = classify_case(op, model, p, lams)
    star = coexistence(op, model, p, case)
    if star is not None:
        out.append(star)
    return out
