"""Operating diagram over the feed concentration and the dilution rate.

The region boundaries come from the analytic characterisation of the steady
states: ``U1``/``U2`` are the break-even curves ``S_in = lambda_i(D)`` and
``U1c``/``U2c`` are where the isocline intercepts ``x_tilde_i`` and
``x_bar_i`` coincide. Crossing any of them is a transcritical bifurcation.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .equilibria import (TIE_BAND, OperatingPoint, break_even, break_evens, classify_case,
                         find_steady_states, x_bar, x_tilde)
from .errors import BracketError, ConsistencyError, ParameterError
from .growth import BioParams, GrowthModel, removal_rate
from .roots import bisect, sign_changes
from .stability import MARGINAL, classify, with_stability

CURVES = ("U1", "U2", "U1c", "U2c")
CURVE_COLORS = {"U1": "black", "U2": "blue", "U1c": "red", "U2c": "magenta"}
REGION_COLORS = {
    "J0": "white", "J1": "green", "J2": "pink", "J3": "yellow",
    "J4": "pink", "J5": "green", "Boundary": "gray",
}
# existence and stability letters per region; absent key = state does not exist
PROFILES = {
    "J0": {"E0": "S"},
    "J1": {"E0": "U", "E1": "S"},
    "J2": {"E0": "U", "E2": "S"},
    "J3": {"E0": "U", "E1": "S", "E2": "S", "Estar": "U"},
    "J4": {"E0": "U", "E1": "U", "E2": "S"},
    "J5": {"E0": "U", "E1": "S", "E2": "U"},
}
# curve crossed -> (colliding pair, state at the collision)
COLLISIONS = {
    "U1": ("E0", "E1"),
    "U2": ("E0", "E2"),
    "U1c": ("E1", "Estar"),
    "U2c": ("E2", "Estar"),
}
SCAN_POINTS = 2000
REFINE_TOL = 1e-8


@dataclass(frozen=True)
class OperatingRegion:
    label: str
    profile: dict = field(default_factory=dict)


@dataclass
class BoundaryCurve:
    id: str
    samples: list
    color: str = ""
    endpoints: list = field(default_factory=list)

    def __post_init__(self):
        if not self.color:
            self.color = CURVE_COLORS[self.id]


@dataclass(frozen=True)
class BifurcationPoint:
    parameter: str
    value: float
    type: str
    pair: tuple
    curve: str
    state: tuple


@dataclass(frozen=True)
class Codim2Candidate:
    """Location where two codimension-one conditions hold at once.

    ``kind`` is ``intersection`` (two boundary curves), ``neutral-saddle``
    (a break-even curve where two washout eigenvalues sum to zero) or
    ``zero-dilution-limit`` (end of a break-even curve as ``D -> 0+``).
    """

    S_in: float
    D: float
    curves: tuple
    state: tuple
    kind: str = "intersection"
    residuals: tuple = ()


@dataclass
class DiagramGrid:
    S_in: np.ndarray
    D: np.ndarray
    labels: np.ndarray  # shape (len(D), len(S_in))
    curves: list = field(default_factory=list)

    def counts(self) -> dict:
        vals, n = np.unique(self.labels, return_counts=True)
        return dict(zip(vals.tolist(), n.tolist()))

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["S_in", "D", "region"])
            for r, D in enumerate(self.D):
                for c, S in enumerate(self.S_in):
                    w.writerow([f"{S:.12g}", f"{D:.12g}", self.labels[r, c]])


def curves_to_csv(curves, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["curve_id", "S_in", "D"])
        for cv in curves:
            for S, D in cv.samples:
                w.writerow([cv.id, f"{S:.12g}", f"{D:.12g}"])


def indicator(curve: str, S_in: float, D: float, model: GrowthModel, p: BioParams) -> Optional[float]:
    """Signed defining function of ``curve`` at ``(S_in, D)``.

    ``U1``/``U2``: ``S_in - lambda_i(D)`` (``-inf`` when lambda_i is
    undefined). ``U1c``/``U2c``: ``x_tilde_i - x_bar_i``, ``None`` where
    ``x_bar_i`` does not exist.
    """
    if curve in ("U1", "U2"):
        lam = break_even(1 if curve == "U1" else 2, D, model, p)
        return -math.inf if lam is None else S_in - lam
    if curve not in ("U1c", "U2c"):
        raise ParameterError(f"unknown curve {curve!r}")
    i = 1 if curve == "U1c" else 2
    op = OperatingPoint(S_in, D)
    xt = x_tilde(i, op, model, p)
    xb = x_bar(i, op, model, p)
    if xt is None or xb is None:
        return None
    return xt - xb


def _profile(states) -> dict:
    return {s.kind: s.stability.letter for s in states}


def _table_label(op, model, p, lams):
    """Region from the break-even comparisons and the isocline case alone."""
    S_in = op.S_in
    gaps = [-math.inf if lam is None else S_in - lam for lam in lams]
    if any(abs(g) <= TIE_BAND for g in gaps):
        return "Boundary", None
    above1, above2 = gaps[0] > 0, gaps[1] > 0
    if not above1 and not above2:
        return "J0", None
    if above1 and not above2:
        return "J1", None
    if above2 and not above1:
        return "J2", None
    case = classify_case(op, model, p, lams)
    return {"Case1": "J5", "Case2": "J3", "Case3": "J4"}.get(case.label, "Boundary"), case


def classify_region(op: OperatingPoint, model: GrowthModel, p: BioParams,
                    validate: bool = True, lams: Optional[tuple] = None) -> OperatingRegion:
    """Region ``J0``..``J5`` of the operating point, or ``Boundary``.

    With ``validate`` the label's implied profile is compared with the
    steady states and stability reports computed at the point. ``lams``
    may carry the break-even concentrations at ``op.D``.
    """
    if lams is None:
        lams = break_evens(op.D, model, p)
    label, case = _table_label(op, model, p, lams)
    if label == "Boundary":
        return OperatingRegion("Boundary")
    profile = dict(PROFILES[label])
    if validate:
        states = find_steady_states(op, model, p, lams, case)
        computed = _profile(with_stability(states, op, model, p))
        if "M" in computed.values():
            return OperatingRegion("Boundary", computed)
        if computed != profile:
            raise ConsistencyError(f"{op}: region {label} expects {profile}, computed {computed}")
    return OperatingRegion(label, profile)


def _root_in_S(curve, D, lo, hi, model, p):
    def g(S):
        v = indicator(curve, S, D, model, p)
        return math.nan if v is None else v
    return float(bisect(g, float(lo), float(hi)))


def trace_boundary(curve: str, D_range, n: int, model: GrowthModel, p: BioParams,
                   S_in_max: float = 1e3) -> BoundaryCurve:
    """Sample ``curve`` over ``D_range``, at least ``n`` dilution rates.

    ``U1``/``U2`` are explicit. ``U1c``/``U2c`` are solved in ``S_in`` at
    each ``D``, bracketing around the previous solution first and falling
    back to a log-spaced scan of ``(max(lambda_1, lambda_2), S_in_max]``.
    Their ends (the crossing of ``U1`` with ``U2`` and the exit through
    ``S_in_max``) are added as nodes, and intervals where ``S_in`` jumps by
    more than 5% are subdivided.
    """
    if n < 2:
        raise ParameterError("need at least two samples")
    if curve not in CURVES:
        raise ParameterError(f"unknown curve {curve!r}")
    D_lo, D_hi = D_range
    Ds = [float(D) for D in np.linspace(D_lo, D_hi, n) if D > 0]
    if curve in ("U1", "U2"):
        i = 1 if curve == "U1" else 2
        samples = []
        for D in Ds:
            lam = break_even(i, D, model, p)
            if lam is not None and lam <= S_in_max:
                samples.append((lam, D))
        return BoundaryCurve(curve, samples, endpoints=_ends(samples))

    nodes = set(Ds)
    for D in _break_even_crossings(Ds, model, p):
        nodes.update(d for d in (D * (1 - 1e-9), D * (1 + 1e-9)) if Ds[0] <= d <= Ds[-1])
    top = [_value(curve, S_in_max, D, model, p) for D in Ds]
    for k in sign_changes(top):
        D = bisect(lambda d: _value(curve, S_in_max, d, model, p), Ds[k], Ds[k + 1])
        # one of the two sides has its root just inside the window
        nodes.update(d for d in (D * (1 - 1e-9), D * (1 + 1e-9)) if Ds[0] <= d <= Ds[-1])

    solved = {}
    prev = None
    for D in sorted(nodes):
        prev = solved[D] = _solve_at(curve, D, prev, S_in_max, model, p)

    for _ in range(8):
        keys = sorted(solved)
        extra = []
        for a, b in zip(keys, keys[1:]):
            Sa, Sb = solved[a], solved[b]
            if Sa is not None and Sb is not None and abs(Sa - Sb) > 0.05 * max(Sa, Sb):
                extra.append((0.5 * (a + b), Sa))
        if not extra:
            break
        for D, guess in extra:
            solved[D] = _solve_at(curve, D, guess, S_in_max, model, p)

    samples = [(solved[D], D) for D in sorted(solved) if solved[D] is not None]
    return BoundaryCurve(curve, samples, endpoints=_ends(samples))


def _solve_at(curve, D, guess, S_in_max, model, p):
    lams = break_evens(D, model, p)
    if None in lams:
        return None
    floor = max(lams) * (1 + 1e-9) + 1e-12
    if floor >= S_in_max:
        return None
    root = None
    if guess is not None:
        root = _warm_root(curve, D, guess, floor, S_in_max, model, p)
    if root is None:
        root = _scan_root(curve, D, floor, S_in_max, model, p)
    return root


def _break_even_crossings(Ds, model, p):
    """Dilution rates in the span of ``Ds`` where ``lambda_1 = lambda_2``."""
    def gap(D):
        l1, l2 = break_evens(D, model, p)
        return math.nan if l1 is None or l2 is None else l1 - l2

    vals = [gap(D) for D in Ds]
    return [bisect(gap, Ds[k], Ds[k + 1]) for k in sign_changes(vals)]


def _ends(samples):
    return [samples[0], samples[-1]] if samples else []


def _value(curve, S, D, model, p):
    v = indicator(curve, S, D, model, p)
    return math.nan if v is None else v


def _warm_root(curve, D, guess, lo, hi, model, p):
    g0 = _value(curve, guess, D, model, p) if lo < guess < hi else math.nan
    if math.isnan(g0):
        return None
    step = 1e-3 * guess
    for _ in range(40):
        a, b = max(lo, guess - step), min(hi, guess + step)
        ga, gb = _value(curve, a, D, model, p), _value(curve, b, D, model, p)
        if not math.isnan(ga) and (ga > 0) != (g0 > 0):
            return _root_in_S(curve, D, a, guess, model, p)
        if not math.isnan(gb) and (gb > 0) != (g0 > 0):
            return _root_in_S(curve, D, guess, b, model, p)
        if a == lo and b == hi:
            return None
        step *= 2
    return None


def _scan_root(curve, D, lo, hi, model, p, n=60):
    grid = np.geomspace(lo, hi, n)
    vals = [_value(curve, S, D, model, p) for S in grid]
    for k in sign_changes(vals):
        try:
            return _root_in_S(curve, D, grid[k], grid[k + 1], model, p)
        except BracketError:
            continue
    return None


def scan_dilution(S_in: float, D_range, model: GrowthModel, p: BioParams,
                  n: int = SCAN_POINTS) -> list[BifurcationPoint]:
    """Transcritical bifurcations met along ``D`` at fixed ``S_in``.

    Sign changes of the four curve indicators on a log-spaced grid are
    refined by bisection to ``1e-8``. Sorted by decreasing ``D``.
    """
    if not S_in > 0:
        raise ParameterError(f"S_in must be > 0, got {S_in!r}")
    D_lo, D_hi = D_range
    if not 0 < D_lo < D_hi:
        raise ParameterError(f"invalid D range {D_range!r}")
    Ds = np.geomspace(D_lo, D_hi, n)
    out = []
    for curve in CURVES:
        vals = [indicator(curve, S_in, D, model, p) for D in Ds]
        for k in sign_changes(vals):
            D = bisect(lambda d: _value(curve, S_in, d, model, p), Ds[k], Ds[k + 1],
                       xtol=REFINE_TOL * 1e-2)
            out.append(_bifurcation(curve, S_in, D, model, p))
    out.sort(key=lambda b: -b.value)
    return out


def _bifurcation(curve, S_in, D, model, p):
    pair = COLLISIONS[curve]
    if curve in ("U1", "U2"):
        state = (S_in, 0.0, 0.0)
    else:
        i = 1 if curve == "U1c" else 2
        lam = break_even(i, D, model, p)
        xt = x_tilde(i, OperatingPoint(S_in, D), model, p, lam)
        state = (lam, xt, 0.0) if i == 1 else (lam, 0.0, xt)
    return BifurcationPoint("D", float(D), "transcritical", pair, curve,
                            tuple(float(v) for v in state))


def branch_table(S_in: float, D_values, model: GrowthModel, p: BioParams) -> list[dict]:
    """Existence and stability letters of E0, E1, E2, Estar at each ``D``.

    A missing state is ``None``; ``M`` marks a marginal classification.
    """
    rows = []
    for D in D_values:
        op = OperatingPoint(S_in, D)
        states = with_stability(find_steady_states(op, model, p), op, model, p)
        row = {"D": float(D), "E0": None, "E1": None, "E2": None, "Estar": None}
        row["states"] = {}
        for s in states:
            row[s.kind] = s.stability.letter
            row["states"][s.kind] = s.state
        rows.append(row)
    return rows


def _worker_count():
    env = os.environ.get("CHEMOSTAT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _label_row(args):
    D, S_values, model, p, validate = args
    lams = break_evens(D, model, p)
    return [classify_region(OperatingPoint(S, D), model, p, validate, lams).label for S in S_values]


def grid_diagram(S_in_range, D_range, resolution, model: GrowthModel, p: BioParams,
                 curves: bool = True, validate: bool = True,
                 workers: Optional[int] = None) -> DiagramGrid:
    """Region label at each cell centre of a ``resolution`` grid.

    ``resolution`` is an int or ``(n_S_in, n_D)``. Rows are distributed over
    worker processes when more than one worker is available.
    """
    nS, nD = (resolution, resolution) if isinstance(resolution, int) else resolution
    if nS < 2 or nD < 2:
        raise ParameterError("resolution must be at least 2 per axis")
    (S0, S1), (D0, D1) = S_in_range, D_range
    S_vals = S0 + (np.arange(nS) + 0.5) * (S1 - S0) / nS
    D_vals = D0 + (np.arange(nD) + 0.5) * (D1 - D0) / nD
    jobs = [(float(D), [float(s) for s in S_vals], model, p, validate) for D in D_vals]
    n = workers or _worker_count()
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            rows = list(ex.map(_label_row, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    else:
        rows = [_label_row(j) for j in jobs]
    labels = np.array(rows, dtype=object)
    traced = []
    if curves:
        D_lo = max(D0, 1e-6 * max(D1, 1.0))
        traced = [trace_boundary(c, (D_lo, D1), max(nD, 50), model, p, S_in_max=S1)
                  for c in CURVES]
    return DiagramGrid(S_vals, D_vals, labels, traced)


def _x_bar_or_zero(i, op, model, p):
    xb = x_bar(i, op, model, p)
    return 0.0 if xb is None else xb


def _residuals(S_in, D, model, p):
    """Absolute defining residual of every curve at ``(S_in, D)``.

    On the break-even curves ``x_bar`` degenerates to zero, which is the
    value used here.
    """
    op = OperatingPoint(S_in, D)
    out = {}
    for i, name in ((1, "U1"), (2, "U2")):
        lam = break_even(i, D, model, p)
        out[name] = math.inf if lam is None else abs(S_in - lam)
    for i, name in ((1, "U1c"), (2, "U2c")):
        xt = x_tilde(i, op, model, p)
        out[name] = math.inf if xt is None else abs(xt - _x_bar_or_zero(i, op, model, p))
    return out


CODIM2_TOL = 1e-6


def codim2_candidates(model: GrowthModel, p: BioParams, D_range,
                      S_in_max: float = 1e3, n: int = 500) -> list[Codim2Candidate]:
    """Points of the operating plane where two bifurcation conditions meet.

    Searches along each curve for sign changes of the other curves'
    indicators, and along ``U1``/``U2`` for washout eigenvalue pairs summing
    to zero. When ``D_range`` starts at zero the ``D -> 0+`` ends of
    ``U1``/``U2`` are reported too, since the washout eigenvalue ``-D``
    vanishes there.
    """
    D_lo, D_hi = D_range
    found = []
    D_scan_lo = D_lo if D_lo > 0 else 1e-6 * max(D_hi, 1.0)
    Ds = np.geomspace(D_scan_lo, D_hi, n)

    # break-even curves against each other and against the other indicators
    for i, a in ((1, "U1"), (2, "U2")):
        def S_on(D, i=i):
            return break_even(i, D, model, p)

        for b in CURVES:
            if b == a or (a, b) == ("U2", "U1"):
                continue
            vals = []
            for D in Ds:
                S = S_on(D)
                vals.append(None if S is None or S > S_in_max else indicator(b, S, D, model, p))
            for k in sign_changes(vals):
                D = bisect(lambda d: _value(b, S_on(d), d, model, p), Ds[k], Ds[k + 1])
                found.append(_candidate(S_on(D), D, (a, b), "intersection", model, p))

        # neutral saddle: -D + (f_j(S_in, 0) - D_j) = 0 on U_i
        j = 3 - i

        def sum_zero(D, i=i, j=j):
            S = S_on(D)
            return math.nan if S is None else model.rate(j, S, 0.0) - removal_rate(j, D, p) - D

        vals = [sum_zero(D) for D in Ds]
        for k in sign_changes(vals):
            D = bisect(sum_zero, Ds[k], Ds[k + 1])
            found.append(_candidate(S_on(D), D, (a, f"N{j}"), "neutral-saddle", model, p))

        if D_lo <= 0:
            S0 = _zero_dilution_break_even(i, model, p)
            if S0 is not None and S0 <= S_in_max:
                found.append(Codim2Candidate(S0, 0.0, (a,), (S0, 0.0, 0.0), "zero-dilution-limit"))

    # the complementary curves against each other
    c1 = trace_boundary("U1c", (D_scan_lo, D_hi), 200, model, p, S_in_max)
    vals = [indicator("U2c", S, D, model, p) for S, D in c1.samples]
    for k in sign_changes(vals):
        (Sa, Da), (Sb, Db) = c1.samples[k], c1.samples[k + 1]

        def along(D, guess=(Sa + Sb) / 2):
            S = _warm_root("U1c", D, guess, 0.0, S_in_max, model, p)
            return math.nan if S is None else _value("U2c", S, D, model, p)

        D = bisect(along, Da, Db)
        S = _warm_root("U1c", D, (Sa + Sb) / 2, 0.0, S_in_max, model, p)
        found.append(_candidate(S, D, ("U1c", "U2c"), "intersection", model, p))

    return _merge(found)


def _candidate(S_in, D, curves, kind, model, p):
    """Candidate at ``(S_in, D)`` listing every curve whose residual vanishes there."""
    S_in, D = float(S_in), float(D)
    res = _residuals(S_in, D, model, p)
    names = tuple(curves) + tuple(c for c in CURVES if c not in curves and res[c] <= CODIM2_TOL)
    if "U1" in names or "U2" in names:
        state = (S_in, 0.0, 0.0)
    else:
        # E1 and Estar coincide on U1c
        op = OperatingPoint(S_in, D)
        lam = break_even(1, D, model, p)
        state = (lam, x_tilde(1, op, model, p, lam), 0.0)
    return Codim2Candidate(S_in, D, names, state, kind,
                           tuple((c, float(res[c])) for c in names if c in res))


def _merge(found, tol=1e-6):
    out = []
    for c in found:
        for k, o in enumerate(out):
            if abs(o.S_in - c.S_in) <= tol and abs(o.D - c.D) <= tol and o.kind == c.kind:
                curves = tuple(dict.fromkeys(o.curves + c.curves))
                out[k] = Codim2Candidate(o.S_in, o.D, curves, o.state, o.kind,
                                         tuple(dict.fromkeys(o.residuals + c.residuals)))
                break
        else:
            out.append(c)
    out.sort(key=lambda c: (-c.D, c.S_in))
    return out


def _zero_dilution_break_even(i, model, p):
    """``lim lambda_i(D)`` as ``D -> 0+``: root of ``f_i(S, 0) = a_i``."""
    a = p.death(i)
    if a <= 0 or a >= model.sup_rate(i):
        return None
    hi = 1.0
    while model.rate(i, hi, 0.0) <= a:
        hi *= 2
    return bisect(lambda S: model.rate(i, S, 0.0) - a, 0.0, hi)
