"""Local stability of the steady states.

Each steady state is classified twice: once from the factored or
Routh-Hurwitz form of its characteristic polynomial, once from the
eigenvalues of the Jacobian. The two must agree outside a narrow marginal
band.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .equilibria import OperatingPoint, SteadyState, break_even
from .errors import ConsistencyError, ParameterError
from .growth import BioParams, GrowthModel, removal_rate

MARGINAL_BAND = 1e-9
BACKWARD_TOL = 1e-10

LES = "LES"
UNSTABLE = "Unstable"
MARGINAL = "Marginal"


@dataclass(frozen=True)
class StabilityReport:
    classification: str
    method: str
    eigenvalues: tuple = ()
    coefficients: dict = field(default_factory=dict)

    @property
    def letter(self) -> str:
        """``S`` for stable, ``U`` for unstable, ``M`` for marginal."""
        return {LES: "S", UNSTABLE: "U"}.get(self.classification, "M")


def jacobian(state, op: OperatingPoint, model: GrowthModel, p: BioParams) -> np.ndarray:
    """Jacobian of the vector field at ``state = (S, x1, x2)``."""
    S, x1, x2 = state
    if min(S, x1, x2) < 0:
        raise ParameterError(f"state must be componentwise >= 0, got {state!r}")
    D = op.D
    D1, D2 = removal_rate(1, D, p), removal_rate(2, D, p)
    f1, f2 = model.rate(1, S, x2), model.rate(2, S, x1)
    E = model.dS(1, S, x2)
    F = model.dS(2, S, x1)
    G = -model.dX(1, S, x2)
    H = -model.dX(2, S, x1)
    return np.array([
        [-D - x1 * E - x2 * F, -f1 + x2 * H, x1 * G - f2],
        [x1 * E, f1 - D1, -x1 * G],
        [x2 * F, -x2 * H, f2 - D2],
    ])


def char_poly(matrix) -> tuple:
    """Monic characteristic polynomial ``(1, c1, c2, c3)`` of a 3x3 matrix."""
    (a, b, c), (d, e, f), (g, h, i) = np.asarray(matrix, dtype=float).tolist()
    minors = (a * e - b * d) + (a * i - c * g) + (e * i - f * h)
    det = a * (e * i - f * h) - b * (d * i - f * g) + c * (d * h - e * g)
    return (1.0, -(a + e + i), minors, -det)


def eigenvalues(matrix) -> np.ndarray:
    """Eigenvalues of a real 3x3 matrix sorted by real part, largest first.

    Each root is checked against the characteristic polynomial; a relative
    backward error above ``1e-10`` raises :class:`ConsistencyError`.
    """
    A = np.asarray(matrix, dtype=float)
    if A.shape != (3, 3):
        raise ParameterError(f"expected a 3x3 matrix, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        raise ParameterError("matrix has non-finite entries")
    ev = np.linalg.eigvals(A).astype(complex)
    ev = ev[np.lexsort((-ev.imag, -ev.real))]
    _, c1, c2, c3 = char_poly(A)
    for lam in ev.tolist():
        value = ((lam + c1) * lam + c2) * lam + c3
        r = abs(lam)
        scale = r ** 3 + abs(c1) * r * r + abs(c2) * r + abs(c3)
        if abs(value) > BACKWARD_TOL * max(scale, 1.0):
            raise ConsistencyError(f"eigenvalue {lam} fails the characteristic polynomial check")
    return ev


def _sign_class(value, band=MARGINAL_BAND):
    """Classification from the largest growth exponent."""
    if value < -band:
        return LES
    if value > band:
        return UNSTABLE
    return MARGINAL


def classify_eigen(ev) -> str:
    return _sign_class(max(v.real for v in ev))


def classify(ss: SteadyState, op: OperatingPoint, model: GrowthModel, p: BioParams) -> StabilityReport:
    """Stability of ``ss`` from its characteristic polynomial, checked by eigenvalues."""
    D, S_in = op.D, op.S_in
    D1, D2 = removal_rate(1, D, p), removal_rate(2, D, p)
    J = jacobian(ss.state, op, model, p)
    ev = eigenvalues(J)

    if ss.kind == "E0":
        g1 = model.rate(1, S_in, 0.0) - D1
        g2 = model.rate(2, S_in, 0.0) - D2
        analytic = _sign_class(max(g1, g2))
        report = StabilityReport(analytic, "factored-polynomial", tuple(ev),
                                 {"roots": (-D, g1, g2)})
    elif ss.kind in ("E1", "E2"):
        i = 1 if ss.kind == "E1" else 2
        j = 3 - i
        lam = ss.S
        xi = ss.x1 if i == 1 else ss.x2
        Di, Dj = (D1, D2) if i == 1 else (D2, D1)
        slope = model.dS(i, lam, 0.0)
        k1 = D * (1.0 + slope * (S_in - lam) / Di)
        k2 = D * slope * (S_in - lam)
        if not (k1 > 0 and k2 > 0):
            raise ConsistencyError(f"quadratic factor of {ss.kind} has non-positive coefficients {k1}, {k2}")
        invasion = model.rate(j, lam, xi) - Dj
        analytic = _sign_class(invasion)
        names = ("q1", "q2") if i == 1 else ("r1", "r2")
        report = StabilityReport(analytic, "factored-polynomial", tuple(ev),
                                 {names[0]: k1, names[1]: k2, "invasion": invasion})
    elif ss.kind == "Estar":
        S, x1, x2 = ss.state
        E = model.dS(1, S, x2)
        F = model.dS(2, S, x1)
        G = -model.dX(1, S, x2)
        H = -model.dX(2, S, x1)
        c1 = D + E * x1 + F * x2
        c2 = D1 * E * x1 + D2 * F * x2 - (G * H + F * G + E * H) * x1 * x2
        c3 = -(D * G * H + D1 * F * G + D2 * E * H) * x1 * x2
        if not c3 < 0:
            raise ConsistencyError(f"c3 = {c3!r} is not negative at the coexistence state")
        analytic = UNSTABLE
        report = StabilityReport(analytic, "routh-hurwitz", tuple(ev), {"c1": c1, "c2": c2, "c3": c3})
    else:
        raise ParameterError(f"unknown steady-state kind {ss.kind!r}")

    numeric = classify_eigen(ev)
    if MARGINAL not in (analytic, numeric) and analytic != numeric:
        raise ConsistencyError(
            f"{ss.kind} at {op}: analytic {analytic} but eigenvalues say {numeric} ({ev})"
        )
    return report


def washout_is_les(op: OperatingPoint, model: GrowthModel, p: BioParams) -> bool:
    """Washout is stable iff ``S_in`` is below both break-even concentrations."""
    lams = [break_even(i, op.D, model, p) for i in (1, 2)]
    return all(lam is None or op.S_in < lam for lam in lams)


def with_stability(states, op: OperatingPoint, model: GrowthModel, p: BioParams) -> list[SteadyState]:
    """Copies of ``states`` carrying their :class:`StabilityReport`."""
    return [replace(s, stability=classify(s, op, model, p)) for s in states]
