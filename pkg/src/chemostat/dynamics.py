"""Trajectories of the competition model.

The integrator is the Dormand-Prince 5(4) embedded pair with the usual
mixed absolute/relative error norm. It works on plain Python floats: the
state has three components, where numpy call overhead would dominate.
"""
from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .equilibria import OperatingPoint, SteadyState, find_steady_states
from .errors import IntegrationError, ParameterError
from .growth import BioParams, GrowthModel, removal_rate

SETTLE_STEPS = 50
UNSETTLED = "unsettled"

# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
# difference between the 5th and embedded 4th order weights
_E = (
    71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40,
)


@dataclass(frozen=True)
class IntegratorConfig:
    rtol: float = 1e-8
    atol: float = 1e-10
    h_init: Optional[float] = None
    h_max: float = 1.0
    t_end: float = 500.0
    convergence_radius: float = 1e-6
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not (self.rtol > 0 and self.atol > 0):
            raise ParameterError("rtol and atol must be > 0")
        if not self.t_end > 0:
            raise ParameterError("t_end must be > 0")
        if not self.h_max > 0:
            raise ParameterError("h_max must be > 0")
        if self.h_init is not None and not self.h_init > 0:
            raise ParameterError("h_init must be > 0")
        if not self.convergence_radius > 0:
            raise ParameterError("convergence_radius must be > 0")
        if isinstance(self.max_steps, bool) or not isinstance(self.max_steps, int) or self.max_steps < 1:
            raise ParameterError("max_steps must be a positive integer")


@dataclass
class Trajectory:
    """Accepted steps of one integration.

    ``states`` is clamped at zero; ``min_raw`` records the most negative
    component seen before clamping.
    """

    times: np.ndarray
    states: np.ndarray
    n_accepted: int
    n_rejected: int
    settled_on: Optional[str] = None
    min_raw: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["t", "S", "x1", "x2"])
            for t, s in zip(self.times, self.states):
                w.writerow([f"{t:.12g}"] + [f"{v:.12g}" for v in s])


def rhs(state, op: OperatingPoint, model: GrowthModel, p: BioParams):
    """Vector field ``(dS/dt, dx1/dt, dx2/dt)`` of the competition model."""
    S, x1, x2 = state
    D = op.D
    f1 = model.rate(1, S, x2)
    f2 = model.rate(2, S, x1)
    return (
        D * (op.S_in - S) - f1 * x1 - f2 * x2,
        (f1 - removal_rate(1, D, p)) * x1,
        (f2 - removal_rate(2, D, p)) * x2,
    )


def _field(op, model, p):
    """Closure over the vector field for the inner loop.

    Tiny negative excursions are evaluated at zero: the rates are only
    defined on the nonnegative orthant.
    """
    D, S_in = op.D, op.S_in
    D1, D2 = removal_rate(1, D, p), removal_rate(2, D, p)
    rate = model.rate

    def f(y):
        S = y[0] if y[0] > 0.0 else 0.0
        x1 = y[1] if y[1] > 0.0 else 0.0
        x2 = y[2] if y[2] > 0.0 else 0.0
        r1 = rate(1, S, x2)
        r2 = rate(2, S, x1)
        return (D * (S_in - y[0]) - r1 * y[1] - r2 * y[2],
                (r1 - D1) * y[1],
                (r2 - D2) * y[2])

    return f


def omega_bound(op: OperatingPoint, p: BioParams) -> float:
    """Total mass level ``D S_in / min(D, D1, D2)`` of the attracting simplex."""
    D = op.D
    return D * op.S_in / min(D, removal_rate(1, D, p), removal_rate(2, D, p))


def integrate(ic, op: OperatingPoint, model: GrowthModel, p: BioParams,
              cfg: IntegratorConfig = IntegratorConfig(),
              equilibria: Optional[Sequence[SteadyState]] = None) -> Trajectory:
    """Integrate from ``ic`` until ``cfg.t_end`` or until settled.

    A trajectory is settled once it stays within ``cfg.convergence_radius``
    of one of ``equilibria`` (default: all steady states at ``op``) for
    50 consecutive accepted steps.
    """
    y = tuple(float(v) for v in ic)
    if len(y) != 3 or min(y) < 0 or not all(math.isfinite(v) for v in y):
        raise ParameterError(f"initial condition must be three finite values >= 0, got {ic!r}")
    if equilibria is None:
        equilibria = find_steady_states(op, model, p)
    targets = [(s.kind, s.state) for s in equilibria]
    f = _field(op, model, p)
    rtol, atol, radius = cfg.rtol, cfg.atol, cfg.convergence_radius
    t_end, h_max = cfg.t_end, cfg.h_max

    def nearest(y):
        best, best_d = None, math.inf
        for kind, s in targets:
            d = math.sqrt((y[0] - s[0]) ** 2 + (y[1] - s[1]) ** 2 + (y[2] - s[2]) ** 2)
            if d < best_d:
                best, best_d = kind, d
        return best, best_d

    times = [0.0]
    states = [y]
    t = 0.0
    k1 = f(y)
    if cfg.h_init is not None:
        h = cfg.h_init
    else:
        # Hairer-Norsett-Wanner starting step estimate
        sc = [atol + rtol * abs(v) for v in y]
        d0 = math.sqrt(sum((v / s) ** 2 for v, s in zip(y, sc)) / 3)
        d1 = math.sqrt(sum((v / s) ** 2 for v, s in zip(k1, sc)) / 3)
        h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h = min(h, h_max, t_end)

    n_acc = n_rej = 0
    settled, streak, last_kind = None, 0, None
    min_raw = min(y)
    kind, dist = nearest(y)
    if dist <= radius:
        streak, last_kind = 1, kind

    while t < t_end:
        if h < 1e-14 * max(1.0, abs(t)):
            raise IntegrationError(f"step size underflow at t={t:.6g}", t=t, state=y)
        if n_acc + n_rej >= cfg.max_steps:
            # tolerances below round-off can leave tiny accepted steps forever
            raise IntegrationError(f"{cfg.max_steps} steps taken by t={t:.6g}", t=t, state=y)
        if t + h > t_end:
            h = t_end - t
        ks = [k1]
        for s in range(1, 7):
            a = _A[s]
            yi = tuple(y[c] + h * sum(a[j] * ks[j][c] for j in range(s)) for c in range(3))
            ks.append(f(yi))
        y_new = yi  # stage 7 is evaluated at the 5th order solution (FSAL)
        err = 0.0
        for c in range(3):
            e = h * sum(_E[j] * ks[j][c] for j in range(7))
            sc = atol + rtol * max(abs(y[c]), abs(y_new[c]))
            err += (e / sc) ** 2
        err = math.sqrt(err / 3)

        if err <= 1.0:
            t += h
            y = y_new
            k1 = ks[6]
            n_acc += 1
            times.append(t)
            states.append(y)
            m = min(y)
            if m < min_raw:
                min_raw = m
            kind, dist = nearest(y)
            if dist <= radius:
                streak = streak + 1 if kind == last_kind else 1
                last_kind = kind
                if streak >= SETTLE_STEPS:
                    settled = kind
                    break
            else:
                streak, last_kind = 0, None
            fac = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
        else:
            n_rej += 1
            fac = max(0.2, 0.9 * err ** -0.2)
        h = min(h * fac, h_max)

    arr = np.maximum(np.array(states), 0.0)
    return Trajectory(
        times=np.array(times), states=arr, n_accepted=n_acc, n_rejected=n_rej,
        settled_on=settled, min_raw=min_raw,
        stats={"t_final": t, "max_mass": float(np.max(np.sum(states, axis=1)))},
    )


def _worker_count() -> int:
    env = os.environ.get("CHEMOSTAT_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return os.cpu_count() or 1


def _probe_one(args):
    ic, op, model, p, cfg, eq = args
    return integrate(ic, op, model, p, cfg, eq).settled_on or UNSETTLED


def basin_probe(op: OperatingPoint, model: GrowthModel, p: BioParams, ic_grid,
                cfg: IntegratorConfig = IntegratorConfig(),
                workers: Optional[int] = None) -> list[tuple[tuple, str]]:
    """Label each initial condition with the steady state it settles on.

    Results follow the order of ``ic_grid``. ``workers`` defaults to
    ``CHEMOSTAT_THREADS`` or the CPU count.
    """
    eq = find_steady_states(op, model, p)
    ics = [tuple(float(v) for v in ic) for ic in ic_grid]
    jobs = [(ic, op, model, p, cfg, eq) for ic in ics]
    n = workers or _worker_count()
    if n > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            labels = list(ex.map(_probe_one, jobs, chunksize=max(1, len(jobs) // (4 * n))))
    else:
        labels = [_probe_one(job) for job in jobs]
    return list(zip(ics, labels))


def positive_grid(op: OperatingPoint, p: BioParams, n: int = 5) -> list[tuple[float, float, float]]:
    """``n**3`` strictly positive initial conditions spread over the box below the mass bound."""
    top = omega_bound(op, p)
    ticks = [top * (k + 1) / (n + 1) for k in range(n)]
    return [(a, b, c) for a in ticks for b in ticks for c in ticks]
