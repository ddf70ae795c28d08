"""Direct integration of network ODEs: fixed-step RK4 and relaxation to steady states.

The flows here are computed from the network field itself, with no use of the
reduction, so they serve as an independent check of it.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NumericalFailure
from .network import NetworkSpec, admissible_field
from .polyalg import PolyField

__all__ = [
    "Trajectory",
    "SteadyState",
    "network_vector_field",
    "rk4",
    "integrate",
    "step_halving_error",
    "relax_to_steady",
    "synchrony_deviation",
    "BLOWUP_NORM",
    "T_MAX",
]

BLOWUP_NORM = 1e6
T_MAX = 1e4


@dataclass
class Trajectory:
    times: np.ndarray
    states: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.states = np.asarray(self.states, dtype=float)
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("sample times must increase strictly")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("trajectory contains non-finite states")

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    @property
    def blew_up(self) -> bool:
        return bool(self.meta.get("blowup", False))

    def to_csv(self) -> str:
        n = self.states.shape[1]
        lines = ["t," + ",".join(f"x{i + 1}" for i in range(n))]
        for t, x in zip(self.times, self.states):
            lines.append(f"{t:.10g}," + ",".join(f"{v:.17g}" for v in x))
        return "\n".join(lines) + "\n"


@dataclass
class SteadyState:
    point: np.ndarray
    residual: float
    time: float
    polished: bool
    eigenvalues: np.ndarray

    @property
    def stable(self) -> bool:
        return bool(np.all(self.eigenvalues.real < 0))


def network_vector_field(spec: NetworkSpec | None, f: PolyField, lam: float):
    """``x ↦ γ_f(x, λ)`` and its state Jacobian for a fixed ``λ``.

    With ``spec=None`` the field ``f`` is taken as the network field already
    (inputs: the state followed by ``λ``).
    """
    F = f if spec is None else admissible_field(spec, f)
    n = F.n_in - 1
    DF = [F.derivative(i) for i in range(n)]
    J = PolyField.stack(DF) if n else None

    def rhs(x):
        return F(np.append(x, lam))

    def jac(x):
        return J(np.append(x, lam)).reshape(n, F.n_out).T

    return rhs, jac


def rk4(rhs, x0, T: float, h: float, blowup: float = BLOWUP_NORM, record_every: int = 1):
    """Classical fixed-step RK4 on ``[0, T]``; the last step is shortened to land on ``T``.

    Returns ``(times, states, blew_up)``; integration stops at the first state
    whose norm exceeds ``blowup``, which is kept as the last sample.
    """
    if h <= 0 or T <= 0:
        raise ValueError("step and horizon must be positive")
    steps = int(np.ceil(T / h - 1e-9))
    x = np.array(x0, dtype=float)
    ts, xs = [0.0], [x.copy()]
    t = 0.0
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(steps):
            dt = min(h, T - t)
            k1 = rhs(x)
            k2 = rhs(x + 0.5 * dt * k1)
            k3 = rhs(x + 0.5 * dt * k2)
            k4 = rhs(x + dt * k3)
            x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = T if k == steps - 1 else t + dt
            bad = not np.all(np.isfinite(x)) or np.linalg.norm(x) > blowup
            if bad or (k + 1) % record_every == 0 or k == steps - 1:
                if not np.all(np.isfinite(x)):
                    return np.array(ts), np.array(xs), True
                ts.append(t)
                xs.append(x.copy())
            if bad:
                return np.array(ts), np.array(xs), True
    return np.array(ts), np.array(xs), False


def integrate(spec: NetworkSpec | None, f: PolyField, x0, lam: float, T: float, h: float = 0.01, *,
              record_every: int = 1, verify: bool = False, seed: int | None = None) -> Trajectory:
    """Integrate the network field from ``x0`` over ``[0, T]``.

    A blow-up ends the run early and is flagged in ``meta``. With ``verify`` the
    run is repeated at step ``h/2`` and the Richardson estimate of the global
    error per unit time is stored as ``meta["error_per_unit_time"]``.
    """
    rhs, _ = network_vector_field(spec, f, lam)
    ts, xs, blew = rk4(rhs, x0, T, h, record_every=record_every)
    meta = {"method": "rk4", "h": h, "T": T, "lambda": lam, "blowup": blew, "blowup_norm": BLOWUP_NORM,
            "seed": seed}
    if verify and not blew:
        meta["error_per_unit_time"] = step_halving_error(rhs, x0, T, h)
    return Trajectory(ts, xs, meta)


def step_halving_error(rhs, x0, T: float, h: float) -> float:
    """Endpoint error estimate ``‖x_h − x_{h/2}‖ / 15`` per unit time."""
    _, a, _ = rk4(rhs, x0, T, h, record_every=10 ** 9)
    _, b, _ = rk4(rhs, x0, T, h / 2, record_every=10 ** 9)
    return float(np.linalg.norm(a[-1] - b[-1]) / 15.0 / T)


def _newton(rhs, jac, x, tol: float, iters: int = 30):
    """Newton iteration that gives up unless it contracts from the first step.

    Steps must at least halve each time and the root must lie within twice the
    first step of ``x``; otherwise the start is not in the quadratic regime of
    the root it would land on, and ``(x, False)`` is returned.
    """
    x0 = x
    first = prev = None
    for _ in range(iters):
        r = rhs(x)
        if np.linalg.norm(r) <= tol:
            return x, first is None or np.linalg.norm(x - x0) <= 2 * first
        try:
            s = np.linalg.solve(jac(x), r)
        except np.linalg.LinAlgError:
            return x, False
        step = float(np.linalg.norm(s))
        if not np.isfinite(step) or (prev is not None and step > 0.5 * prev and step > tol):
            return x, False
        first = step if first is None else first
        prev = step
        x = x - s
    return x, False


def relax_to_steady(spec: NetworkSpec | None, f: PolyField, x0, lam: float, *, T_max: float = T_MAX,
                    h: float | None = None, tol: float = 1e-12, chunk: float = 10.0,
                    polish_below: float = 1e-6) -> SteadyState:
    """Follow the flow from ``x0`` until it settles, then Newton-polish.

    The flow is integrated in chunks of length ``chunk``. After the first
    chunk, once the residual is below ``polish_below`` a Newton polish is tried; it is accepted only if
    Newton contracts from the current state and lands on a linearly stable
    equilibrium, so a passage near a saddle is not mistaken for convergence.
    Raises ``NumericalFailure`` on blow-up or when ``T_max`` is reached, with
    the final residual in ``diagnostics``.
    """
    rhs, jac = network_vector_field(spec, f, lam)
    x = np.array(x0, dtype=float)
    if h is None:
        rho = float(np.abs(np.linalg.eigvals(jac(x))).max(initial=0.0))
        h = min(0.1, 1.0 / max(rho, 1e-12))
    t = 0.0
    while True:
        res = float(np.linalg.norm(rhs(x)))
        if res <= tol:
            return SteadyState(x, res, t, False, np.linalg.eigvals(jac(x)))
        if t > 0 and res <= polish_below:
            y, ok = _newton(rhs, jac, x, tol)
            if ok:
                ev = np.linalg.eigvals(jac(y))
                if np.all(ev.real < 0):
                    return SteadyState(y, float(np.linalg.norm(rhs(y))), t, True, ev)
        if t >= T_max:
            raise NumericalFailure(f"no steady state within T_max = {T_max:g} (residual {res:.3g})",
                                   {"residual": res, "time": t, "state": x.tolist()})
        span = min(chunk, T_max - t)
        _, xs, blew = rk4(rhs, x, span, h, record_every=10 ** 9)
        if blew:
            raise NumericalFailure(f"blow-up after t = {t:g}", {"time": t, "state": xs[-1].tolist()})
        x = xs[-1]
        t += span


def synchrony_deviation(traj: Trajectory, classes) -> float:
    """Largest spread within any class of cells along a trajectory (0-based classes)."""
    dev = 0.0
    for cls in classes:
        cls = list(cls)
        if len(cls) > 1:
            block = traj.states[:, cls]
            dev = max(dev, float((block.max(axis=1) - block.min(axis=1)).max()))
    return dev
