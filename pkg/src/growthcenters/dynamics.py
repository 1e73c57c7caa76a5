"""Coupled autocatalytic growth with transfer coupling and a global environment term.

Each unit i carries an activity level W_i(t) that evolves as

    dW_i/dt = a_i W_i + sum_j a_ij W_j - sum_j a_ji W_i - b(W, t) W_i

where a_i is the endogenous rate, a_ij >= 0 the transfer rate from unit j into
unit i, and b a scalar environment term shared by all units. Rates carry a
"per month" label; no unit conversion is performed anywhere.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterator, Sequence

import numpy as np

from .errors import InputError, PositivityError

ENV_KINDS = ("zero", "constant", "mean_proportional", "time_table")

_KIND_ALIASES = {
    "zero": "zero",
    "constant": "constant",
    "meanproportional": "mean_proportional",
    "mean_proportional": "mean_proportional",
    "timetable": "time_table",
    "time_table": "time_table",
}


def _frozen_array(values, ndim: int, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != ndim:
        raise InputError(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InputError(f"{name} contains non-finite entries")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class EnvironmentTerm:
    """The scalar b(W, t).

    ``kind`` is one of ``zero``, ``constant`` (b = value), ``mean_proportional``
    (b = value * mean(W)) or ``time_table`` (piecewise-linear in t through
    ``table``, held constant outside the tabulated range).
    """

    kind: str = "zero"
    value: float = 0.0
    table: tuple[tuple[float, float], ...] = ()

    def __post_init__(self):
        kind = _KIND_ALIASES.get(str(self.kind).lower().replace("-", "_"))
        if kind is None:
            raise InputError(f"unknown environment kind {self.kind!r}; expected one of {ENV_KINDS}")
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "value", float(self.value))
        table = tuple((float(t), float(b)) for t, b in self.table)
        if kind == "time_table":
            if not table:
                raise InputError("time_table environment needs at least one (t, b) sample")
            ts = [t for t, _ in table]
            if any(t1 <= t0 for t0, t1 in zip(ts, ts[1:])):
                raise InputError("time_table sample times must be strictly increasing")
        object.__setattr__(self, "table", table)

    @classmethod
    def zero(cls) -> "EnvironmentTerm":
        return cls("zero")

    @classmethod
    def constant(cls, c: float) -> "EnvironmentTerm":
        return cls("constant", c)

    @classmethod
    def mean_proportional(cls, beta: float) -> "EnvironmentTerm":
        return cls("mean_proportional", beta)

    @classmethod
    def time_table(cls, samples: Sequence[tuple[float, float]]) -> "EnvironmentTerm":
        return cls("time_table", table=tuple(samples))

    @property
    def state_independent(self) -> bool:
        return self.kind != "mean_proportional"

    def __call__(self, w: np.ndarray, t: float) -> float:
        if self.kind == "zero":
            return 0.0
        if self.kind == "constant":
            return self.value
        if self.kind == "mean_proportional":
            return self.value * float(np.mean(w))
        ts, bs = zip(*self.table)
        return float(np.interp(t, ts, bs))

    def to_dict(self) -> dict:
        if self.kind == "zero":
            return {"kind": "zero", "params": {}}
        if self.kind == "constant":
            return {"kind": "constant", "params": {"c": self.value}}
        if self.kind == "mean_proportional":
            return {"kind": "mean_proportional", "params": {"beta": self.value}}
        return {"kind": "time_table", "params": {"samples": [list(p) for p in self.table]}}

    @classmethod
    def from_dict(cls, d: dict) -> "EnvironmentTerm":
        if not isinstance(d, dict) or "kind" not in d:
            raise InputError("env must be an object with a 'kind' field")
        kind = _KIND_ALIASES.get(str(d["kind"]).lower().replace("-", "_"))
        params = d.get("params") or {}
        try:
            if kind == "constant":
                return cls.constant(params["c"])
            if kind == "mean_proportional":
                return cls.mean_proportional(params["beta"])
            if kind == "time_table":
                return cls.time_table([tuple(p) for p in params["samples"]])
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad params for env kind {d['kind']!r}: {exc}") from exc
        return cls(d["kind"])


def is_irreducible(coupling: np.ndarray) -> bool:
    """Strong connectivity of the directed graph with an edge j -> i wherever coupling[i, j] > 0."""
    coupling = np.asarray(coupling)
    n = coupling.shape[0]
    if n <= 1:
        return True
    adj = coupling > 0
    np.fill_diagonal(adj, False)

    def reaches_all(succ: np.ndarray) -> bool:
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        stack = [0]
        while stack:
            v = stack.pop()
            for u in np.flatnonzero(succ[v] & ~seen):
                seen[u] = True
                stack.append(int(u))
        return bool(seen.all())

    # forward: successors of j are the i with coupling[i, j] > 0
    return reaches_all(adj.T) and reaches_all(adj)


@dataclass(frozen=True)
class GrowthSystem:
    a: np.ndarray
    coupling: np.ndarray
    env: EnvironmentTerm = field(default_factory=EnvironmentTerm)
    allow_reducible: bool = False

    def __post_init__(self):
        a = _frozen_array(self.a, 1, "a")
        coupling = _frozen_array(self.coupling, 2, "coupling")
        n = a.shape[0]
        if n < 1:
            raise InputError("system needs at least one unit")
        if coupling.shape != (n, n):
            raise InputError(f"coupling must be {n}x{n}, got {coupling.shape}")
        if np.any(np.diag(coupling) != 0):
            raise InputError("coupling diagonal must be zero")
        if np.any(coupling < 0):
            i, j = np.argwhere(coupling < 0)[0]
            raise InputError(f"coupling[{i}][{j}] = {coupling[i, j]} is negative")
        if not isinstance(self.env, EnvironmentTerm):
            raise InputError("env must be an EnvironmentTerm")
        if not self.allow_reducible and not is_irreducible(coupling):
            raise InputError(
                "coupling graph is not strongly connected; pass allow_reducible=True to accept it"
            )
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "coupling", coupling)

    @property
    def n(self) -> int:
        return self.a.shape[0]

    @cached_property
    def outflow(self) -> np.ndarray:
        """sum_j a_ji for each unit i: total rate at which i gives activity away."""
        out = self.coupling.sum(axis=0)
        out.setflags(write=False)
        return out

    @property
    def a_tilde(self) -> np.ndarray:
        return self.a - self.outflow

    def with_env(self, env: EnvironmentTerm) -> "GrowthSystem":
        return GrowthSystem(self.a, self.coupling, env, self.allow_reducible)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "a": self.a.tolist(),
            "coupling": self.coupling.tolist(),
            "env": self.env.to_dict(),
        }


@dataclass(frozen=True)
class StateVector:
    t: float
    w: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Samples W(t_k) stored row-wise: ``w[k]`` is the state at ``times[k]``."""

    times: np.ndarray
    w: np.ndarray
    step: float

    def __post_init__(self):
        times = np.array(self.times, dtype=float)
        w = np.array(self.w, dtype=float)
        if w.ndim != 2 or w.shape[0] != times.shape[0]:
            raise InputError(f"trajectory shape mismatch: times {times.shape}, w {w.shape}")
        if np.any(np.diff(times) <= 0):
            raise InputError("trajectory sample times must be strictly increasing")
        times.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "w", w)

    def __len__(self) -> int:
        return self.times.shape[0]

    @property
    def n(self) -> int:
        return self.w.shape[1]

    @property
    def samples(self) -> list[StateVector]:
        return list(self)

    def __iter__(self) -> Iterator[StateVector]:
        for t, w in zip(self.times, self.w):
            yield StateVector(float(t), w)

    @property
    def final(self) -> StateVector:
        return StateVector(float(self.times[-1]), self.w[-1])

    def shares(self) -> np.ndarray:
        return self.w / self.w.mean(axis=1, keepdims=True)


def _check_dim(system: GrowthSystem, w: np.ndarray) -> np.ndarray:
    w = np.asarray(w, dtype=float)
    if w.shape != (system.n,):
        raise InputError(f"state has shape {w.shape}, system has n = {system.n}")
    return w


def rhs(system: GrowthSystem, w, t: float = 0.0) -> np.ndarray:
    w = _check_dim(system, w)
    b = system.env(w, t)
    return system.a * w + system.coupling @ w - system.outflow * w - b * w


def rhs_regrouped(system: GrowthSystem, w, t: float = 0.0) -> np.ndarray:
    """Same dynamics with the terms proportional to W_i collected on the diagonal.

    The environment enters with a minus sign, matching ``rhs``; the regrouped
    form is therefore diag(a_i - outflow_i - b) W + A W.
    """
    w = _check_dim(system, w)
    b = system.env(w, t)
    return (system.a - system.outflow - b) * w + system.coupling @ w


def share_rhs(system: GrowthSystem, x, tol: float = 1e-8) -> np.ndarray:
    """Time derivative of the shares X_i = W_i / mean(W). The environment drops out."""
    x = _check_dim(system, x)
    if abs(x.mean() - 1.0) > tol:
        raise InputError(f"shares must have mean 1 (got {x.mean()!r})")
    drift = np.dot(system.a, x) / system.n
    return (system.a - drift - system.outflow) * x + system.coupling @ x


def aggregate(trajectory: Trajectory) -> np.ndarray:
    """Per-sample national average W(t) = mean_i W_i(t)."""
    return trajectory.w.mean(axis=1)


def random_uniform_w0(n: int, lo: float = 0.5, hi: float = 1.5, seed: int | None = 0) -> np.ndarray:
    if not 0 < lo <= hi:
        raise InputError(f"need 0 < lo <= hi, got lo={lo}, hi={hi}")
    return np.random.default_rng(seed).uniform(lo, hi, size=n)


def _step_count(t_end: float, dt: float) -> tuple[int, float]:
    """Number of full steps and the length of a trailing partial step (0 if none)."""
    ratio = t_end / dt
    k = round(ratio)
    if abs(ratio - k) <= 1e-9 * max(1.0, ratio):
        return int(k), 0.0
    k = math.floor(ratio)
    return int(k), t_end - k * dt


def rk4_step(f, t: float, w: np.ndarray, h: float) -> np.ndarray:
    k1 = f(w, t)
    k2 = f(w + 0.5 * h * k1, t + 0.5 * h)
    k3 = f(w + 0.5 * h * k2, t + 0.5 * h)
    k4 = f(w + h * k3, t + h)
    return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def integrate(system: GrowthSystem, w0, t_end: float, dt: float) -> Trajectory:
    """Fixed-step classical RK4 from t = 0 to ``t_end``, sampling every ``dt``.

    If ``t_end`` is not a multiple of ``dt`` the last step is shortened to land
    on ``t_end`` exactly. A step that yields any W_i <= 0 raises PositivityError.
    """
    w = _check_dim(system, w0).copy()
    if not dt > 0 or not t_end > 0:
        raise InputError(f"need dt > 0 and t_end > 0, got dt={dt}, t_end={t_end}")
    if np.any(w <= 0):
        raise InputError("initial state must be strictly positive")

    a, coupling, outflow, env = system.a, system.coupling, system.outflow, system.env
    diag = a - outflow

    def f(w, t):
        return diag * w + coupling @ w - env(w, t) * w

    n_full, tail = _step_count(t_end, dt)
    times = [k * dt for k in range(n_full + 1)]
    if tail:
        times.append(t_end)
    out = np.empty((len(times), system.n))
    out[0] = w
    for k in range(1, len(times)):
        t = times[k - 1]
        w = rk4_step(f, t, w, times[k] - t)
        if not np.all(w > 0):
            bad = int(np.flatnonzero(~(w > 0))[0])
            raise PositivityError(times[k], bad, float(w[bad]))
        out[k] = w
    return Trajectory(np.array(times), out, float(dt))
