"""Impulsive switched system models and trajectory generation.

Flows are integrated with the classical fixed-step 4th-order Runge-Kutta
scheme on each inter-switch interval, with the final partial step landing
exactly on the next switching instant; the mode's jump map is then applied.
Solutions are right-continuous: the stored state at a switching instant is
the post-jump state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping

import numpy as np

from .errors import NonFiniteError, StepTooLargeError
from .switching import SwitchingSignal

FINITE_LIMIT = 1e12


@dataclass(frozen=True)
class SystemModel:
    """Per-mode flow and jump maps of an impulsive switched system."""

    flows: Mapping[str, Callable]
    jumps: Mapping[str, Callable]
    state_dim: int
    input_dim: int

    def __post_init__(self):
        object.__setattr__(self, "flows", dict(self.flows))
        object.__setattr__(self, "jumps", dict(self.jumps))
        if set(self.flows) != set(self.jumps):
            raise ValueError("flows and jumps must cover the same mode set")


@dataclass(frozen=True)
class LinearSystemModel:
    """Linear specialization: flow A_p x + B_p u, jump J_p x + H_p u."""

    A: Mapping[str, np.ndarray]
    B: Mapping[str, np.ndarray]
    J: Mapping[str, np.ndarray]
    H: Mapping[str, np.ndarray]

    def __post_init__(self):
        for name in ("A", "B", "J", "H"):
            mats = {p: np.asarray(m, dtype=float) for p, m in getattr(self, name).items()}
            object.__setattr__(self, name, mats)
        n, m = self.dims
        for p in self.A:
            if self.A[p].shape != (n, n) or self.J[p].shape != (n, n):
                raise ValueError(f"state matrices of mode {p} have inconsistent shape")
            if self.B[p].shape != (n, m) or self.H[p].shape != (n, m):
                raise ValueError(f"input matrices of mode {p} have inconsistent shape")

    @property
    def dims(self) -> tuple[int, int]:
        p = next(iter(self.A))
        return self.A[p].shape[0], self.B[p].shape[1]

    def to_system_model(self) -> SystemModel:
        n, m = self.dims

        def make_flow(A, B):
            return lambda t, x, u: A @ x + B @ u

        def make_jump(J, H):
            return lambda t, x, u: J @ x + H @ u

        flows = {p: make_flow(self.A[p], self.B[p]) for p in self.A}
        jumps = {p: make_jump(self.J[p], self.H[p]) for p in self.A}
        return SystemModel(flows, jumps, n, m)


@dataclass(frozen=True)
class InputSignal:
    """Bounded input u(t) with a declared sup norm over the horizon."""

    func: Callable[[float], np.ndarray]
    sup_norm: float

    def __call__(self, t: float) -> np.ndarray:
        return np.atleast_1d(np.asarray(self.func(t), dtype=float))


def zero_input(m: int = 1) -> InputSignal:
    u = np.zeros(m)
    return InputSignal(lambda t: u, 0.0)


def constant_input(value) -> InputSignal:
    u = np.atleast_1d(np.asarray(value, dtype=float))
    return InputSignal(lambda t: u, float(np.linalg.norm(u)))


def sinusoid_input(amplitude, omega: float, phase: float = 0.0) -> InputSignal:
    a = np.atleast_1d(np.asarray(amplitude, dtype=float))
    return InputSignal(
        lambda t: a * math.sin(omega * t + phase), float(np.linalg.norm(a))
    )


def step_input(before, after, t_switch: float) -> InputSignal:
    """Piecewise-constant input with a single switch at t_switch."""
    u0 = np.atleast_1d(np.asarray(before, dtype=float))
    u1 = np.atleast_1d(np.asarray(after, dtype=float))
    bound = max(float(np.linalg.norm(u0)), float(np.linalg.norm(u1)))
    return InputSignal(lambda t: u0 if t < t_switch else u1, bound)


@dataclass(frozen=True)
class Segment:
    """Dense samples of one inter-switch flow interval."""

    mode: str
    times: np.ndarray
    states: np.ndarray  # shape (len(times), n)


@dataclass(frozen=True)
class JumpRecord:
    time: float
    pre_state: np.ndarray
    post_state: np.ndarray
    mode_before: str
    mode_after: str
    u_pre: np.ndarray


@dataclass(frozen=True)
class Trajectory:
    """Piecewise record of a simulated run, right-continuous at jumps."""

    segments: tuple[Segment, ...]
    jump_records: tuple[JumpRecord, ...]
    input: InputSignal
    step: float
    metadata: dict = field(default_factory=dict)

    @property
    def t0(self) -> float:
        return float(self.segments[0].times[0])

    @property
    def horizon(self) -> float:
        return float(self.segments[-1].times[-1])

    def final_state(self) -> np.ndarray:
        return self.segments[-1].states[-1]

    def sup_norm(self) -> float:
        return max(float(np.max(np.linalg.norm(seg.states, axis=1))) for seg in self.segments)

    def rows(self):
        """Flat (t, mode, x, jump_flag) rows; jumps contribute two rows at t_i."""
        out = []
        for k, seg in enumerate(self.segments):
            start = 0
            if k > 0:
                # The pre-jump row is the previous segment's final sample;
                # only the post-jump state needs its own flagged row.
                jr = self.jump_records[k - 1]
                out.append((jr.time, jr.mode_after, jr.post_state, 1))
                start = 1
            for t, x in zip(seg.times[start:], seg.states[start:]):
                out.append((float(t), seg.mode, x, 0))
        return out


def _rk4_segment(f, t_start, t_end, x0, input_sig, step):
    """Integrate one flow interval; returns (times, states) including endpoints."""
    span = t_end - t_start
    n_steps = max(1, math.ceil(span / step - 1e-12))
    times = np.linspace(t_start, t_end, n_steps + 1)
    states = np.empty((n_steps + 1, x0.size))
    states[0] = x0
    x = x0
    for i in range(n_steps):
        t, h = times[i], times[i + 1] - times[i]
        k1 = f(t, x, input_sig(t))
        k2 = f(t + h / 2, x + h / 2 * k1, input_sig(t + h / 2))
        k3 = f(t + h / 2, x + h / 2 * k2, input_sig(t + h / 2))
        k4 = f(t + h, x + h * k3, input_sig(t + h))
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        states[i + 1] = x
        if not np.all(np.isfinite(x)) or np.linalg.norm(x) > FINITE_LIMIT:
            return times[: i + 2], states[: i + 2], False
    return times, states, True


def simulate(
    model: SystemModel,
    sig: SwitchingSignal,
    x0,
    input: InputSignal,
    step: float,
) -> Trajectory:
    """Run the impulsive switched system over the signal's horizon.

    Raises NonFinite (with the partial trajectory attached) once the state
    norm exceeds 1e12, and StepTooLarge when the step exceeds the shortest
    inter-switch gap.
    """
    if step <= 0:
        raise ValueError("step must be > 0")
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    if not np.all(np.isfinite(x0)):
        raise ValueError("initial state must be finite")

    bounds = [sig.t0, *sig.instants, sig.horizon]
    gaps = [b - a for a, b in zip(bounds, bounds[1:]) if b > a]
    if gaps and step > min(gaps) + 1e-15:
        raise StepTooLargeError(
            f"step {step} exceeds shortest inter-switch gap {min(gaps)}"
        )

    if sig.horizon == sig.t0:
        seg = Segment(sig.modes[0], np.array([sig.t0]), x0[None, :].copy())
        return Trajectory((seg,), (), input, step, {"order": 4, "step": step})

    segments: list[Segment] = []
    jumps: list[JumpRecord] = []
    x = x0
    for k, (a, b, mode) in enumerate(sig.segments()):
        if b > a:
            times, states, ok = _rk4_segment(model.flows[mode], a, b, x, input, step)
            segments.append(Segment(mode, times, states))
            if not ok:
                partial = Trajectory(tuple(segments), tuple(jumps), input, step,
                                     {"order": 4, "step": step})
                raise NonFiniteError(
                    f"state norm exceeded {FINITE_LIMIT:.0e} at t={times[-1]}",
                    partial=partial,
                )
            x_pre = states[-1]
        else:
            segments.append(Segment(mode, np.array([a]), x[None, :].copy()))
            x_pre = x
        if k < len(sig.modes) - 1:
            t_i = sig.instants[k]
            # u(t_i^-) for merely piecewise-continuous inputs: sample half a
            # step before the instant.
            u_pre = input(t_i - step / 2)
            new_mode = sig.modes[k + 1]
            x_post = np.atleast_1d(np.asarray(
                model.jumps[mode](t_i, x_pre, u_pre), dtype=float))
            if not np.all(np.isfinite(x_post)) or np.linalg.norm(x_post) > FINITE_LIMIT:
                partial = Trajectory(tuple(segments), tuple(jumps), input, step,
                                     {"order": 4, "step": step})
                raise NonFiniteError(f"jump at t={t_i} produced non-finite state",
                                     partial=partial)
            jumps.append(JumpRecord(t_i, x_pre.copy(), x_post.copy(), mode, new_mode, u_pre))
            x = x_post
    return Trajectory(tuple(segments), tuple(jumps), input, step, {"order": 4, "step": step})


def _sample_inputs(D: float, m: int, horizon_mid: float, rng) -> list[InputSignal]:
    """Cheap family of bounded inputs: constants, sinusoids, one-switch steps."""
    if D == 0.0:
        return [zero_input(m)]
    def unit():
        v = rng.standard_normal(m)
        nv = np.linalg.norm(v)
        return v / nv if nv > 0 else np.eye(m)[0]
    out = []
    out.append(constant_input(D * unit()))
    out.append(sinusoid_input(D * unit(), omega=rng.uniform(0.5, 5.0),
                              phase=rng.uniform(0, 2 * math.pi)))
    out.append(step_input(D * unit(), D * unit() * rng.uniform(-1, 1), horizon_mid))
    return out


def _restrict(sig: SwitchingSignal, tau: float) -> SwitchingSignal:
    end = min(sig.horizon, sig.t0 + tau)
    instants = tuple(t for t in sig.instants if t <= end)
    modes = sig.modes[: len(instants) + 1]
    return SwitchingSignal(sig.t0, instants, modes, end)


def reachability_bound(
    model: SystemModel,
    sig: SwitchingSignal,
    C: float,
    D: float,
    tau: float,
    samples: int,
    step: float = 1e-2,
    seed: int = 0,
) -> float:
    """Monte-Carlo lower estimate of the reachable-state norm bound.

    Max over sampled initial states in the C-ball and sampled inputs bounded
    by D of the trajectory sup norm on [t0, t0 + tau].  An estimate, not a
    certificate.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if C == 0.0 and D == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    sub = _restrict(sig, tau)
    mid = sub.t0 + (sub.horizon - sub.t0) / 2
    best = 0.0
    for _ in range(samples):
        direction = rng.standard_normal(model.state_dim)
        norm = np.linalg.norm(direction)
        if norm > 0:
            direction /= norm
        x0 = direction * C * rng.uniform(0, 1) ** (1 / max(1, model.state_dim))
        for inp in _sample_inputs(D, model.input_dim, mid, rng):
            traj = simulate(model, sub, x0, inp, step)
            best = max(best, traj.sup_norm())
    return best


def lipschitz_estimate(
    model: SystemModel,
    sig: SwitchingSignal,
    C: float,
    D: float,
    tau: float,
    pairs: int,
    step: float = 1e-2,
    seed: int = 0,
) -> float:
    """Empirical Lipschitz factor of solutions w.r.t. initial values.

    Max over sampled initial-state pairs (same input) of the time-sup of
    ||x(t) - y(t)|| / ||x0 - y0||; pairs closer than 1e-12 are skipped.
    """
    if pairs < 1:
        raise ValueError("pairs must be >= 1")
    rng = np.random.default_rng(seed)
    sub = _restrict(sig, tau)
    mid = sub.t0 + (sub.horizon - sub.t0) / 2
    best = 0.0
    for _ in range(pairs):
        x0 = rng.uniform(-1, 1, model.state_dim) * C
        y0 = rng.uniform(-1, 1, model.state_dim) * C
        gap = np.linalg.norm(x0 - y0)
        if gap < 1e-12:
            continue
        for inp in _sample_inputs(D, model.input_dim, mid, rng):
            tx = simulate(model, sub, x0, inp, step)
            ty = simulate(model, sub, y0, inp, step)
            for sx, sy in zip(tx.segments, ty.segments):
                diff = np.linalg.norm(sx.states - sy.states, axis=1)
                best = max(best, float(np.max(diff)) / gap)
    return best
