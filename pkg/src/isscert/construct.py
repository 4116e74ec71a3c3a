"""Tilting a non-decreasing Lyapunov certificate into a decreasing one.

The correction function h accumulates the dwell-budget credit/debit of the
switching history; composing it with the per-mode transforms produces a
function W that decreases along flows at rate min{delta, 1}|phi| and never
increases across jumps, provided the signal honors its dwell spec.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .certify import Certificate, ViolationReport, _report
from .errors import ImageNotFullError
from .rates import PhiTransform
from .simulate import InputSignal, Trajectory
from .switching import (
    DwellSpec,
    ModePartition,
    SwitchingSignal,
    active_time,
    mdadt_slack,
    mdalt_slack,
)

JUMP_TOL = 1e-9
DEFAULT_DINI_COEFF = 10.0


def _activations(sig, p, s1, s2, count_at_start, count_at_end):
    n = 0
    for t, mode in sig.events():
        if mode != p:
            continue
        after_start = t > s1 or (count_at_start and t == s1)
        before_end = t < s2 or (count_at_end and t == s2)
        if after_start and before_end:
            n += 1
    return n


def correction(
    sig: SwitchingSignal,
    partition: ModePartition,
    dwell: DwellSpec,
    t: float,
    side: str = "right",
    unstable_left_limits: bool = False,
) -> float:
    """Correction value h(t) <= 0.

    Minimum over all switching instants t_j <= t (and the initial time) of 0
    and the weighted dwell-budget balance

        (sum over stable p of T_p(t_j, t) - tau_p N_p(t_j-, t)) (1 - delta)
      - (sum over unstable p of T_p(t_j, t) - tau_p N_p(t_j, t)) (1 + delta).

    Stable activation counts include an event at the window start (the
    left-limit endpoint); unstable ones do not, unless
    ``unstable_left_limits`` is set.  ``side="left"`` evaluates the left
    limit h(t-), which excludes an activation at t itself.
    """
    sig._check_range(t)
    count_at_end = side != "left"
    anchors = [sig.t0] + [ti for ti in sig.instants if ti < t or (count_at_end and ti == t)]
    best = 0.0
    for tj in anchors:
        stable_sum = 0.0
        for p in partition.stable & sig.mode_set:
            n = _activations(sig, p, tj, t, True, count_at_end)
            stable_sum += active_time(sig, p, tj, t) - dwell.tau[p] * n
        unstable_sum = 0.0
        for p in partition.unstable & sig.mode_set:
            n = _activations(sig, p, tj, t, unstable_left_limits, count_at_end)
            unstable_sum += active_time(sig, p, tj, t) - dwell.tau[p] * n
        value = stable_sum * (1 - dwell.delta) - unstable_sum * (1 + dwell.delta)
        best = min(best, value)
    return best


@dataclass(frozen=True)
class DecreasingCertificate:
    """W(t,x) built from a base certificate, a signal, and the correction."""

    cert: Certificate
    sig: SwitchingSignal
    unstable_left_limits: bool = False
    transforms: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.transforms:
            object.__setattr__(self, "transforms", self.cert.transforms())

    def h(self, t: float, side: str = "right") -> float:
        return correction(self.sig, self.cert.partition, self.cert.dwell, t,
                          side=side, unstable_left_limits=self.unstable_left_limits)

    def compose(self, v: float, mode_now: str, mode_prev: str, h_value: float) -> float:
        """Phi_inverse of the previous mode applied to Phi(v) + h."""
        if v <= 0.0:
            return 0.0
        inner = self.transforms[mode_now].value(v) + h_value
        return self.transforms[mode_prev].inverse(inner)

    def w(self, t: float, x) -> float:
        """The constructed function at (t, x); sigma(t0-) := sigma(t0)."""
        mode_now = self.sig.mode_at(t)
        mode_prev = self.sig.mode_before(t)
        v = float(self.cert.V[mode_now](t, np.atleast_1d(np.asarray(x, dtype=float))))
        return self.compose(v, mode_now, mode_prev, self.h(t))

    def h_bound(self) -> float:
        """Lower end of the proven correction range."""
        d = self.cert.dwell
        return -d.T_S * (1 - d.delta) - d.T_U * (1 + d.delta)


def build_decreasing(
    cert: Certificate,
    sig: SwitchingSignal,
    a_grid: Sequence[float] = (1.0,),
    check_preconditions: bool = True,
    unstable_left_limits: bool = False,
) -> DecreasingCertificate:
    """Assemble the decreasing certificate, enforcing the preconditions.

    Requires every mode's transform to have image all of R (raises
    ImageNotFull otherwise), the dwell conditions to hold on ``a_grid``, and
    the signal's dwell/leave slack to fit within the declared constants.
    Values below a transform's attained image are errors here; the
    clamp-to-zero convention belongs to decay-bound assembly only.
    """
    from .certify import check_dwell_conditions

    dec = DecreasingCertificate(cert, sig, unstable_left_limits)
    for p, tr in dec.transforms.items():
        if not tr.image_is_full():
            raise ImageNotFullError(
                f"transform of mode {p} does not cover R "
                f"(image [{tr.image_inf()}, {tr.image_sup()}])"
            )
    if check_preconditions:
        reports = [r for r in check_dwell_conditions(cert, sig, list(a_grid))
                   if r.kind != "dwell-inconclusive"]
        if reports:
            raise ValueError(
                f"dwell conditions fail at {len(reports)} grid point(s); "
                f"first: {reports[0]}"
            )
        slack_s = mdadt_slack(sig, cert.partition, cert.dwell.tau)
        if slack_s > cert.dwell.T_S + 1e-9:
            raise ValueError(
                f"signal dwell slack {slack_s} exceeds declared T_S={cert.dwell.T_S}")
        slack_u = mdalt_slack(sig, cert.partition, cert.dwell.tau)
        if slack_u > cert.dwell.T_U + 1e-9:
            raise ValueError(
                f"signal leave slack {slack_u} exceeds declared T_U={cert.dwell.T_U}")
    return dec


def certify_decrease(
    dec: DecreasingCertificate,
    traj: Trajectory,
    input: InputSignal,
    dini_coeff: float = DEFAULT_DINI_COEFF,
) -> list[ViolationReport]:
    """Monotonicity checks for the constructed function along a trajectory.

    Above the threshold chi(||u||inf): the forward-difference slope of W on
    each flow interval must not exceed -min{delta,1}|phi|(W), and W must not
    increase across any jump.  Below the threshold, post-jump W is checked
    against max{alpha3, chi}(||u||inf).
    """
    cert = dec.cert
    delta_eff = min(cert.dwell.delta, 1.0)
    u_norm = input.sup_norm
    threshold = cert.chi(u_norm)
    cap = max(cert.alpha3(u_norm), threshold)
    out = []
    for seg in traj.segments:
        ts, xs = seg.times, seg.states
        # Same-mode composition throughout: on the open flow interval the
        # previous mode equals the active one, and the right limit at the
        # segment start extends the flow inequality to the first difference.
        hs = [dec.h(float(t)) for t in ts]
        ws = [
            dec.compose(float(cert.V[seg.mode](float(t), x)), seg.mode, seg.mode, hv)
            for t, x, hv in zip(ts, xs, hs)
        ]
        for i in range(len(ts) - 1):
            step = float(ts[i + 1] - ts[i])
            if step <= 0 or ws[i] < threshold:
                continue
            slope = (ws[i + 1] - ws[i]) / step
            rhs = -delta_eff * cert.phi[seg.mode].magnitude(ws[i]) + dini_coeff * step
            if slope > rhs:
                out.append(_report("flow", ts[i], seg.mode, slope, rhs))
    for jr in traj.jump_records:
        v_pre = float(cert.V[jr.mode_before](jr.time, jr.pre_state))
        w_pre = dec.compose(v_pre, jr.mode_before, jr.mode_before,
                            dec.h(jr.time, side="left"))
        v_post = float(cert.V[jr.mode_after](jr.time, jr.post_state))
        w_post = dec.compose(v_post, jr.mode_after, jr.mode_before, dec.h(jr.time))
        if w_pre >= threshold:
            if w_post > w_pre + JUMP_TOL * (1 + abs(w_pre)):
                out.append(_report("jump", jr.time, jr.mode_before, w_post, w_pre))
        elif w_post > cap + JUMP_TOL * (1 + cap):
            out.append(_report("small-input-jump", jr.time, jr.mode_before, w_post, cap))
    return out
