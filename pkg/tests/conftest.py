"""Shared fixtures: a two-mode scalar family used across end-to-end tests.

Mode "s" contracts (flow -1.25 x + 0.5 u, declared rate -v), mode "u"
expands (flow 0.4 x + 0.5 u, declared rate +v); both jump x -> 0.1 x.
Equal rate magnitudes keep the transform dwell conditions level-independent,
so the constructed decreasing function works at arbitrarily small values.
The threshold chi(r) = 32 r^2 makes the declared rates valid whenever the
Lyapunov value V = x^2 sits above it, and the alternating signal spends
exactly the dwell time 1.0 in "s" and the leave time 0.25 in "u".
"""

import numpy as np
import pytest

import isscert as iss


def make_family_signal(cycles: int = 4) -> iss.SwitchingSignal:
    instants = []
    modes = ["s"]
    t = 0.0
    for _ in range(cycles):
        t += 1.0
        instants.append(t)
        modes.append("u")
        t += 0.25
        instants.append(t)
        modes.append("s")
    instants.pop()
    modes.pop()
    return iss.SwitchingSignal(0.0, tuple(instants), tuple(modes), t)


def make_family_model() -> iss.LinearSystemModel:
    return iss.LinearSystemModel(
        A={"s": [[-1.25]], "u": [[0.4]]},
        B={"s": [[0.5]], "u": [[0.5]]},
        J={"s": [[0.1]], "u": [[0.1]]},
        H={"s": [[0.0]], "u": [[0.0]]},
    )


def make_family_certificate(sig: iss.SwitchingSignal) -> iss.Certificate:
    partition = iss.ModePartition(frozenset({"s"}), frozenset({"u"}))
    tau = {"s": 1.0, "u": 0.25}
    t_s = iss.mdadt_slack(sig, partition, tau)
    t_u = iss.mdalt_slack(sig, partition, tau)
    dwell = iss.DwellSpec(tau, 0.2, T_S=t_s, T_U=t_u)
    v = iss.quadratic_v([[1.0]])
    return iss.Certificate(
        V={"s": v, "u": v},
        alpha1=iss.power_cf(1.0, 2.0),
        alpha2=iss.power_cf(1.0, 2.0),
        alpha3=iss.power_cf(1.0, 2.0),
        chi=iss.power_cf(32.0, 2.0),
        phi={"s": iss.linear_rate(-1.0), "u": iss.linear_rate(1.0)},
        psi={"s": iss.linear_rate(0.01), "u": iss.linear_rate(0.01)},
        partition=partition,
        dwell=dwell,
    )


FAMILY_A_GRID = tuple(np.logspace(0.0, 4.0, 9))
FAMILY_ENVELOPES = (iss.linear_rate(1.0), iss.linear_rate(2.0))


@pytest.fixture(scope="session")
def family_signal():
    return make_family_signal()


@pytest.fixture(scope="session")
def family_model():
    return make_family_model()


@pytest.fixture(scope="session")
def family_certificate(family_signal):
    return make_family_certificate(family_signal)
