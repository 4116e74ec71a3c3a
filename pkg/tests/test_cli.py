import json

import pytest

from isscert.cli import main


def family_system():
    return {
        "kind": "linear",
        "A": {"s": [[-1.25]], "u": [[0.4]]},
        "B": {"s": [[0.5]], "u": [[0.5]]},
        "J": {"s": [[0.1]], "u": [[0.1]]},
        "H": {"s": [[0.0]], "u": [[0.0]]},
    }


def family_signal_json():
    return {
        "t0": 0.0,
        "instants": [1.0, 1.25, 2.25, 2.5, 3.5, 3.75, 4.75],
        "modes": ["s", "u", "s", "u", "s", "u", "s", "u"],
        "horizon": 5.0,
    }


def family_certificate_json():
    return {
        "V": {"s": {"kind": "quadratic", "M": [[1.0]]},
              "u": {"kind": "quadratic", "M": [[1.0]]}},
        "alpha1": {"kind": "power", "c": 1.0, "k": 2.0},
        "alpha2": {"kind": "power", "c": 1.0, "k": 2.0},
        "alpha3": {"kind": "power", "c": 1.0, "k": 2.0},
        "chi": {"kind": "power", "c": 32.0, "k": 2.0},
        "phi": {"s": {"kind": "linear", "eta": -1.0},
                "u": {"kind": "linear", "eta": 1.0}},
        "psi": {"s": {"kind": "linear", "eta": 0.01},
                "u": {"kind": "linear", "eta": 0.01}},
        "partition": {"stable": ["s"], "unstable": ["u"]},
        "dwell": {"tau": {"s": 1.0, "u": 0.25}, "delta": 0.2,
                  "T_S": 1.0, "T_U": 0.25},
    }


def base_config():
    return {
        "system": family_system(),
        "signal": family_signal_json(),
        "x0": [2.0],
        "step": 1e-3,
    }


def run(tmp_path, command, cfg, name="cfg.json", seed=None):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    out = tmp_path / f"out-{command}-{name}"
    argv = [command, "--config", str(path), "--out", str(out)]
    if seed is not None:
        argv += ["--seed", str(seed)]
    return main(argv), out


class TestSimulate:
    def test_ok(self, tmp_path):
        code, out = run(tmp_path, "simulate", base_config())
        assert code == 0
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert lines[0] == "t,mode,x1,jump_flag"
        flagged = [l for l in lines[1:] if l.endswith(",1")]
        assert len(flagged) == 7  # one post-jump row per switching instant

    def test_malformed_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{ not json")
        assert main(["simulate", "--config", str(path), "--out", str(tmp_path)]) == 1

    def test_missing_key(self, tmp_path):
        cfg = base_config()
        del cfg["x0"]
        code, _ = run(tmp_path, "simulate", cfg)
        assert code == 1

    def test_step_too_large(self, tmp_path):
        cfg = base_config()
        cfg["step"] = 0.5  # exceeds the 0.25 inter-switch gap
        code, _ = run(tmp_path, "simulate", cfg)
        assert code == 1

    def test_blow_up_partial_csv(self, tmp_path):
        cfg = base_config()
        cfg["system"] = {
            "kind": "linear",
            "A": {"a": [[50.0]]}, "B": {"a": [[0.0]]},
            "J": {"a": [[1.0]]}, "H": {"a": [[0.0]]},
        }
        cfg["signal"] = {"t0": 0.0, "instants": [], "modes": ["a"], "horizon": 1.0}
        code, out = run(tmp_path, "simulate", cfg)
        assert code == 2
        lines = (out / "trajectory.csv").read_text().splitlines()
        assert len(lines) > 2  # partial trajectory flushed before the failure


class TestCertify:
    def test_ok(self, tmp_path):
        cfg = base_config()
        cfg["certificate"] = family_certificate_json()
        code, out = run(tmp_path, "certify", cfg)
        assert code == 0
        summary = json.loads((out / "summary.json").read_text())
        assert summary["violations"] == 0
        assert summary["mdadt_ok"] and summary["mdalt_ok"]
        assert (out / "reports.csv").read_text().splitlines()[0] == \
            "kind,time,mode,lhs,rhs,margin"

    def test_violations(self, tmp_path):
        cfg = base_config()
        cert = family_certificate_json()
        cert["phi"]["s"] = {"kind": "linear", "eta": -10.0}  # faster than true decay
        cfg["certificate"] = cert
        code, out = run(tmp_path, "certify", cfg)
        assert code == 3
        body = (out / "reports.csv").read_text()
        assert "flow" in body


class TestConstruct:
    def test_ok(self, tmp_path):
        cfg = base_config()
        cfg["certificate"] = family_certificate_json()
        cfg["dwell_a_grid"] = [1.0, 100.0, 1e4]
        code, out = run(tmp_path, "construct", cfg)
        assert code == 0
        lines = (out / "construct.csv").read_text().splitlines()
        assert lines[0] == "t,V,W,h"
        assert len(lines) > 5000

    def test_image_not_full(self, tmp_path):
        cfg = base_config()
        cert = family_certificate_json()
        cert["phi"]["s"] = {"kind": "power", "c": -1.0, "k": 2.0}
        cfg["certificate"] = cert
        code, _ = run(tmp_path, "construct", cfg)
        assert code == 4

    def test_dwell_precondition(self, tmp_path):
        cfg = base_config()
        cert = family_certificate_json()
        cert["dwell"]["T_S"] = 0.0  # declared slack below the signal's actual
        cfg["certificate"] = cert
        code, _ = run(tmp_path, "construct", cfg)
        assert code == 3


class TestBound:
    def _cfg(self):
        cfg = base_config()
        cfg["certificate"] = family_certificate_json()
        cfg["bound"] = {
            "envelopes": {"lower": {"kind": "linear", "eta": 1.0},
                          "upper": {"kind": "linear", "eta": 1.0}},
            "runs": 5,
            "x0_range": 3.0,
            "u_bound": 1.0,
            "r_list": [1.0, 3.0],
            "patch_samples": 5,
        }
        return cfg

    def test_ok(self, tmp_path):
        code, out = run(tmp_path, "bound", self._cfg(), seed=0)
        assert code == 0
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["violations"] == 0
        assert verdict["max_margin"] <= 0
        assert verdict["patched"] and not verdict["t0_independent"]
        lines = (out / "bound.csv").read_text().splitlines()
        assert lines[0] == "r,s,beta(r,s)"
        assert len(lines) == 1 + 2 * 51


class TestLmi:
    def _base(self):
        return {
            "system": family_system(),
            "lmi": {
                "partition": {"stable": ["s"], "unstable": ["u"]},
                "dwell": {"tau": {"s": 1.0, "u": 0.25}, "delta": 0.2},
                "pairs": [["u", "s"], ["s", "u"]],
            },
        }

    def test_synth_ok(self, tmp_path):
        cfg = self._base()
        cfg["lmi"]["mode"] = "synth"
        code, out = run(tmp_path, "lmi", cfg)
        assert code == 0
        cert = json.loads((out / "certificate.json").read_text())
        assert set(cert["eta"]) == {"s", "u"}
        verdict = json.loads((out / "verdict.json").read_text())
        assert all(v["ok"] for v in verdict["flow"].values())
        assert all(v["ok"] for v in verdict["jump"].values())
        assert verdict["rates"] == []

    def test_synth_infeasible(self, tmp_path):
        cfg = self._base()
        cfg["system"]["A"]["s"] = [[0.0]]  # declared stable, not Hurwitz
        cfg["lmi"]["mode"] = "synth"
        code, out = run(tmp_path, "lmi", cfg)
        assert code == 5
        verdict = json.loads((out / "verdict.json").read_text())
        assert verdict["infeasible"]

    def test_verify_roundtrip(self, tmp_path):
        cfg = self._base()
        cfg["lmi"]["mode"] = "synth"
        code, out = run(tmp_path, "lmi", cfg, name="synth.json")
        assert code == 0
        cert = json.loads((out / "certificate.json").read_text())
        cert.pop("lambda_max")
        cfg2 = self._base()
        cfg2["lmi"]["mode"] = "verify"
        cfg2["lmi"]["certificate"] = cert
        code2, out2 = run(tmp_path, "lmi", cfg2, name="verify.json")
        assert code2 == 0

    def test_verify_failing_certificate(self, tmp_path):
        cfg = self._base()
        cfg["lmi"]["mode"] = "verify"
        cfg["lmi"]["certificate"] = {
            "M": {"s": [[1.0]], "u": [[1.0]]},
            "Q": {"s": [[1e-9]], "u": [[1e-9]]},
            "eta": {"s": -10.0, "u": 0.1},
            "mu": {"s": 1.0, "u": 1.0},
        }
        code, out = run(tmp_path, "lmi", cfg)
        assert code == 3

    def test_unknown_mode(self, tmp_path):
        cfg = self._base()
        cfg["lmi"]["mode"] = "nonsense"
        code, _ = run(tmp_path, "lmi", cfg)
        assert code == 1


class TestDeterminism:
    def test_identical_reruns(self, tmp_path):
        cfg = base_config()
        cfg["certificate"] = family_certificate_json()
        code1, out1 = run(tmp_path, "certify", cfg, name="a.json", seed=7)
        code2, out2 = run(tmp_path, "certify", cfg, name="b.json", seed=7)
        assert code1 == code2 == 0
        for fname in ("reports.csv", "summary.json"):
            assert (out1 / fname).read_bytes() == (out2 / fname).read_bytes()
