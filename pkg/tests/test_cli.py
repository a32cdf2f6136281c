import io
import json

import pytest

from fuchsreduce import cli


def run_cli(argv):
    out = io.StringIO()
    err = io.StringIO()
    rc = cli.main(argv, out=out, err=err)
    return rc, out.getvalue(), err.getvalue()


class TestList:
    def test_text_listing(self):
        rc, out, _ = run_cli(["list"])
        assert rc == 0
        lines = [ln for ln in out.splitlines() if ln.strip()]
        positives = [ln for ln in lines if not ln.startswith("negative.")]
        negatives = [ln for ln in lines if ln.startswith("negative.")]
        assert len(positives) == 8
        assert len(negatives) == 1
        assert "NEGATIVE CONTROL" in negatives[0]

    def test_json_listing(self):
        rc, out, _ = run_cli(["list", "--json"])
        assert rc == 0
        docs = json.loads(out)
        ids = [d["id"] for d in docs]
        assert ids[:8] == [
            "PII.y0", "PII.y_inv_t", "PIII.y1", "PIV.y_m2t",
            "PIV.y_m2t3", "PV.y_lin", "PV.y_m1", "PVdeg.kitaev_sqrt",
        ]
        assert docs[0]["schema"] == "fuchs-reduce/1"

    def test_family_filter(self):
        rc, out, _ = run_cli(["list", "--family", "PV"])
        assert rc == 0
        ids = [ln.split()[0] for ln in out.splitlines() if ln.strip()]
        assert ids == ["PV.y_lin", "PV.y_m1", "PVdeg.kitaev_sqrt"]


class TestReduce:
    def test_flat_entry_document(self):
        rc, out, _ = run_cli(["reduce", "PII.y0"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["f"] == "2 * x"
        assert doc["h"] == "0"
        assert doc["R"] == "0"
        assert doc["M"] == "0"
        assert doc["case"] == "EQ3"
        assert doc["target"]["kind"] == "airy"
        assert doc["target"]["scale"] == "4^(1/3)"

    def test_parameter_override(self):
        rc, out, _ = run_cli(["reduce", "PIII.y1", "--param", "theta_inf=5/2"])
        assert rc == 0
        doc = json.loads(out)
        assert doc["target"]["kind"] == "whittaker"
        assert doc["target"]["kappa"]["re"] == pytest.approx(0.75, abs=1e-7)
        assert doc["target"]["mu_sq"]["re"] == pytest.approx(1 / 16, abs=1e-7)

    def test_missing_entry_exits_2(self):
        rc, _, err = run_cli(["reduce", "missing.id"])
        assert rc == 2
        assert "missing.id" in err

    def test_bad_param_exits_2(self):
        rc, _, err = run_cli(["reduce", "PIII.y1", "--param", "theta_inf=1.5x"])
        assert rc == 2


class TestVerify:
    def test_all_positive_entries_pass(self, tmp_path):
        rc, out, _ = run_cli(["verify", "--all", "--out-dir", str(tmp_path)])
        assert rc == 0
        assert out.count("PASS") == 8
        files = sorted(p.name for p in tmp_path.glob("*.json"))
        assert len(files) == 8
        doc = json.loads((tmp_path / "PII.y0.json").read_text())
        assert doc["passed"] is True

    def test_negative_control_exits_1(self):
        rc, out, _ = run_cli(["verify", "negative.PII_bad_y1"])
        assert rc == 1
        assert "FAIL" in out

    def test_unreachable_tolerance_exits_1(self):
        rc, out, _ = run_cli(["verify", "PII.y0", "--tol-independence", "1e-15"])
        assert rc == 1

    def test_unknown_entry_exits_2(self):
        rc, _, err = run_cli(["verify", "nope.entry"])
        assert rc == 2


class TestSample:
    def test_flat_entry_rows_satisfy_target(self, tmp_path):
        path = tmp_path / "s.csv"
        rc, _, _ = run_cli(["sample", "PII.y0", "--out", str(path), "--count", "64"])
        assert rc == 0
        lines = path.read_text().splitlines()
        assert lines[0] == "tau_re,tau_im,P_re,P_im,Q_re,Q_im,x_re,x_im,t_re,t_im"
        assert len(lines) == 65
        for ln in lines[1:]:
            vals = [float(v) for v in ln.split(",")]
            tau = complex(vals[0], vals[1])
            q = complex(vals[4], vals[5])
            assert abs(q - (-tau / 4)) <= 1e-9
            # rows carry the sample point too
            x = complex(vals[6], vals[7])
            t = complex(vals[8], vals[9])
            assert abs((x**2 + t) - tau) <= 1e-9

    def test_constant_entry_rows(self, tmp_path):
        path = tmp_path / "s.csv"
        rc, _, _ = run_cli(["sample", "PIV.y_m2t", "--out", str(path), "--count", "32"])
        assert rc == 0
        for ln in path.read_text().splitlines()[1:]:
            vals = [float(v) for v in ln.split(",")]
            assert abs(complex(vals[4], vals[5]) - (-1.0)) <= 1e-10

    def test_zero_samples_header_only(self, tmp_path):
        path = tmp_path / "empty.csv"
        rc, _, _ = run_cli(["sample", "PII.y0", "--out", str(path), "--count", "0"])
        assert rc == 0
        assert path.read_text() == "tau_re,tau_im,P_re,P_im,Q_re,Q_im,x_re,x_im,t_re,t_im\n"

    def test_unwritable_path_exits_2(self, tmp_path):
        blocker = tmp_path / "blocker"
        blocker.write_text("not a directory")
        rc, _, err = run_cli(["sample", "PII.y0", "--out",
                              str(blocker / "s.csv"), "--count", "4"])
        assert rc == 2
        assert err.startswith("error:")

    def test_unknown_entry_exits_2(self, tmp_path):
        rc, _, err = run_cli(["sample", "nope.id", "--out", str(tmp_path / "x.csv")])
        assert rc == 2


class TestDeterminism:
    def test_verify_json_byte_identical(self):
        rc1, out1, _ = run_cli(["verify", "PII.y0", "--json", "--seed", "42"])
        rc2, out2, _ = run_cli(["verify", "PII.y0", "--json", "--seed", "42"])
        assert rc1 == rc2 == 0
        assert out1 == out2

    def test_sample_byte_identical(self):
        rc1, out1, _ = run_cli(["sample", "PVdeg.kitaev_sqrt", "--count", "16",
                                "--seed", "42"])
        rc2, out2, _ = run_cli(["sample", "PVdeg.kitaev_sqrt", "--count", "16",
                                "--seed", "42"])
        assert rc1 == rc2 == 0
        assert out1 == out2

    def test_different_seed_changes_samples(self):
        _, out1, _ = run_cli(["sample", "PII.y0", "--count", "8", "--seed", "1"])
        _, out2, _ = run_cli(["sample", "PII.y0", "--count", "8", "--seed", "2"])
        assert out1 != out2
