import json
from fractions import Fraction
from pathlib import Path as FsPath

import numpy as np
import pytest

from fuchsreduce import catalog, expr as fe
from fuchsreduce.expr import Binding

EXPECTED_IDS = [
    "PII.y0",
    "PII.y_inv_t",
    "PIII.y1",
    "PIV.y_m2t",
    "PIV.y_m2t3",
    "PV.y_lin",
    "PV.y_m1",
    "PVdeg.kitaev_sqrt",
]


class TestRegistry:
    def test_list_entries_stable(self):
        assert catalog.list_entries() == EXPECTED_IDS
        assert catalog.list_entries() == EXPECTED_IDS  # stable across calls

    def test_negative_controls_listed_separately(self):
        assert catalog.list_negative_entries() == ["negative.PII_bad_y1"]
        assert "negative.PII_bad_y1" not in catalog.list_entries()

    def test_lookup_theta(self):
        entry = catalog.lookup("PII.y0")
        assert entry.params_exact["theta"] == Fraction(1, 2)

    def test_lookup_unknown(self):
        with pytest.raises(catalog.EntryNotFoundError):
            catalog.lookup("nope")

    def test_unknown_parameter_override(self):
        with pytest.raises(catalog.EntryNotFoundError):
            catalog.lookup("PII.y0", {"bogus": Fraction(1)})


class TestInstantiate:
    def test_pii_y0_matrix_entries(self):
        # Oracle: assemble the matrix by hand from the substituted solution
        # y = 0, z = -t/2, u = 1, theta = 1/2.
        lp, entry = catalog.instantiate("PII.y0")
        for x, t in ((1.3, 0.7), (2.0 + 0.1j, 0.9 - 0.05j)):
            b = Binding(x=x, t=t, params=entry.params)
            assert fe.evaluate(lp.a[0][0], b) == pytest.approx(x**2)
            assert fe.evaluate(lp.a[0][1], b) == pytest.approx(x)
            assert fe.evaluate(lp.a[1][0], b) == pytest.approx(t * x - 1)
            assert fe.evaluate(lp.a[1][1], b) == pytest.approx(-(x**2))
            assert fe.evaluate(lp.b[0][0], b) == pytest.approx(x / 2)
            assert fe.evaluate(lp.b[0][1], b) == pytest.approx(0.5)
            assert fe.evaluate(lp.b[1][0], b) == pytest.approx(t / 2)

    def test_piii_default_z(self):
        lp, entry = catalog.instantiate("PIII.y1")
        z = entry.closed_forms["z"]
        assert fe.evaluate(z, Binding(t=0.9)) == pytest.approx(-1.0)

    def test_piv_variant_z(self):
        lp, entry = catalog.instantiate("PIV.y_m2t")
        assert fe.evaluate(entry.closed_forms["z"], Binding(t=0.7)) == pytest.approx(1.0)

    def test_kitaev_returns_scalar_pair(self):
        obj, entry = catalog.instantiate("PVdeg.kitaev_sqrt")
        assert entry.lax is None
        assert obj is entry.scalar
        assert entry.pre_substitution == "t = z^2"

    def test_parameter_override_rebuilds(self):
        lp, entry = catalog.instantiate("PIII.y1", {"theta_inf": Fraction(7, 2)})
        assert fe.evaluate(entry.closed_forms["z"], Binding(t=1.0)) == pytest.approx(-1.5)
        # default instance untouched
        _, default = catalog.instantiate("PIII.y1")
        assert fe.evaluate(default.closed_forms["z"], Binding(t=1.0)) == pytest.approx(-1.0)


class TestTraceless:
    @pytest.mark.parametrize("entry_id", EXPECTED_IDS)
    def test_traces_vanish_on_probe_grid(self, entry_id):
        entry = catalog.lookup(entry_id)
        if entry.lax is None:
            pytest.skip("direct scalar entry")
        tr_a = fe.add(entry.lax.a[0][0], entry.lax.a[1][1])
        tr_b = fe.add(entry.lax.b[0][0], entry.lax.b[1][1])
        probes = entry.probe_bindings(12)
        ref = entry.lax.a[0][0]
        assert fe.numerically_zero(tr_a, probes, tol=1e-12, reference=ref)
        assert fe.numerically_zero(tr_b, probes, tol=1e-12, reference=ref)


class TestFlow:
    def test_pii_y0_exact_cancellation(self):
        assert catalog.flow_residual("PII.y0", 0.7) == 0.0

    def test_piii_flow(self):
        assert catalog.flow_residual("PIII.y1", 0.9) <= 1e-10

    def test_piv_cubic_flow(self):
        assert catalog.flow_residual("PIV.y_m2t3", 1.1) <= 1e-10

    @pytest.mark.parametrize("entry_id", EXPECTED_IDS)
    def test_sixteen_random_probes(self, entry_id):
        entry = catalog.lookup(entry_id)
        rng = np.random.default_rng(91)
        worst = max(
            catalog.flow_residual(entry, entry.box_t.random(rng))
            for _ in range(16)
        )
        assert worst <= 1e-10

    def test_negative_control_breaks_flow(self):
        assert catalog.flow_residual("negative.PII_bad_y1", 0.7) >= 1e-2


class TestManifests:
    def test_files_match_regeneration(self):
        src = FsPath(__file__).resolve().parents[1] / "src" / "fuchsreduce" / "manifests"
        for entry_id in (*EXPECTED_IDS, "negative.PII_bad_y1"):
            on_disk = (src / f"{entry_id}.json").read_text()
            assert on_disk == catalog.manifest_json(catalog.lookup(entry_id))

    def test_manifest_is_valid_json_with_closed_forms(self):
        doc = json.loads(catalog.manifest_json(catalog.lookup("PIV.y_m2t3")))
        assert doc["id"] == "PIV.y_m2t3"
        assert doc["reduction"]["M"] == "2 * t / 3"
        # documented closed forms parse back through the grammar
        for key, text in {**doc["closed_forms"], **doc["reduction"]}.items():
            fe.parse(text)

    def test_target_scale_string(self):
        doc = json.loads(catalog.manifest_json(catalog.lookup("PII.y0")))
        assert doc["target"]["scale_closed_form"] == "4^(1/3)"


class TestProbeGeometry:
    @pytest.mark.parametrize("entry_id", (*EXPECTED_IDS, "negative.PII_bad_y1"))
    def test_boxes_avoid_singular_sets(self, entry_id):
        entry = catalog.lookup(entry_id)
        for s in entry.singular_x:
            assert not entry.box_x.contains(s, pad=0.05)
        for s in entry.singular_t:
            assert not entry.box_t.contains(s, pad=0.05)
        assert all(abs(complex(entry.basepoint_x) - s) > 0.2 for s in entry.singular_x)
