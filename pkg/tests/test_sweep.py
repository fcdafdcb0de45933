"""Grid sweeps: config parsing, determinism, error isolation, size scans."""

import json
import math
from dataclasses import replace

import numpy as np
import pytest

import openxy
from openxy.model import ChainSpec
from openxy.observables import (distance_profile, magnetization,
                                residual_correlator, spin_spin_matrix,
                                two_point_table)
from openxy.osee import osee
from openxy.spectral import relaxation_gap
from openxy.sweep import (Axis, SweepConfig, format_float, run_size_scan,
                          run_sweep, validate_config, write_csv)

from conftest import FIG_RATES, cached_basis, fig_spec

EQUAL_RATE_BASE = {"n": 8, "gamma": 0.5, "h": 0.9,
                   "gl1": 0.4, "gl2": 0.4, "gr1": 0.2, "gr2": 0.2}


def fig_config(**overrides) -> SweepConfig:
    d = {
        "base": {"n": 8, "gamma": 0.5, "h": 0.9, **FIG_RATES},
        "axes": [{"name": "h", "values": [0.9]}],
        "observables": ["gap", "c_res"],
    }
    d.update(overrides)
    return SweepConfig.from_dict(d)


class TestAxis:
    def test_explicit_values(self):
        ax = Axis.from_dict({"name": "h", "values": [0.1, 0.2]})
        assert ax.values == (0.1, 0.2)

    def test_linspace_form(self):
        ax = Axis.from_dict({"name": "gamma", "min": 0.0, "max": 1.0, "count": 5})
        assert ax.values == (0.0, 0.25, 0.5, 0.75, 1.0)

    def test_n_values_become_ints(self):
        ax = Axis.from_dict({"name": "n", "values": [4.0, 8.0]})
        assert ax.values == (4, 8)
        assert all(isinstance(v, int) for v in ax.values)

    def test_bad_name(self):
        with pytest.raises(ValueError, match="'axis.name' must be one of"):
            Axis.from_dict({"name": "q", "values": [1.0]})

    def test_missing_range_fields(self):
        with pytest.raises(ValueError, match=r"missing \['count'\]"):
            Axis.from_dict({"name": "h", "min": 0.0, "max": 1.0})

    def test_empty_values(self):
        with pytest.raises(ValueError, match="must be nonempty"):
            Axis.from_dict({"name": "h", "values": []})


class TestSweepConfig:
    def test_round_trip(self):
        cfg = fig_config()
        assert SweepConfig.from_dict(cfg.to_dict()) == cfg

    def test_unknown_base_key(self):
        with pytest.raises(ValueError, match="unknown keys \\['coupling'\\]"):
            fig_config(base={"n": 4, "coupling": 1.0})

    def test_axes_required(self):
        with pytest.raises(ValueError, match="'axes' must be a nonempty list"):
            fig_config(axes=[])

    def test_at_most_two_axes(self):
        axes = [{"name": k, "values": [0.1]} for k in ("h", "gamma", "n")]
        with pytest.raises(ValueError, match="1 or 2 axes"):
            fig_config(axes=axes)

    def test_repeated_axis_name(self):
        axes = [{"name": "h", "values": [0.1]}, {"name": "h", "values": [0.2]}]
        with pytest.raises(ValueError, match="repeats a name"):
            fig_config(axes=axes)

    def test_unknown_observable(self):
        with pytest.raises(ValueError, match="unknown entries \\['spin_current'\\]"):
            fig_config(observables=["gap", "spin_current"])

    def test_format_must_be_csv(self):
        with pytest.raises(ValueError, match="must be 'csv'"):
            fig_config(format="parquet")

    def test_osee_needs_even_n_or_cut(self):
        axes = [{"name": "n", "values": [4, 7]}]
        with pytest.raises(ValueError, match="odd n \\[7\\]"):
            fig_config(axes=axes, observables=["osee"])
        cfg = fig_config(axes=axes, observables=["osee"], cut=2)
        assert validate_config(cfg) is cfg

    def test_workers_positive(self):
        with pytest.raises(ValueError, match="'workers' must be >= 1"):
            fig_config(workers=0)


class TestRunSweep:
    def test_single_point_matches_direct_calls(self):
        cfg = fig_config(observables=["rapidities", "gap", "cmatrix", "profile",
                                      "c_res", "magnetization", "osee"])
        row = run_sweep(cfg).rows[0]
        assert "error" not in row

        spec = fig_spec(8, 0.9)
        basis = cached_basis(spec)
        table = two_point_table(basis)
        cmat = spin_spin_matrix(table)
        assert np.allclose(row["rapidities"], basis.beta, atol=1e-14)
        assert row["gap"] == pytest.approx(relaxation_gap(basis).delta, abs=1e-14)
        assert np.allclose(row["cmatrix"], cmat.c, atol=1e-14)
        assert row["profile"] == distance_profile(cmat, band=0.08)
        assert row["c_res"] == pytest.approx(residual_correlator(cmat), abs=1e-16)
        assert np.allclose(row["magnetization"], magnetization(table), atol=1e-14)
        assert row["osee_S"] == pytest.approx(osee(basis, 4).entropy, abs=1e-12)

    def test_point_failure_recorded_not_raised(self, tmp_path):
        cfg = replace(
            fig_config(), output=str(tmp_path / "out"),
            axes=(Axis(name="gamma", values=(0.5, float("nan"))),))
        result = run_sweep(cfg)
        ok, bad = result.rows
        assert "error" not in ok
        assert "gamma must be finite" in bad["error"]
        assert result.column("gap") == [ok["gap"]]
        assert any("(1,) failed" in w for w in result.manifest["warnings"])
        # the error lands in the table as a row, not a crash
        lines = (tmp_path / "out" / "table.csv").read_text().splitlines()
        assert len(lines) == 3
        assert "gamma must be finite" in lines[2]

    def test_reruns_byte_identical(self, tmp_path):
        out = tmp_path / "out"
        cfg = fig_config(
            observables=["rapidities", "gap", "cmatrix", "profile",
                         "c_res", "magnetization", "osee"],
            output=str(out))
        run_sweep(cfg)
        names = sorted(p.name for p in out.iterdir())
        assert "table.csv" in names
        assert "rapidities_0000.csv" in names
        first = {name: (out / name).read_bytes() for name in names}

        run_sweep(cfg)
        assert sorted(p.name for p in out.iterdir()) == names
        for name in names:
            second = (out / name).read_bytes()
            if name == "manifest.json":
                ma, mb = json.loads(first[name]), json.loads(second)
                ma.pop("created"), mb.pop("created")
                ma.pop("timings"), mb.pop("timings")
                assert ma == mb
            else:
                assert second == first[name], name

    def test_workers_match_serial(self):
        axes = [{"name": "h", "values": [0.3, 0.9]},
                {"name": "gamma", "values": [0.25, 0.75]}]
        serial = run_sweep(fig_config(axes=axes))
        parallel = run_sweep(fig_config(axes=axes, workers=2))
        assert [r["index"] for r in parallel.rows] == [r["index"] for r in serial.rows]
        assert parallel.column("gap") == serial.column("gap")
        assert parallel.column("c_res") == serial.column("c_res")

    def test_manifest_content(self, tmp_path):
        cfg = fig_config(output=str(tmp_path / "m"))
        result = run_sweep(cfg)
        man = json.loads((tmp_path / "m" / "manifest.json").read_text())
        assert man["version"] == openxy.__version__
        assert man["status"] == 0
        assert man["config"] == cfg.to_dict()
        assert len(man["config_hash"]) == 64
        assert man["timings"]["points"] == 1
        assert man == result.manifest


class TestRunSizeScan:
    def test_needs_n_axis(self):
        with pytest.raises(ValueError, match="requires an n axis"):
            run_size_scan(fig_config())

    def test_sizes_must_increase(self):
        cfg = fig_config(axes=[{"name": "n", "values": [8, 8]}])
        with pytest.raises(ValueError, match="strictly increasing"):
            run_size_scan(cfg)

    def test_identity_state_scan(self):
        cfg = SweepConfig.from_dict({
            "base": EQUAL_RATE_BASE,
            "axes": [{"name": "n", "values": [8, 12, 16, 20]}],
            "observables": ["osee"],
        })
        result = run_size_scan(cfg)
        entropies = result.column("osee_S")
        assert len(entropies) == 4
        assert max(abs(s) for s in entropies) <= 1e-7
        gaps = result.column("gap")  # added by the scan itself
        assert all(g > 0 for g in gaps)
        assert all(b < a for a, b in zip(gaps, gaps[1:]))
        assert result.fits["gap_power"].kind == "power"
        assert abs(result.fits["osee_linear"].slope) <= 1e-8


class TestFormatting:
    def test_format_float_round_trip(self):
        for x in (0.0, 1.0 / 3.0, 0.1, -2.5e-17, 6.02e23, -0.75):
            assert float(format_float(x)) == x

    def test_write_csv_line_endings(self, tmp_path):
        path = tmp_path / "t.csv"
        write_csv(str(path), ["a", "b"], [["1", "2"]])
        assert path.read_bytes() == b"a,b\n1,2\n"
