import json
import math

import pytest

from homlim import cli


def write_cfg(tmp_path, **overrides):
    cfg = {
        "n": 3,
        "beta": 4.0,
        "variant": "T1",
        "schedule_mode": "demo",
        "max_stage": 2,
        "seed": 11,
        "out_dir": str(tmp_path / "out"),
        "quadrature": {
            "resolution": 4,
            "axial_resolution": 8,
            "transverse_resolution": 2,
            "transverse_levels": 3,
            "cells_cap": 2,
        },
    }
    cfg.update(overrides)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestConfig:
    def test_bad_json_is_config_error(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{broken")
        assert cli.run("params", str(p)) == cli.EXIT_CONFIG

    def test_bad_field_is_config_error(self, tmp_path):
        assert cli.run("params", write_cfg(tmp_path, variant="X9")) == cli.EXIT_CONFIG
        assert cli.run("params", write_cfg(tmp_path, beta=2.0)) == cli.EXIT_CONFIG
        assert cli.run("params", write_cfg(tmp_path, n=2)) == cli.EXIT_CONFIG


class TestCommands:
    def test_params_strict_row(self, tmp_path):
        cfg = write_cfg(tmp_path, schedule_mode="strict", max_stage=1)
        assert cli.run("params", cfg) == cli.EXIT_OK
        lines = (tmp_path / "out" / "params.csv").read_text().splitlines()
        header = lines[0].split(",")
        row = dict(zip(header, lines[1].split(",")))
        # fixd inversion with the production constants
        assert float(row["log_inv_d"]) == pytest.approx(2.351e8, rel=1e-3)
        # the log-space pair satisfies the boundary matching relation
        assert math.log(float(row["log_inv_b"])) == pytest.approx(
            math.log(float(row["log_inv_d"])) + float(row["e_range"])
        )

    def test_verify_boundary(self, tmp_path):
        cfg = write_cfg(tmp_path)
        assert cli.run("verify-boundary", cfg) == cli.EXIT_OK
        text = (tmp_path / "out" / "boundary.csv").read_text()
        assert text.splitlines()[1] == "0,1"

    def test_degree_identity_fixture(self, tmp_path):
        cfg = write_cfg(tmp_path, degree={"fixture": "identity",
                                          "center": [0.0, 0.0, 0.0],
                                          "radius": 0.5})
        assert cli.run("degree", cfg) == cli.EXIT_OK
        lines = (tmp_path / "out" / "degree.csv").read_text().splitlines()
        assert lines[1].split(",")[7] == "1"

    def test_witness(self, tmp_path):
        cfg = write_cfg(tmp_path, max_stage=2)
        assert cli.run("witness", cfg) == cli.EXIT_OK

    def test_export_slice(self, tmp_path):
        cfg = write_cfg(tmp_path, max_stage=1)
        assert cli.run("export-slice", cfg) == cli.EXIT_OK
        lines = (tmp_path / "out" / "slice.csv").read_text().splitlines()
        assert lines[0] == "u,v,f1,f2,f3"
        assert len(lines) > 100

    def test_byte_identical_reruns(self, tmp_path):
        cfg = write_cfg(tmp_path)
        for command, name in (("witness", "witness.csv"),
                              ("verify-jacobian", "jacobian.csv")):
            assert cli.run(command, cfg) in (cli.EXIT_OK, cli.EXIT_ASSERT)
            first = (tmp_path / "out" / name).read_bytes()
            assert cli.run(command, cfg) in (cli.EXIT_OK, cli.EXIT_ASSERT)
            assert (tmp_path / "out" / name).read_bytes() == first

    def test_stage_override(self, tmp_path):
        cfg = write_cfg(tmp_path, max_stage=2)
        assert cli.run("witness", cfg, stage=1) == cli.EXIT_OK
        lines = (tmp_path / "out" / "witness.csv").read_text().splitlines()
        assert len(lines) == 2  # header + one stage

    def test_main_entrypoint(self, tmp_path, capsys):
        cfg = write_cfg(tmp_path)
        assert cli.main(["verify-boundary", "--config", cfg]) == 0
