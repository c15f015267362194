"""CLI dispatch, artifacts, exit codes, determinism."""

import json
import math
from pathlib import Path

import pytest

from amolab import cli, freq
from amolab.cli import RunConfig, parse_alpha
from amolab.errors import ConfigInvalid


def _summary(out):
    return json.loads((Path(out) / "summary.json").read_text())


def test_parse_alpha_variants(tmp_path):
    assert parse_alpha("golden").quotients == ()
    assert parse_alpha("silver").quotient(3) == 2
    e = parse_alpha("cf:2,2,3")
    assert e.quotients == (2, 2, 3) and e.is_finite
    e2 = parse_alpha("cf:1,2+ones")
    assert not e2.is_finite and e2.quotient(10) == 1
    from fractions import Fraction

    assert parse_alpha("7/17") == Fraction(7, 17)
    spec = freq.construct_prime(parse_alpha("golden"), Fraction(3, 10), 1, 4, stages=1)
    f = tmp_path / "spec.json"
    f.write_text(json.dumps(spec.to_json()))
    back = parse_alpha(str(f))
    assert isinstance(back, freq.FrequencySpec)


def test_cf_commands(tmp_path):
    assert cli.main(["cf", "expand", "--value", "7/17", "--terms", "8",
                     "--out", str(tmp_path / "a")]) == 0
    s = _summary(tmp_path / "a")
    assert s["results"]["quotients"] == ["2", "2", "3"]

    assert cli.main(["cf", "convergents", "--alpha", "golden", "--terms", "10",
                     "--out", str(tmp_path / "b")]) == 0
    rows = (tmp_path / "b" / "convergents.csv").read_text().splitlines()
    assert rows[0] == "k,p,q" and rows[1].split(",")[2] == "1"

    assert cli.main(["cf", "beta", "--alpha", "golden", "--stage", "20",
                     "--depth", "40", "--out", str(tmp_path / "c")]) == 0
    assert abs(float(_summary(tmp_path / "c")["results"]["value"]) - 8.937e-4) < 1e-5


def test_synth_and_reload(tmp_path):
    assert cli.main(["synth", "construct-prime", "--base", "golden", "--eps", "3/10",
                     "--beta", "1", "--K", "4", "--stages", "2",
                     "--out", str(tmp_path)]) == 0
    s = _summary(tmp_path)
    assert s["results"]["insertions"][0]["index"] == 4
    spec = freq.FrequencySpec.loads((tmp_path / "frequency_spec.json").read_text())
    assert spec.entries[0].quotient == 20


def test_spectrum_and_lyapunov(tmp_path):
    assert cli.main(["spectrum", "--lam", "2", "--p", "34", "--q", "55",
                     "--theta-grid", "16", "--out", str(tmp_path / "s")]) == 0
    s = _summary(tmp_path / "s")
    assert s["results"]["trace_agreement"] == 1.0

    assert cli.main(["lyapunov", "--lam", "2", "--alpha", "golden",
                     "--energies", "auto:3", "--steps", "2000",
                     "--theta-samples", "8", "--out", str(tmp_path / "l")]) == 0
    res = _summary(tmp_path / "l")["results"]
    assert abs(float(res["mean"]) - math.log(2)) < 5e-2


def test_badness_exit_codes(tmp_path):
    ok = cli.main(["badness", "--lam", "2", "--alpha", "golden", "--C", "1", "--N", "1",
                   "--theta-grid", "8", "--e-per-band", "2", "--q-cap", "60",
                   "--out", str(tmp_path / "ok")])
    assert ok == 0
    refuted = cli.main(["badness", "--lam", "2", "--alpha", "golden", "--C", "10",
                        "--N", "1", "--theta-grid", "8", "--e-per-band", "2",
                        "--q-cap", "60", "--out", str(tmp_path / "no")])
    assert refuted == 2
    cert = json.loads((tmp_path / "no" / "badness_certificate.json").read_text())
    assert cert["verdict"] == "refuted-with-witness"
    assert cert["witness"] is not None


def test_error_exit_code(tmp_path, capsys):
    status = cli.main(["synth", "construct-prime", "--base", "golden", "--eps", "1/4",
                       "--beta", "1", "--K", "4", "--out", str(tmp_path)])
    assert status == 1
    assert "error" in capsys.readouterr().err


def test_config_roundtrip_and_merge(tmp_path):
    cfg = RunConfig("cf", {"mode": "beta", "alpha": "golden", "stage": 10, "depth": 30},
                    out_dir=str(tmp_path / "r"), workers=2)
    assert cli.run(cfg) == 0
    echoed = _summary(tmp_path / "r")["config"]
    assert RunConfig.from_json(echoed).params["stage"] == 10

    cfile = tmp_path / "base_config.json"
    cfile.write_text(json.dumps(cfg.to_json()))
    assert cli.main(["cf", "beta", "--config", str(cfile),
                     "--out", str(tmp_path / "r2")]) == 0
    assert _summary(tmp_path / "r2")["results"] == _summary(tmp_path / "r")["results"]


def test_invalid_config_rejected(tmp_path):
    with pytest.raises(ConfigInvalid):
        cli.run(RunConfig("nope", {}, out_dir=str(tmp_path)))
    with pytest.raises(ConfigInvalid):
        cli.run(RunConfig("cf", {"mode": "beta", "alpha": "golden"},
                          out_dir=str(tmp_path), precision="quad"))


def test_worker_count_determinism(tmp_path):
    """Identical configs give byte-identical artifacts for 1, 4, 8 workers."""
    blobs = {}
    for w in (1, 4, 8):
        out = tmp_path / f"w{w}"
        args = ["badness", "--lam", "2", "--alpha", "golden", "--C", "1", "--N", "6",
                "--theta-grid", "16", "--e-per-band", "2", "--q-cap", "60",
                "--workers", str(w), "--out", str(out)]
        assert cli.main(args) == 0
        data = {}
        for f in sorted(out.iterdir()):
            if f.name == "summary.json":
                obj = json.loads(f.read_text())
                obj["config"].pop("workers")
                obj["config"].pop("out_dir")
                data[f.name] = json.dumps(obj, sort_keys=True)
            else:
                data[f.name] = f.read_bytes()
        blobs[w] = data
    assert blobs[1] == blobs[4] == blobs[8]
