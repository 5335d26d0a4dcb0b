import json

import numpy as np
import pytest

from wearauth import codec
from wearauth.cli import main
from wearauth.fingerprint import GrayImage, write_pgm

from conftest import write_scenario
from patterns import stripe_image


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestTable2:
    def test_csv_to_stdout(self, capsys):
        code, out, _ = run_cli(capsys, "table2")
        assert code == 0
        lines = out.splitlines()
        assert lines[0] == "sensor,te_sensor_wban,te_sensor_hbc,te_hub_wban,te_hub_hbc"
        assert lines[2] == "capacitive,0.001,0.001,1.11,142.2"

    def test_json_flag(self, capsys):
        code, out, _ = run_cli(capsys, "table2", "--json")
        assert code == 0
        assert json.loads(out)["capacitive"]["hub_hbc"] == "142.2"

    def test_output_file(self, capsys, tmp_path):
        target = tmp_path / "t2.csv"
        code, out, _ = run_cli(capsys, "table2", "-o", str(target))
        assert code == 0
        assert out == ""
        assert "142.2" in target.read_text()

    def test_params_override(self, capsys, tmp_path):
        cfg = tmp_path / "p.cfg"
        cfg.write_text("budget_rf_harvest = 7.2e-3\n")  # doubled harvest budget
        code, out, _ = run_cli(capsys, "table2", "--params", str(cfg))
        assert code == 0
        assert out.splitlines()[2].endswith("284.3")

    def test_bad_params_file_is_domain_error(self, capsys, tmp_path):
        cfg = tmp_path / "p.cfg"
        cfg.write_text("bogus_key = 1\n")
        code, _, err = run_cli(capsys, "table2", "--params", str(cfg))
        assert code == 1
        assert "error:" in err


class TestFigure4AndExplore:
    def test_figure4_csv(self, capsys):
        code, out, _ = run_cli(capsys, "figure4")
        assert code == 0
        assert len(out.splitlines()) == 17

    def test_explore_default_json(self, capsys):
        code, out, _ = run_cli(capsys, "explore")
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["te_location"] == "hub"
        assert doc["sensor"]["retries_display"] == "142.2"

    def test_explore_flags(self, capsys):
        code, out, _ = run_cli(capsys, "explore", "--te", "cloud", "--channel", "wban",
                               "--sensor", "optical", "--power", "coin_cell",
                               "--distance", "2000")
        assert code == 0
        doc = json.loads(out)
        assert doc["config"]["lora_distance_m"] == 2000.0
        assert doc["hub"]["retries_display"] == "4"

    def test_unknown_flag_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["explore", "--no-such-flag"])
        assert exc.value.code == 2

    def test_missing_subcommand_is_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2


class TestExtractAndMatch:
    def test_extract_blank_pgm_writes_header_only_template(self, capsys, tmp_path):
        blank = GrayImage(np.full((32, 32), 200, dtype=np.uint8))
        write_pgm(blank, tmp_path / "blank.pgm")
        out_path = tmp_path / "blank.fpt"
        code, _, err = run_cli(capsys, "extract", str(tmp_path / "blank.pgm"),
                               "-o", str(out_path), "--algo", "high")
        assert code == 0
        assert out_path.read_bytes() == b"FPT\x01\x00\x00\x08\x08"
        assert len(out_path.read_bytes()) == 8

    def test_extract_raw_blob(self, capsys, tmp_path):
        img = stripe_image(64, 48)
        raw = tmp_path / "img.raw"
        raw.write_bytes(img.to_raw())
        out_path = tmp_path / "t.fpt"
        code, _, _ = run_cli(capsys, "extract", str(raw), "-o", str(out_path),
                             "--raw-width", "64", "--raw-height", "48", "--algo", "light")
        assert code == 0
        assert out_path.read_bytes()[:4] == b"FPT\x01"

    def test_extract_missing_file_is_domain_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "extract", str(tmp_path / "nope.pgm"),
                               "-o", str(tmp_path / "x.fpt"))
        assert code == 1
        assert "error:" in err

    def test_match_against_gallery(self, capsys, tmp_path, probe_image):
        from wearauth.fingerprint import TemplateAlgorithm, extract_template
        template = extract_template(probe_image, TemplateAlgorithm.HIGH_ACCURACY)
        (tmp_path / "probe.fpt").write_bytes(codec.encode(template))
        gal = tmp_path / "gallery"
        gal.mkdir()
        (gal / "alice.fpt").write_bytes(codec.encode(template))
        (gal / "index.json").write_text(json.dumps({"alice": "alice.fpt"}))
        code, out, _ = run_cli(capsys, "match", str(tmp_path / "probe.fpt"), str(gal))
        assert code == 0
        results = json.loads(out)
        assert results[0]["label"] == "alice"
        assert results[0]["decision"] == "accept"

    def test_match_corrupt_probe_is_domain_error(self, capsys, tmp_path):
        (tmp_path / "bad.fpt").write_bytes(b"garbage")
        gal = tmp_path / "gallery"
        gal.mkdir()
        (gal / "index.json").write_text("{}")
        code, _, err = run_cli(capsys, "match", str(tmp_path / "bad.fpt"), str(gal))
        assert code == 1


class TestCrypt:
    def test_encrypt_decrypt_roundtrip(self, capsys, tmp_path):
        data = bytes(range(256)) + b"tail"
        src = tmp_path / "plain.bin"
        src.write_bytes(data)
        ct = tmp_path / "ct.bin"
        pt = tmp_path / "pt.bin"
        key, nonce = "0123456789abcdef0123", "00ff00ff00ff00ff"
        assert run_cli(capsys, "encrypt", str(src), str(ct), "--key", key, "--nonce", nonce)[0] == 0
        assert ct.read_bytes() != data
        assert run_cli(capsys, "decrypt", str(ct), str(pt), "--key", key, "--nonce", nonce)[0] == 0
        assert pt.read_bytes() == data


class TestChannelSweep:
    def test_csv_output_and_determinism(self, capsys):
        args = ("channel-sweep", "--hum", "0,1,2", "--noise", "0.8",
                "--bit-period", "32", "--seed", "9", "--payload-bytes", "32")
        code, out1, _ = run_cli(capsys, *args)
        assert code == 0
        lines = out1.splitlines()
        assert lines[0] == "hum_amplitude,mode,ber,eye_opening"
        assert len(lines) == 1 + 3 * 2
        code, out2, _ = run_cli(capsys, *args)
        assert out1 == out2

    def test_empty_hum_list_is_domain_error(self, capsys):
        code, _, err = run_cli(capsys, "channel-sweep", "--hum", ",")
        assert code == 1


class TestSimulate:
    def test_scenario_run_with_trace(self, capsys, tmp_path, scenario_workspace):
        path = write_scenario(scenario_workspace, name="cli.json", system={
            "te_location": "hub", "on_body_channel": "hbc",
            "sensor_type": "capacitive", "sensor_power": "rf_harvest",
        }, max_requests=3)
        trace = tmp_path / "trace.csv"
        code, out, _ = run_cli(capsys, "simulate", str(path), "--trace", str(trace))
        assert code == 0
        doc = json.loads(out)
        assert doc["requests_completed"] == 3
        assert doc["verification"]["passed"] is True
        assert trace.read_text().startswith("seq,request,node,event,joules")

    def test_missing_scenario_is_domain_error(self, capsys, tmp_path):
        code, _, err = run_cli(capsys, "simulate", str(tmp_path / "none.json"))
        assert code == 1
