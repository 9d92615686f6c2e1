import json
import math
import subprocess
import sys

import pytest
from hypothesis import given, strategies as st

from oamlink import cli, io
from oamlink.errors import ConfigError
from oamlink.scenario import Scenario, load_scenario, parse_scenario, parse_snr_grid


def test_defaults():
    s = parse_scenario("")
    assert s == Scenario()
    assert s.modes == (0, 1, 2)
    assert s.beta == 29.0 and s.r0 == 0.04 and s.d0 == 0.9
    assert s.pitch <= s.wavelength / 4
    assert s.window == pytest.approx(4.096)
    assert s.snr_grid[0] == 0.0 and s.snr_grid[-1] == 40.0
    assert s.link_budget().noise_figure == 6.5
    assert s.lens_spec().aperture_diameter == 0.6


def test_parse_overrides_and_sections():
    s = parse_scenario("[lens]\nbeta_per_m = 20.9\n[probes]\nspacing_m = 0.26\n", seed=5)
    assert s.beta == 20.9 and s.probe_spacing == 0.26 and s.seed == 5
    s2 = parse_scenario("[array]\nelement_counts = 1:6, 2:12\nmodes = 0, 1, 2\n")
    assert dict(s2.element_counts) == {1: 6, 2: 12}


@pytest.mark.parametrize(
    "text, key",
    [
        ("[lens]\nbeta_per_m = abc\n", "lens.beta_per_m"),
        ("[lens]\nbeta_per_m = -1\n", "lens.beta_per_m"),
        ("[grid]\npitch_m = 0.01\n", "grid.pitch_m"),
        ("[grid]\nsamples = 1000\n", "grid.samples"),
        ("[lens]\nalpha = 1.5\n", "lens.alpha"),
        ("[nope]\nx = 1\n", "nope"),
        ("[lens]\nfoo = 1\n", "lens.foo"),
        ("[link]\ncoupling = magic\n", "link.coupling"),
        ("[link]\nframes = 1\nsymbols_per_frame = 10\n", "link.symbols_per_frame"),
    ],
)
def test_invalid_configs_name_the_key(text, key):
    with pytest.raises(ConfigError) as exc:
        parse_scenario(text)
    assert exc.value.key == key


def test_undersampled_message():
    with pytest.raises(ConfigError, match="undersampled"):
        parse_scenario("[grid]\npitch_m = 0.005\n")


def test_snr_grid_parsing():
    assert parse_snr_grid("0:10:2") == (0, 2, 4, 6, 8, 10)
    assert parse_snr_grid("1.5, 3") == (1.5, 3.0)
    with pytest.raises(ValueError):
        parse_snr_grid("5:0:1")


@given(
    beta=st.floats(10, 60),
    seed=st.integers(0, 2**63),
    modes=st.lists(st.integers(-3, 3), min_size=1, max_size=4, unique=True),
)
def test_ini_roundtrip(beta, seed, modes):
    s = Scenario(beta=beta, seed=seed, modes=tuple(modes))
    back = parse_scenario(s.to_ini())
    assert back == s
    assert back.hash() == s.hash()


def test_hash_ignores_output_location():
    a = Scenario(output_dir="x", workers=1)
    b = Scenario(output_dir="y", workers=8)
    assert a.hash() == b.hash()
    assert a.hash() != Scenario(seed=1).hash()


def test_load_scenario_file(tmp_path):
    p = tmp_path / "s.ini"
    p.write_text("[carrier]\nfrequency_hz = 16.1e9\n")
    assert load_scenario(p).carrier == 16.1e9
    assert load_scenario().wavelength == pytest.approx(0.018620649565217391)


# ---------------------------------------------------------------------- CLI
def test_cli_all_small(small_config, tmp_path):
    out = tmp_path / "run"
    assert cli.main(["all", "--config", str(small_config), "--out", str(out)]) == cli.EXIT_OK
    names = {p.name for p in out.iterdir()}
    for expected in (
        "array_geometry.csv", "ring_radii.csv", "lens_phase.oamlens", "lens_thickness.oamlens",
        "scan_lens_mode0.csv", "scan_lens_mode2.csv", "focal_lens_mode1.oamfield", "focus_lens.csv",
        "isolation.csv", "coupling.csv", "probes.csv", "ber.csv", "scenario.ini", "manifest.json",
    ):
        assert expected in names
    head, rows = io.read_csv(out / "ber.csv")
    assert head == ["mode", "snr_db", "ber", "bits", "ci_halfwidth", "fec_limit"]
    assert len(rows) == 3 * 3 and all(r[-1] == "0.0038" for r in rows)
    head, rows = io.read_csv(out / "array_geometry.csv")
    assert head == ["mode", "element_index", "x_m", "y_m", "amplitude", "phase_rad"]
    assert len(rows) == 1 + 4 + 8
    manifest = json.loads((out / "manifest.json").read_text())
    assert set(manifest["artifacts"]) == names - {"manifest.json"}
    assert manifest["scenario_hash"] == load_scenario(out / "scenario.ini").hash()
    # the scenario snapshot reproduces the run configuration
    assert load_scenario(out / "scenario.ini", output_dir=str(out)) == load_scenario(small_config, output_dir=str(out))


def test_cli_no_lens_and_overrides(small_config, tmp_path):
    out = tmp_path / "nolens"
    rc = cli.main(["propagate", "--config", str(small_config), "--out", str(out), "--no-lens"])
    assert rc == cli.EXIT_OK
    assert (out / "scan_nolens_mode1.csv").exists()
    assert not (out / "ber.csv").exists()
    out2 = tmp_path / "ber"
    rc = cli.main(["ber", "--config", str(small_config), "--out", str(out2), "--coupling", "diagonal",
                   "--snr-grid", "0,20", "--seed", "9"])
    assert rc == cli.EXIT_OK
    meta = json.loads((out2 / "manifest.json").read_text())
    assert meta["seed"] == 9 and meta["metadata"]["coupling"] == "diagonal"
    assert not (out2 / "isolation.csv").exists()


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.ini"
    bad.write_text("[grid]\npitch_m = 0.02\n")
    assert cli.main(["design", "--config", str(bad), "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG
    assert "grid.pitch_m" in capsys.readouterr().err
    assert cli.main(["design", "--config", str(tmp_path / "missing.ini")]) == cli.EXIT_CONFIG
    assert cli.main(["ber", "--snr-grid", "9:1:1", "--out", str(tmp_path / "o")]) == cli.EXIT_CONFIG

    tight = tmp_path / "tight.ini"
    tight.write_text("[grid]\nsamples = 256\ntaper_inner_m = 0.35\ntaper_outer_m = 0.5\nscan_steps = 4\n")
    assert cli.main(["propagate", "--config", str(tight), "--out", str(tmp_path / "t")]) == cli.EXIT_NUMERIC
    assert "band limit" in capsys.readouterr().err

    blocker = tmp_path / "blocker"
    blocker.write_text("")
    assert cli.main(["design", "--out", str(blocker / "x")]) == cli.EXIT_IO


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "oamlink.cli", "--help"], capture_output=True, text=True)
    assert r.returncode == 0 and "design" in r.stdout
    r = subprocess.run([sys.executable, "-m", "oamlink.cli", "bogus"], capture_output=True, text=True)
    assert r.returncode == 2


def test_design_reports_focal_length(tmp_path):
    out = tmp_path / "d"
    assert cli.main(["design", "--out", str(out)]) == 0
    meta = json.loads((out / "manifest.json").read_text())["metadata"]
    assert meta["predicted_focal_length_m"] == pytest.approx(1.1793587048006847, rel=1e-12)
    head, rows = io.read_csv(out / "ring_radii.csv")
    radii = {int(r[0]): float(r[1]) for r in rows}
    assert radii[0] == 0.0
    assert radii[1] == pytest.approx(0.015953663021755938, rel=1e-12)
    assert math.isclose(radii[2] / radii[1], 1.6588441410249636, rel_tol=1e-12)
