import json

import pytest
import yaml

from itsradio import __version__
from itsradio.cli import main
from itsradio.csvio import read_csv
from itsradio.harness import (
    ConfigError,
    ScenarioConfig,
    band_report,
    list_scenarios,
    load_scenario,
    prt_sweep,
    run_scenario,
)

EXPECTED_SCENARIOS = {
    "fig2_fading",
    "fig3_diversity",
    "fig4_regions",
    "fig5_jamming",
    "fig5_fhss_jamming",
    "fig6_prt",
    "radar_nearest",
    "radar_diversity",
    "comm_diversity",
}


def test_band_report_table():
    rows = band_report()
    assert len(rows) == 3
    assert rows[0].delta_f_mhz == 30
    assert rows[2].lambda_cm == 5.172
    assert rows[1].space_diversity_verdict == "Effective"
    assert [r.lambda_cm for r in rows] == [33, 12.5, 5.172]
    for r in rows:
        assert r.delta_f_mhz == r.span_mhz[1] - r.span_mhz[0]


def test_bundled_scenarios_present_and_valid():
    assert set(list_scenarios()) == EXPECTED_SCENARIOS
    for name in list_scenarios():
        cfg = load_scenario(name)
        assert cfg.name == name
        cfg.validate()


def test_config_round_trip(tmp_path):
    cfg = load_scenario("radar_nearest")
    path = tmp_path / "c.yaml"
    path.write_text(cfg.dump())
    again = ScenarioConfig.load(path)
    assert again == cfg
    assert again.dump() == cfg.dump()


def test_validation_lists_every_error():
    data = {
        "name": "bad",
        "mode": "radar",
        "seeds": [-1],
        "carriers_hz": [0],
        "channel": {"chip_snr_db": 10, "ebn0_db": 10},
        "timing": {"samples_per_chip": 0},
        "params": {},
    }
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict(data)
    fields = " ".join(exc.value.errors)
    for key in ("seeds", "carriers_hz", "timing", "params.target_ranges_m"):
        assert key in fields
    assert exc.value.as_dict()["scenario"] == "bad"


def test_validation_catches_channel_and_mode_errors():
    base = {"name": "x", "mode": "region_demo", "carriers_hz": [11.5e9]}
    with pytest.raises(ConfigError) as exc:
        ScenarioConfig.from_dict({**base, "params": {"duration_s": -1}})
    msg = str(exc.value)
    assert "exactly two carriers" in msg and "delta_tau_center_s" in msg and "duration_s" in msg
    with pytest.raises(ConfigError, match="channel"):
        ScenarioConfig.from_dict(
            {"name": "y", "mode": "comm", "params": {"n_bits": 10}, "channel": {"antenna_decorrelation": 2}}
        )
    with pytest.raises(ConfigError, match="one gain per entry"):
        ScenarioConfig.from_dict(
            {"name": "v", "mode": "radar", "params": {"target_ranges_m": [1, 2], "target_gains": [1]}}
        )
    with pytest.raises(ConfigError, match="unknown field"):
        ScenarioConfig.from_dict({"name": "z", "mode": "comm", "bogus": 1})
    with pytest.raises(ConfigError, match="mode"):
        ScenarioConfig.from_dict({"name": "w", "mode": "warp"})


def test_channel_builder_units():
    cfg = ScenarioConfig.from_dict(
        {
            "name": "t",
            "mode": "comm",
            "params": {"n_bits": 10},
            "channel": {"taps": [{"range_m": 30, "gain_db": -6, "phase_deg": 90}], "chip_snr_db": 10},
        }
    )
    model = cfg.build_channel()
    tap = model.taps[0]
    assert tap.delay_s == pytest.approx(2 * 30 / 299_792_458)
    assert abs(tap.gain) == pytest.approx(10 ** (-6 / 20))
    assert model.noise_psd == pytest.approx(0.4)


def test_fig2_span_and_fig4_labels(tmp_path):
    arts = run_scenario(load_scenario("fig2_fading"), tmp_path)
    rssi_file = next(f for f in arts.files if f.name.startswith("rssi_"))
    meta, rows = read_csv(rssi_file)
    assert meta == {"config": "fig2_fading", "seed": "1", "version": __version__}
    levels = [float(r["rssi_a_db"]) for r in rows]
    assert max(levels) - min(levels) >= 20

    arts = run_scenario(load_scenario("fig4_regions"), tmp_path)
    _, rows = read_csv(arts.files[0])
    assert {"I", "II", "III"} <= {r["region"] for r in rows}
    summary = json.loads((tmp_path / "fig4_regions" / "summary.json").read_text())
    assert summary["seeds"]["4"]["fade_depth_hi_db"] >= 30


def test_run_is_byte_deterministic(tmp_path):
    for name in ("radar_nearest", "comm_diversity", "fig3_diversity"):
        a = run_scenario(load_scenario(name), tmp_path / "a")
        b = run_scenario(load_scenario(name), tmp_path / "b")
        for fa, fb in zip(a.files, b.files):
            assert fa.read_bytes() == fb.read_bytes()


def test_prt_sweep_examples():
    cfg = load_scenario("fig6_prt")
    cfg.params["n_trials"] = 2
    rows = {round(r.prt_s * 1e6): r for r in prt_sweep([300e-6, 350e-6, 500e-6], cfg)}
    assert rows[500].valid and not rows[300].valid
    assert rows[350].max_unambiguous_range_m / 1e3 == pytest.approx(52.46, abs=0.01)
    assert rows[500].ranging_error_m is not None
    with pytest.raises(ValueError):
        prt_sweep([0.0], cfg)


def test_summary_has_headline_metrics(tmp_path):
    expect = {
        "radar_nearest": "mean_abs_range_error_m",
        "comm_diversity": "ber_selection",
        "fig3_diversity": "p_selected",
        "fig4_regions": "region_duration_s",
    }
    for name, key in expect.items():
        arts = run_scenario(load_scenario(name), tmp_path)
        seed_summary = next(iter(arts.summary["seeds"].values()))
        assert key in seed_summary


def test_cli_list_and_bands(capsys, tmp_path):
    assert main(["list"]) == 0
    out = capsys.readouterr().out
    assert "fig4_regions\tregion_demo" in out
    assert main(["bands", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "bands.csv")
    assert rows[2]["lambda_cm"] == "5.172"


def test_cli_run_with_seed_and_plot(capsys, tmp_path):
    assert main(["run", "--scenario", "radar_nearest", "--seed", "3", "--out", str(tmp_path), "--plot"]) == 0
    d = tmp_path / "radar_nearest"
    assert (d / "ranges_seed3.csv").exists()
    assert (d / "ranges_seed3.png").stat().st_size > 0
    assert (d / "summary.json").exists()


def test_cli_default_output_is_csv_only(tmp_path):
    assert main(["run", "--scenario", "fig4_regions", "--out", str(tmp_path)]) == 0
    assert not list((tmp_path / "fig4_regions").glob("*.png"))


def test_cli_sweep(tmp_path, capsys):
    cfg = load_scenario("fig6_prt").to_dict()
    cfg["params"]["n_trials"] = 1
    path = tmp_path / "p.yaml"
    path.write_text(yaml.safe_dump(cfg))
    assert main(["sweep", "--config", str(path), "--prt", "0.0003,0.0005", "--out", str(tmp_path)]) == 0
    _, rows = read_csv(tmp_path / "fig6_prt" / "prt_sweep_seed6.csv")
    assert [r["valid"] for r in rows] == ["false", "true"]


def test_cli_errors_are_json(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"name": "bad", "mode": "radar", "params": {}}))
    assert main(["run", "--config", str(bad)]) == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "invalid config"
    assert any("target_ranges_m" in f for f in err["fields"])
    assert main(["run", "--scenario", "nope"]) == 2
    assert "no bundled scenario" in capsys.readouterr().err
    assert main(["run", "--config", str(tmp_path / "missing.yaml")]) == 1
    assert json.loads(capsys.readouterr().err)["error"] == "FileNotFoundError"


def test_simulation_error_carries_scenario_context(tmp_path):
    from itsradio.harness import ScenarioError

    cfg = load_scenario("radar_nearest")
    cfg.params["target_ranges_m"] = [50_000.0]
    cfg.params["target_gains"] = [1.0]
    with pytest.raises(ScenarioError) as exc:
        run_scenario(cfg, tmp_path)
    assert exc.value.scenario == "radar_nearest"
    assert "delay beyond buffer" in exc.value.message
