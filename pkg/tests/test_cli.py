import json

import pytest

from spinchain.cli import DEFAULTS, ConfigError, dispatch, load_config, main, parse_config
from spinchain.spin_model import ChainParams


def write(tmp_path, text, name="run.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_empty_config_gives_defaults():
    config = parse_config(None)
    assert config.values == {**DEFAULTS, "qubit.c0": complex(DEFAULTS["qubit.c0"]),
                             "qubit.c1": complex(DEFAULTS["qubit.c1"])}
    assert config.chain == ChainParams()
    assert config.rabi == 0.1


def test_nested_and_dotted_tables(tmp_path):
    path = write(tmp_path, 'chain.j2 = 0.2\n[qubit]\nc0 = 0.6\nc1 = "0.8j"\n')
    config = parse_config(path)
    assert config.qubit.c1 == 0.8j
    assert config.chain.j2 == 0.2


@pytest.mark.parametrize("values, bad_key", [
    ({"qubit": {"c0": 1.0, "c1": 1.0}}, "qubit"),
    ({"chain": {"colour": 3}}, "chain.colour"),
    ({"chain": {"j1": "ten"}}, "chain.j1"),
    ({"chain": {"j1": -1.0}}, "chain"),
    ({"pulse": {"rabi": 0.0}}, "pulse.rabi"),
    ({"integrator": {"max_steps": 1.5}}, "integrator.max_steps"),
    ({"sweep": {"rabi": {"spacing": "cubic"}}}, "sweep.rabi"),
    ({"rabi2pik": {"k_max": 0}}, "rabi2pik.k_max"),
])
def test_invalid_values_are_reported(values, bad_key):
    with pytest.raises(ConfigError) as info:
        load_config(values)
    assert bad_key in info.value.errors


def test_invalid_qubit_exits_2(tmp_path, capsys):
    path = write(tmp_path, "qubit.c0 = 1.0\nqubit.c1 = 1.0\n")
    assert main(["teleport", "--config", str(path), "--out", str(tmp_path)]) == 2
    assert "qubit" in capsys.readouterr().err


def test_unreadable_config_exits_2(tmp_path):
    assert main(["spectrum", "--config", str(tmp_path / "missing.toml")]) == 2
    assert main(["spectrum", "--config", str(write(tmp_path, "chain.j1 = = 2"))]) == 2


def test_unknown_subcommand_exits_2():
    with pytest.raises(SystemExit) as info:
        main(["fly"])
    assert info.value.code == 2


def test_bad_worker_count_exits_2(tmp_path):
    assert main(["spectrum", "--workers", "0", "--out", str(tmp_path)]) == 2


def test_serialize_round_trip(tmp_path):
    config = load_config({"qubit": {"c0": "0.6", "c1": "0.8j"}, "chain": {"j2": 0.25},
                          "integrator": {"hard_step": 0.001}})
    again = parse_config(write(tmp_path, config.serialize()))
    assert again.values == config.values
    assert again.digest() == config.digest()


def test_spectrum(tmp_path):
    assert main(["spectrum", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "spectrum.csv").read_text().splitlines()
    assert rows[0] == "state_index,bits,energy"
    assert len(rows) == 17
    energies = {int(r.split(",")[0]): float(r.split(",")[2]) for r in rows[1:]}
    assert energies[0] == pytest.approx(-765.4)
    assert energies[4] - energies[0] == pytest.approx(420.4)
    manifest = json.loads((tmp_path / "spectrum.manifest.json").read_text())
    assert manifest["command"] == "spectrum"
    assert manifest["outputs"] == ["spectrum.csv"]


def test_teleport(tmp_path):
    assert main(["teleport", "--out", str(tmp_path)]) == 0
    report = (tmp_path / "teleport_report.txt").read_text()
    for block in ("# pulses", "# probabilities", "# spin_expectations", "# fidelity"):
        assert block in report
    header = (tmp_path / "teleport_trajectory.csv").read_text().splitlines()[0]
    assert header.startswith("t_us,p0,") and header.endswith("iz3")


def test_integration_failure_exits_3(tmp_path, capsys):
    path = write(tmp_path, "integrator.max_steps = 10\n")
    assert main(["teleport", "--config", str(path), "--out", str(tmp_path)]) == 3
    assert "numerical failure" in capsys.readouterr().err


def test_rabi_2pik_and_two_level(tmp_path):
    config = load_config({"rabi2pik": {"k_max": 50}})
    assert dispatch("rabi-2pik", config, tmp_path) == 0
    assert dispatch("two-level", config, tmp_path) == 0
    assert (tmp_path / "rabi_2pik.csv").read_text().startswith("delta_label,delta,k,kind,omega")
    clusters = (tmp_path / "rabi_2pik_clusters.csv").read_text()
    assert len(clusters.splitlines()) > 1
    rows = (tmp_path / "two_level.csv").read_text().splitlines()
    assert len(rows) > 2


def test_manifest_rerun_is_reproducible(tmp_path):
    cfg = write(tmp_path, 'sweep.rabi.min = 0.1\nsweep.rabi.max = 0.12\nsweep.rabi.points = 2\n'
                          'qubit.c1 = "0.8j"\nqubit.c0 = 0.6\n')
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["sweep-rabi", "--config", str(cfg), "--out", str(first)]) == 0
    manifest = json.loads((first / "sweep-rabi.manifest.json").read_text())
    replay = write(tmp_path, manifest["config"], "replay.toml")
    assert main(["sweep-rabi", "--config", str(replay), "--out", str(second), "--workers", "2"]) == 0
    assert (first / "sweep_rabi.csv").read_bytes() == (second / "sweep_rabi.csv").read_bytes()
    again = json.loads((second / "sweep-rabi.manifest.json").read_text())
    assert again["config_sha256"] == manifest["config_sha256"]
