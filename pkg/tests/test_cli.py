import numpy as np
import pytest

from wgqed.cli import main, parse_config
from wgqed.experiments import ConfigError, compare_schemes, run

TINY_SWEEP = """
experiment two_qubit_distance_sweep

[model]
kind gapless_chain
length 62.83185307179586
modes 200
coupling 0.04

[qubits]
gaps 1.0 1.0

[sweep]
variable separation
start 3.0
stop 7.0
samples 3

[numerics]
t_end 50.0
dt_out 0.5

[output]
directory {out}
"""

IDE_SCHEMES = """
experiment ide_reference

[model]
kind exponential_continuum
coupling {g}
cutoff 10.0

[qubits]
gaps 1.0 1.0

[sweep]
variable separation
start 4.0
stop 8.0
samples 2

[numerics]
t_end 140.0
dt 0.02
fit_start 45.0

[output]
directory {out}
"""


def test_parse_config_round_trip(tmp_path):
    cfg = parse_config(TINY_SWEEP.format(out=tmp_path))
    assert cfg.kind == "two_qubit_distance_sweep"
    assert cfg.model["kind"] == "gapless_chain"
    assert cfg.qubits["gaps"] == ["1.0", "1.0"]
    assert cfg.sweep["samples"] == "3"
    assert cfg.num("t_end", 0.0) == 50.0


def test_parse_errors_name_the_line():
    with pytest.raises(ConfigError, match=":3:"):
        parse_config("experiment ide_reference\n\n[nonsense]\n")
    with pytest.raises(ConfigError, match=":1:"):
        parse_config("stray words here\n")
    with pytest.raises(ConfigError, match="no value"):
        parse_config("[model]\nkind\n")


def test_unknown_model_key_rejected(tmp_path):
    text = TINY_SWEEP.format(out=tmp_path).replace("coupling 0.04", "couplings 0.04")
    cfg = parse_config(text)
    with pytest.raises(ConfigError, match="couplings"):
        run(cfg)


def test_odd_mode_count_is_config_error(tmp_path):
    text = TINY_SWEEP.format(out=tmp_path).replace("modes 200", "modes 201")
    cfg = parse_config(text)
    with pytest.raises(ConfigError, match="modes"):
        run(cfg)


def test_sweep_needs_two_samples(tmp_path):
    text = TINY_SWEEP.format(out=tmp_path).replace("samples 3", "samples 1")
    with pytest.raises(ConfigError, match="2 samples"):
        run(parse_config(text))


def test_distance_sweep_schema_and_determinism(tmp_path):
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        cfg = parse_config(TINY_SWEEP.format(out=out))
        run(cfg)
    header = (out1 / "summary.csv").read_text().splitlines()[0]
    assert header == "d,gamma_fit,gamma12_fit,g12_fit,gamma_pred,gamma12_pred,g12_pred"
    assert (out1 / "summary.csv").read_bytes() == (out2 / "summary.csv").read_bytes()
    t1 = sorted(p.name for p in (out1 / "traces").iterdir())
    assert len(t1) == 3
    for name in t1:
        assert (out1 / "traces" / name).read_bytes() == (out2 / "traces" / name).read_bytes()
    manifest = (out1 / "manifest.txt").read_text()
    assert "experiment two_qubit_distance_sweep" in manifest
    assert "wall_seconds" in manifest


def test_cli_main_exit_codes(tmp_path):
    cfg_path = tmp_path / "sweep.cfg"
    cfg_path.write_text(TINY_SWEEP.format(out=tmp_path / "run"))
    assert main(["two-qubit-distance-sweep", "--config", str(cfg_path)]) == 0
    assert (tmp_path / "run" / "summary.csv").exists()
    # subcommand contradicting the config's experiment line
    assert main(["lightcone-map", "--config", str(cfg_path)]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text(TINY_SWEEP.format(out=tmp_path).replace("modes 200", "modes 201"))
    assert main(["two-qubit-distance-sweep", "--config", str(bad)]) == 2
    missing = tmp_path / "nope.cfg"
    assert main(["two-qubit-distance-sweep", "--config", str(missing)]) == 2


def test_cli_out_override(tmp_path):
    cfg_path = tmp_path / "sweep.cfg"
    cfg_path.write_text(TINY_SWEEP.format(out=tmp_path / "ignored"))
    target = tmp_path / "override"
    assert main(["two-qubit-distance-sweep", "--config", str(cfg_path), "--out", str(target)]) == 0
    assert (target / "summary.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_compare_schemes_schema(tmp_path):
    cfg = parse_config(IDE_SCHEMES.format(g=0.04, out=tmp_path))
    rows = compare_schemes(cfg)
    schemes = {row[1] for row in rows}
    assert schemes == {"none", "simplified", "self_consistent"}
    text = (tmp_path / "schemes.csv").read_text().splitlines()
    assert text[0] == "d,scheme,err_gamma,err_gamma12,err_g12"
    assert len(text) == 1 + 2 * 3


def test_compare_schemes_zero_coupling(tmp_path):
    cfg = parse_config(IDE_SCHEMES.format(g=0.0, out=tmp_path))
    rows = compare_schemes(cfg)
    for row in rows:
        assert row[2] == row[3] == row[4] == 0.0


def test_numerical_failure_exit_code(tmp_path):
    # revival horizon violation surfaces as a numerical failure (exit 3)
    text = TINY_SWEEP.format(out=tmp_path / "r").replace("t_end 50.0", "t_end 500.0")
    cfg_path = tmp_path / "bad_numerics.cfg"
    cfg_path.write_text(text)
    assert main(["two-qubit-distance-sweep", "--config", str(cfg_path)]) == 3


def test_single_qubit_cutoff_sweep_runs(tmp_path):
    text = """
experiment single_qubit_cutoff_sweep

[model]
kind exponential_continuum
coupling 0.04
cutoff 10.0

[qubits]
gaps 1.0

[sweep]
variable cutoff
start 2.0
stop 50.0
samples 5
scale log

[output]
directory {out}
""".format(out=tmp_path)
    run(parse_config(text))
    lines = (tmp_path / "summary.csv").read_text().splitlines()
    assert lines[0].startswith("omega_c,delta_sc,gamma_sc,delta_cf,gamma_cf")
    assert len(lines) == 6
    data = np.array([[float(x) for x in ln.split(",")] for ln in lines[1:]])
    # closed form tracks the self-consistent solution on the whole sweep
    assert np.allclose(data[:, 1], data[:, 3], rtol=1e-8)
    # the shift magnitude grows with the cutoff
    assert np.all(np.diff(-data[:, 1]) > 0)
