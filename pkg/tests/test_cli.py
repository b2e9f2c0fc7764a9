import csv
import json
import math
from pathlib import Path

import pytest

from epcavity import cli
from epcavity.config import ConfigError, load_config, parse_config_text
from epcavity.errors import NotConverged

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BASE = """
[run]
mode = {mode}

[ratio]
p = 1
q = 1
kappa_2 = 2
{g}

[mirror]
alpha = 2.25
beta = 2.25
kappa_int = {kint}

[probe]
omega_range = -10, 10
n_points = 11

[output]
path = out
"""


def write_cfg(tmp_path, mode="cpa", g="g_2 = 5", kint="0.5", name="c.cfg"):
    path = tmp_path / name
    path.write_text(BASE.format(mode=mode, g=g, kint=kint))
    return path


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


@pytest.mark.parametrize("cfg", sorted(p.name for p in CONFIGS.glob("*.cfg")))
def test_shipped_configs_validate(cfg, capsys):
    assert cli.main(["validate", str(CONFIGS / cfg)]) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "ok"


def test_symmetric_sweep_config(tmp_path):
    assert cli.main(["run", str(CONFIGS / "fig2-symmetric.cfg"), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "fig2-symmetric.csv")
    assert rows[0] == list(cli.COLUMNS["eig-sweep"])
    body = rows[1:]
    assert body[0][-1] == "Infeasible" and body[0][1] == "nan"
    for r in body:
        if r[-1] == "Infeasible":
            continue
        g = float(r[0])
        im = max(abs(float(r[i])) for i in (2, 4, 6))
        if g >= 4 / math.sqrt(3):
            assert im < 1e-9
        elif g > 2.0:
            assert im > 1e-6


def test_p3_locate_config(tmp_path):
    cli.main(["run", str(CONFIGS / "fig3-p3q301.cfg"), "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "fig3-p3q301.csv")
    assert rows[0] == ["g2_star", "order", "a_resid", "b_resid"]
    got = [(float(r[0]), int(r[1])) for r in rows[1:]]
    assert [o for _, o in got] == [3, 2, 2]
    for (g, _), target in zip(got, (2.216, 2.256, 2.357)):
        assert g == pytest.approx(target, rel=0.02)


def test_fig5_writes_five_spectra(tmp_path):
    cli.main(["run", str(CONFIGS / "fig5.cfg"), "--out", str(tmp_path)])
    meta = json.loads((tmp_path / "fig5.meta.json").read_text())
    assert meta["data_files"] == [f"fig5_g2-{i:03d}.csv" for i in range(5)]
    rows = read_csv(tmp_path / "fig5_g2-004.csv")
    assert rows[0] == list(cli.COLUMNS["spectrum"])
    assert len(rows) == 2002


def test_determinism_and_sidecar_round_trip(tmp_path):
    cfg = CONFIGS / "fig2-asymmetric-ep.cfg"
    a, b, c = tmp_path / "a", tmp_path / "b", tmp_path / "c"
    cli.main(["run", str(cfg), "--out", str(a)])
    cli.main(["run", str(cfg), "--out", str(b)])
    cli.main(["run", str(a / "fig2-asymmetric-ep.meta.json"), "--out", str(c)])
    ref = (a / "fig2-asymmetric-ep.csv").read_bytes()
    assert (b / "fig2-asymmetric-ep.csv").read_bytes() == ref
    assert (c / "fig2-asymmetric-ep.csv").read_bytes() == ref
    assert (c / "fig2-asymmetric-ep.meta.json").read_bytes() == (a / "fig2-asymmetric-ep.meta.json").read_bytes()


def test_thread_count_does_not_change_output(tmp_path, monkeypatch):
    cfg = CONFIGS / "fig5.cfg"
    monkeypatch.setenv("EPCAVITY_THREADS", "1")
    cli.main(["run", str(cfg), "--out", str(tmp_path / "one")])
    monkeypatch.setenv("EPCAVITY_THREADS", "4")
    cli.main(["run", str(cfg), "--out", str(tmp_path / "four")])
    for i in range(5):
        name = f"fig5_g2-{i:03d}.csv"
        assert (tmp_path / "one" / name).read_bytes() == (tmp_path / "four" / name).read_bytes()


def test_json_format(tmp_path):
    path = write_cfg(tmp_path)
    assert cli.main(["run", str(path), "--out", str(tmp_path), "--format", "json"]) == 0
    data = json.loads((tmp_path / "out.json").read_text())
    assert data["columns"] == ["omega_cpa"]
    assert [r[0] for r in data["rows"]] == pytest.approx([-math.sqrt(59), 0, math.sqrt(59)], abs=1e-10)


def test_seventeen_digits():
    assert cli.fmt_number(0.1) == "0.10000000000000001"
    assert cli.fmt_number(3) == "3"
    assert cli.fmt_number(math.nan) == "nan"
    assert float(cli.fmt_number(1 / 3)) == 1 / 3


def test_dynamics_check_mode(tmp_path):
    path = write_cfg(tmp_path, mode="dynamics-check", g="g_2 = 3")
    assert cli.main(["run", str(path), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "out.csv")[1:]
    assert len(rows) == 11
    assert max(float(r[3]) for r in rows) < 1e-6


def test_mirror_violation_exit_code(tmp_path, capsys):
    path = write_cfg(tmp_path, kint="0.4")
    assert cli.main(["run", str(path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "validation"
    assert err["residual"] == pytest.approx(0.1)


@pytest.mark.parametrize(
    "mode,g",
    [("bogus", "g_2 = 5"), ("cpa", "g2_range = 2, 3"), ("eig-sweep", "g_2 = 3"), ("cpa", "g_2 = 3, 4"), ("cpa", "")],
)
def test_invalid_configs(tmp_path, mode, g):
    path = write_cfg(tmp_path, mode=mode, g=g)
    assert cli.main(["validate", str(path)]) == 1


def test_missing_file(tmp_path):
    assert cli.main(["run", str(tmp_path / "nope.cfg")]) == 1


def test_infeasible_single_value_is_validation_error(tmp_path, capsys):
    path = write_cfg(tmp_path, g="g_2 = 1.5")
    assert cli.main(["run", str(path), "--out", str(tmp_path)]) == 1
    err = json.loads(capsys.readouterr().err)
    assert err["kind"] == "validation" and "1.5" in err["message"]


def test_numeric_failure_exit_code(tmp_path, monkeypatch):
    def boom(cfg):
        raise NotConverged("drift", 1e-3)
    monkeypatch.setattr(cli, "execute", boom)
    assert cli.main(["run", str(write_cfg(tmp_path)), "--out", str(tmp_path)]) == 2


def test_parse_errors():
    with pytest.raises(ConfigError):
        parse_config_text("[run]\nmode = cpa\n")
    with pytest.raises(ConfigError):
        parse_config_text(BASE.format(mode="cpa", g="g_2 = five", kint="0.5"))


def test_load_sidecar_dict(tmp_path):
    path = write_cfg(tmp_path)
    cfg = load_config(path)
    side = tmp_path / "x.meta.json"
    side.write_text(json.dumps({"config": cfg.to_dict()}))
    assert load_config(side) == cfg
