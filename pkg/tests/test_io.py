import json

import numpy as np
import pytest

from dfmlab.archive import decode, read_archive, write_archive
from dfmlab.cli import main
from dfmlab.config import ExperimentConfig, parse_config
from dfmlab.errors import ArchiveError, ConfigError
from dfmlab.fields import random_bundle
from dfmlab.lattice import Lattice


@pytest.mark.parametrize("kind,rep,dims", [("U1", None, (4, 4)), ("SU2", None, (2, 3)),
                                           ("SU2", "SU2-real4", (2, 2, 2))])
def test_archive_roundtrip_is_bit_exact(tmp_path, kind, rep, dims):
    b = random_bundle(Lattice(dims), kind, 3, 3.0, rep=rep, coupling=0.37)
    write_archive(tmp_path / "a.dfm", b)
    c = read_archive(tmp_path / "a.dfm")
    assert c.links.data.tobytes() == b.links.data.tobytes()
    assert c.scalar.data.tobytes() == b.scalar.data.tobytes()
    assert (c.lattice, c.scalar.rep, c.links.coupling, c.acted) == (b.lattice, b.scalar.rep, 0.37, True)


def test_archive_header_layout(tmp_path):
    write_archive(tmp_path / "a.dfm", random_bundle(Lattice((3, 2)), "SU2", 1, 1.0))
    raw = (tmp_path / "a.dfm").read_bytes()
    assert raw[:4] == b"DFM1"
    assert raw[4:6] == b"\x01\x00" and raw[6] == 1 and raw[7] == 2
    assert raw[8:16] == b"\x03\x00\x00\x00\x02\x00\x00\x00"


def test_archive_errors(tmp_path):
    write_archive(tmp_path / "a.dfm", random_bundle(Lattice((2,)), "U1", 1, 1.0))
    raw = (tmp_path / "a.dfm").read_bytes()
    with pytest.raises(ArchiveError, match="bad magic"):
        decode(b"DFM2" + raw[4:])
    with pytest.raises(ArchiveError, match="version"):
        decode(raw[:4] + b"\x07\x00" + raw[6:])
    with pytest.raises(ArchiveError, match="truncated"):
        decode(raw[:-1])
    with pytest.raises(ArchiveError, match="trailing"):
        decode(raw + b"\x00")
    with pytest.raises(ArchiveError):
        read_archive(tmp_path / "missing.dfm")


def test_config_parsing():
    cfg = parse_config("""
        # comment
        group = SU2
        dims = 2, 3   # trailing comment
        xis = 10, 100
        single_mode = false
        rep = none
    """)
    assert cfg.dims == (2, 3) and cfg.xis == (10.0, 100.0) and cfg.rep is None
    assert cfg.tol == 1e-8 and ExperimentConfig().tol == 1e-10


@pytest.mark.parametrize("text", ["colour = red", "dims = 2\ndims = 3", "xi = -1", "seed = x", "novalue",
                                  "group = SU3", "gauge = coulomb"])
def test_config_rejects_bad_input(text):
    with pytest.raises(ConfigError):
        parse_config(text)


def run_cli(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def test_cli_check_composers(tmp_path, capsys):
    assert run_cli(tmp_path, "check-composers") == 0
    summary = json.loads((tmp_path / "check_composers.json").read_text())
    assert summary["passed"] and all(c["passed"] for c in summary["checks"])


def test_cli_invalid_config_exits_2(tmp_path):
    cfg = tmp_path / "bad.conf"
    cfg.write_text("lattice_size = 4\n")
    assert main(["gaugefix", "--config", str(cfg), "--out", str(tmp_path)]) == 2


def test_cli_bad_archive_exits_2(tmp_path, capsys):
    (tmp_path / "bad.dfm").write_bytes(b"NOPE" + bytes(20))
    cfg = tmp_path / "c.conf"
    cfg.write_text(f"input = {tmp_path / 'bad.dfm'}\n")
    assert main(["gaugefix", "--config", str(cfg), "--out", str(tmp_path)]) == 2
    assert "bad magic" in capsys.readouterr().err


def test_cli_nonconvergence_exits_1(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("group = SU2\ndims = 2, 2\nspread = 1.0\nmax_iter = 1\nsolver_tol = 1e-14\n")
    assert main(["gaugefix", "--config", str(cfg), "--out", str(tmp_path)]) == 1
    summary = json.loads((tmp_path / "gaugefix.json").read_text())
    assert summary["solve"]["converged"] is False


def test_cli_gaugefix_archive_is_dressed(tmp_path):
    assert run_cli(tmp_path, "gaugefix", "--seed", "5") == 0
    psi = read_archive(tmp_path / "dressed.dfm")
    assert not psi.acted


def test_cli_xi_sweep_csv(tmp_path):
    cfg = tmp_path / "c.conf"
    cfg.write_text("dims = 4\nsingle_mode = true\nxis = 2, 20, 200, 2000\nsolver_tol = 1e-12\n")
    assert main(["xi-sweep", "--config", str(cfg), "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "xi_sweep.csv").read_text().splitlines()
    assert rows[0] == "xi,mass,distance,converged,predicted"
    vals = np.array([[float(x) for x in r.split(",")[:3]] for r in rows[1:]])
    np.testing.assert_allclose(vals[:, 2], 2 / (2 + vals[:, 1]), atol=1e-12)
