"""
Tests for the forge command-line front end.
"""
import json

import pytest

from src.handlers import cli
from src.handlers.cli import main, parse_colors, premaniplex_payload, resolve_maniplex
from src.models.config import ForgeSettings
from src.services.constants import EXIT_INPUT_ERROR, EXIT_INTERNAL_ERROR, EXIT_NEGATIVE, EXIT_OK
from src.services.exceptions import StructureError


@pytest.fixture(autouse=True)
def clean_env(monkeypatch):
    for variable in ("FORGE_SEED", "FORGE_ORACLE_CAP", "FORGE_ENUMERATION_CAP", "FORGE_MATERIALIZE_CAP"):
        monkeypatch.delenv(variable, raising=False)


def test_parse_colors():
    assert parse_colors("2,1,2") == (1, 2)
    assert parse_colors("") == ()
    with pytest.raises(StructureError):
        parse_colors("1,x")


def test_resolve_names():
    """Named maniplexes; unknown names are input errors."""
    settings = ForgeSettings()
    assert resolve_maniplex("square", settings).num_flags == 8
    assert resolve_maniplex("torus44:1", settings).num_flags == 8
    assert resolve_maniplex("hat2:square", settings).num_flags == 128
    with pytest.raises(StructureError):
        resolve_maniplex("cube", settings)
    with pytest.raises(StructureError):
        resolve_maniplex("torus44:x", settings)


def test_build_torus(tmp_path):
    """build writes the flag graph as JSON."""
    out = tmp_path / "m.json"
    assert main(["build", "torus44:8", "--out", str(out)]) == EXIT_OK
    document = json.loads(out.read_text())
    assert document["rank"] == 3
    assert len(document["adj"][0]) == 512


def test_build_eta(tmp_path):
    """The knight monodromy is reported as a separating involution."""
    out = tmp_path / "eta.json"
    assert main(["build", "eta", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["involution"] and payload["facet_separating"]
    assert payload["word"] == [2, 1, 0, 1, 2, 1, 2, 1]


def test_build_input_errors(tmp_path):
    """Unknown names and unsupported ranks exit with 3."""
    assert main(["build", "dodecahedron", "--out", str(tmp_path / "x.json")]) == EXIT_INPUT_ERROR
    assert main(["build", "xi", "--rank", "5", "--out", str(tmp_path / "x.json")]) == EXIT_INPUT_ERROR


def test_build_torus_too_small(tmp_path):
    """torus44:0 is a construction error."""
    assert main(["build", "torus44:0", "--out", str(tmp_path / "x.json")]) == EXIT_NEGATIVE


def test_export_premaniplex(tmp_path):
    out = tmp_path / "x.dot"
    assert main(["export", "premaniplex", "2nI:5:1,3", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.startswith("graph premaniplex_2_5 {")
    assert main(["export", "premaniplex", "2nI:5", "--out", str(out)]) == EXIT_INPUT_ERROR


def test_export_stg(tmp_path):
    out = tmp_path / "stg.dot"
    assert main(["export", "stg", "torus44:4", "--out", str(out)]) == EXIT_OK
    assert out.read_text().count("0 -- 0") == 3


def test_export_stg_of_cuboctahedron(tmp_path):
    """Two orbits: two semi-edges on each node and one link between them."""
    out = tmp_path / "stg.dot"
    assert main(["export", "stg", "cuboctahedron", "--out", str(out)]) == EXIT_OK
    text = out.read_text()
    assert text.count("0 -- 0") == 2
    assert text.count("1 -- 1") == 2
    assert text.count("0 -- 1") == 1


def test_verify_maniplex_files(tmp_path):
    """The square is a polytope, the one-cell torus is not."""
    square, one_cell, report = tmp_path / "square.json", tmp_path / "one.json", tmp_path / "r.json"
    assert main(["build", "square", "--out", str(square)]) == EXIT_OK
    assert main(["build", "torus44:1", "--out", str(one_cell)]) == EXIT_OK

    assert main(["verify", "--maniplex", str(square), "--oracle", "--out", str(report)]) == EXIT_OK
    assert json.loads(report.read_text())["oracle"]["status"] == "polytope"
    assert main(["verify", "--maniplex", str(one_cell), "--oracle", "--out", str(report)]) == EXIT_NEGATIVE
    assert json.loads(report.read_text())["oracle"]["status"] == "not_polytope"


def test_verify_input_errors(tmp_path):
    """Missing files and missing arguments exit with 3."""
    assert main(["verify", "--maniplex", str(tmp_path / "missing.json")]) == EXIT_INPUT_ERROR
    assert main(["verify"]) == EXIT_INPUT_ERROR
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"rank": 2, "adj": [[1, 0], [0]]}))
    assert main(["verify", "--maniplex", str(bad)]) == EXIT_INPUT_ERROR


def test_verify_voltage_file(tmp_path, two_orbit_rank3):
    """A combined premaniplex and voltage file is read from both options."""
    X, xi = two_orbit_rank3
    path, out = tmp_path / "cover.json", tmp_path / "verdict.json"
    path.write_text(json.dumps(premaniplex_payload(X, xi)))
    code = main(["--jobs", "1", "verify", "--premaniplex", str(path), "--voltage", str(path), "--oracle", "--out", str(out)])
    assert code == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["verdict"]["verdict"] == "polytopal"
    assert payload["cross_validation"]["agree"] is True


def test_build_s3(tmp_path):
    """The asymmetric facet set of {4,4}_(4,0) is found and checked."""
    out = tmp_path / "s3.json"
    assert main(["build", "s3", "--out", str(out)]) == EXIT_OK
    payload = json.loads(out.read_text())
    assert payload["facets"]
    assert payload["checks"] == {"asymmetric": True, "spread": True}
    assert payload["doubled"]["facets"][0] == 0


def test_build_s3_on_square(tmp_path):
    """The square has no spread facet set."""
    out = tmp_path / "s3.json"
    assert main(["build", "s3", "--base", "square", "--out", str(out)]) == EXIT_NEGATIVE
    assert json.loads(out.read_text())["facets"] is None


def test_unexpected_failure_exit_code(tmp_path, monkeypatch):
    """Exceptions outside the domain errors map to the internal-error code."""
    def broken(*args, **kwargs):
        raise ValueError("cannot reshape array")

    monkeypatch.setattr(cli, "find_s3", broken)
    assert main(["build", "s3", "--out", str(tmp_path / "s3.json")]) == EXIT_INTERNAL_ERROR
