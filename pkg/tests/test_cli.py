import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import pytest

from trisubst.archive import (
    CampaignConfig,
    ResultArchive,
    SchemaError,
    load_families,
    parse_config_text,
    result_from_json,
    result_to_json,
)
from trisubst.cli import EXIT_INADMISSIBLE, EXIT_INVALID, EXIT_OK, EXIT_TRUNCATED, main
from trisubst.cyclotomic import ConfigurationError
from trisubst.parallel import canonical_order


def test_config_parsing():
    cfg = parse_config_text("""
        # sevenfold, smallest factor
        n = 7
        lambda = 1, 1, 0
        prototiles = 1 2 4; 1 3 3, 2 2 3
        workers = 2
        kill-threshold = 8
        orientation = off
    """)
    assert cfg.n == 7 and cfg.lam == (1, 1, 0)
    assert cfg.prototiles == ((1, 2, 4), (1, 3, 3), (2, 2, 3))
    assert cfg.workers == 2 and cfg.kill_threshold == 8 and cfg.orientation is False
    assert parse_config_text("n=5\nlambda=1 1").prototiles == ((1, 1, 3), (1, 2, 2))


@pytest.mark.parametrize("text", [
    "n = 5",
    "lambda = 1 1",
    "n = 9\nlambda = 1 1 1 1",
    "n = 5\nlambda = 1 1 1",
    "n = 5\nlambda = 1 1\ncolour = red",
    "n = 5\nlambda = 1 1\norientation = maybe",
    "n = 5\nlambda = 1 1\nprototiles = 1 1",
    "n = five\nlambda = 1 1",
    "n = 5\nlambda = 0 0",
    "n = 5\nlambda = 1 1\nstarter_side = 4",
])
def test_config_errors(text):
    with pytest.raises(ConfigurationError):
        parse_config_text(text)


def test_result_json_roundtrip(five):
    for r in five.found[1][:50]:
        assert result_from_json(json.loads(json.dumps(result_to_json(r)))) == r
    with pytest.raises(SchemaError):
        result_from_json({"t0": 0})


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    (d / "five.cfg").write_text("n = 5\nlambda = 1 1\n")
    assert main(["search", "--config", str(d / "five.cfg"), "--out", str(d / "a.json")]) == EXIT_OK
    assert main(["post", str(d / "a.json"), "--out", str(d / "f.json")]) == EXIT_OK
    return d


def test_archive_is_byte_stable(workspace, five):
    text = (workspace / "a.json").read_text()
    archive = ResultArchive.parse(text)
    assert archive.emit() == text
    assert archive.results == {t0: canonical_order(rs) for t0, rs in five.found.items()}
    assert archive.config == CampaignConfig(5, (1, 1))


def test_search_is_reproducible(workspace, tmp_path):
    assert main(["search", "--n", "5", "--lambda", "1 1", "--workers", "2", "--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "b.json").read_bytes() == (workspace / "a.json").read_bytes()


def test_families_file(workspace, capsys):
    data = json.loads((workspace / "f.json").read_text())
    assert data["kind"] == "families"
    assert data["summary"]["classes"] == 3
    cfg, fams = load_families(workspace / "f.json")
    assert cfg.n == 5 and fams
    assert max(sum(len(m) for m in members) for _, _, members in fams) == 14
    main(["post", str(workspace / "a.json")])
    assert "orientation classes with complete rules: 3" in capsys.readouterr().out


def test_analyze_output(capsys):
    assert main(["analyze", "--n", "7", "--lambda", "1 1 0"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "x^3 - x^2 - 2x + 1" in out
    assert "  [3, 3, 5]\n  [1, 4, 3]\n  [2, 1, 3]" in out
    assert "verdict: admissible" in out
    assert "not PV, unit" in out


def test_invalid_order_exit_code(capsys):
    assert main(["analyze", "--n", "9", "--lambda", "1 1 1 1"]) == EXIT_INVALID
    assert "odd prime" in capsys.readouterr().err
    assert main(["analyze"]) == EXIT_INVALID


def test_inadmissible_factor(tmp_path, capsys):
    args = ["--n", "11", "--lambda", "1 1 0 0 0"]
    assert main(["analyze", *args]) == EXIT_INADMISSIBLE
    assert "inadmissible" in capsys.readouterr().out
    assert main(["search", *args]) == EXIT_INADMISSIBLE
    out = tmp_path / "empty.json"
    assert main(["search", *args, "--force", "--out", str(out)]) == EXIT_INADMISSIBLE
    archive = ResultArchive.load(out)
    assert all(not rs for rs in archive.results.values())
    assert len(archive.results) == 5


def test_truncation_exit_code(tmp_path):
    assert main(["search", "--n", "5", "--lambda", "1 1", "--max-results", "3",
                 "--out", str(tmp_path / "t.json")]) == EXIT_TRUNCATED
    assert ResultArchive.load(tmp_path / "t.json").truncated


def test_bad_archive(tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"header": {"schema": 99, "kind": "results"}, "results": []}')
    assert main(["post", str(p)]) == EXIT_INVALID
    assert main(["post", str(tmp_path / "missing.json")]) == EXIT_INVALID


def _svg(path):
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    return root


def test_render_archive_and_families(workspace):
    for src, name in (("a.json", "a.svg"), ("f.json", "f.svg")):
        out = workspace / name
        assert main(["render", str(workspace / src), "--out", str(out), "--limit", "3"]) == EXIT_OK
        root = _svg(out)
        assert len(root) > 10
        first = out.read_bytes()
        main(["render", str(workspace / src), "--out", str(out), "--limit", "3"])
        assert out.read_bytes() == first


def test_render_levels(workspace, capsys):
    out = workspace / "k2.svg"
    assert main(["render", str(workspace / "f.json"), "--out", str(out), "--k", "2", "--proto", "1"]) == EXIT_OK
    assert "edge-to-edge True, arrows match True" in capsys.readouterr().out
    _svg(out)
    assert main(["render", str(workspace / "f.json"), "--out", str(out), "--k", "9"]) == EXIT_INVALID
    assert main(["render", str(workspace / "f.json"), "--out", str(out), "--k", "1", "--family", "99"]) == EXIT_INVALID


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "trisubst", "analyze", "--n", "5", "--lambda", "1 1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "x^2 - x - 1" in proc.stdout
