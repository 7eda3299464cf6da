"""render_figs CLI behavior and exit codes."""

import json

from conftest import write_aggregate

from miptkz_figures.cli import main


def _write_spec(path, doc):
    path.write_text(json.dumps(doc))
    return path


def test_success_prints_outputs(ramp_family, tmp_path, capsys):
    spec = _write_spec(
        ramp_family["dir"] / "fig.json",
        {
            "panels": [
                {"kind": "curves", "inputs": ["ramp_R*.csv"], "observable": "S_half"}
            ]
        },
    )
    out = tmp_path / "rendered"
    rc = main([str(spec), "--out", str(out)])
    assert rc == 0
    printed = capsys.readouterr().out
    assert str(out / "fig.svg") in printed
    assert str(out / "fig.png") in printed
    assert (out / "fig.svg").exists()
    assert (out / "fig.png").exists()


def test_invalid_spec_exits_2(tmp_path, capsys):
    spec = _write_spec(tmp_path / "bad.json", {"panels": [{"kind": "pie"}]})
    rc = main([str(spec), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "kind" in capsys.readouterr().err


def test_unparseable_json_exits_2(tmp_path, capsys):
    spec = tmp_path / "broken.json"
    spec.write_text("{not json")
    rc = main([str(spec), "--out", str(tmp_path / "o")])
    assert rc == 2
    assert "broken.json" in capsys.readouterr().err


def test_missing_spec_file_exits_2(tmp_path, capsys):
    rc = main([str(tmp_path / "ghost.json"), "--out", str(tmp_path / "o")])
    assert rc == 2


def test_data_problem_exits_1(tmp_path, capsys):
    write_aggregate(tmp_path, "only", g=[0.0], mean=[1.0])
    (tmp_path / "only.meta.json").unlink()
    spec = _write_spec(
        tmp_path / "fig.json",
        {
            "panels": [
                {"kind": "curves", "inputs": ["only.csv"], "observable": "S_half"}
            ]
        },
    )
    rc = main([str(spec), "--out", str(tmp_path / "o")])
    assert rc == 1
    assert "only.meta.json" in capsys.readouterr().err
