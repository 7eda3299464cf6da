"""End-to-end rendering on synthetic inputs."""

import json

import pytest
from conftest import write_aggregate, write_fit_report

from miptkz_figures import InputError, render
from miptkz_figures.spec import parse_spec

PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


def _three_panel_doc():
    return {
        "name": "demo",
        "layout": [1, 3],
        "panels": [
            {
                "kind": "curves",
                "inputs": ["ramp_R*.csv"],
                "observable": "S_half",
                "label": "R",
                "title": "ramps",
            },
            {
                "kind": "extract",
                "inputs": ["ramp_R*.csv"],
                "observable": "S_half",
                "x_label": "R",
                "at": {"g": 0.0},
                "xscale": "log",
                "guides": [{"type": "logline", "report": "decay.report.json"}],
            },
            {
                "kind": "collapse",
                "input": "velocity.csv",
                "label": "R",
            },
        ],
    }


def test_render_three_panel_figure(ramp_family, tmp_path):
    spec = parse_spec(_three_panel_doc(), "demo", ramp_family["dir"])
    out = tmp_path / "out"
    svg, png = render(spec, out)
    assert svg == out / "demo.svg"
    assert png == out / "demo.png"
    assert svg.read_bytes().lstrip().startswith(b"<?xml")
    assert png.read_bytes().startswith(PNG_MAGIC)
    assert svg.stat().st_size > 1000
    assert png.stat().st_size > 1000


def test_render_is_deterministic(ramp_family, tmp_path):
    spec = parse_spec(_three_panel_doc(), "demo", ramp_family["dir"])
    svg1, png1 = render(spec, tmp_path / "first")
    svg2, png2 = render(spec, tmp_path / "second")
    assert svg1.read_bytes() == svg2.read_bytes()
    assert png1.read_bytes() == png2.read_bytes()


def test_guides_come_from_fit_report(ramp_family, tmp_path):
    """Changing only the fit report must change the rendered figure."""
    spec = parse_spec(_three_panel_doc(), "demo", ramp_family["dir"])
    _, png1 = render(spec, tmp_path / "a")
    write_fit_report(
        ramp_family["dir"], "decay", {"slope": -0.30, "intercept": 1.5}
    )
    _, png2 = render(spec, tmp_path / "b")
    assert png1.read_bytes() != png2.read_bytes()


def test_powerlaw_guide(ramp_family, tmp_path):
    doc = {
        "panels": [
            {
                "kind": "extract",
                "inputs": ["ramp_R*.csv"],
                "observable": "S_half",
                "x_label": "R",
                "at": {"g": 0.0},
                "xscale": "log",
                "yscale": "log",
                "guides": [
                    {
                        "type": "powerlaw",
                        "report": "growth.report.json",
                        "x_range": [0.02, 0.32],
                        "label": "power fit",
                    }
                ],
            }
        ]
    }
    spec = parse_spec(doc, "power", ramp_family["dir"])
    svg, png = render(spec, tmp_path)
    assert svg.exists() and png.exists()


def test_guide_missing_parameter_names_report_and_param(ramp_family, tmp_path):
    write_fit_report(ramp_family["dir"], "decay", {"offset": 2.0})
    spec = parse_spec(_three_panel_doc(), "demo", ramp_family["dir"])
    with pytest.raises(InputError) as err:
        render(spec, tmp_path)
    msg = str(err.value)
    assert "decay.report.json" in msg and "slope" in msg


def test_no_matching_inputs_is_an_error(ramp_family, tmp_path):
    doc = _three_panel_doc()
    doc["panels"][0]["inputs"] = ["nothing_*.csv"]
    spec = parse_spec(doc, "demo", ramp_family["dir"])
    with pytest.raises(InputError, match="nothing_"):
        render(spec, tmp_path)


def test_empty_csv_error_names_file(ramp_family, tmp_path):
    (ramp_family["dir"] / "ramp_R0.08.csv").write_text("")
    spec = parse_spec(_three_panel_doc(), "demo", ramp_family["dir"])
    with pytest.raises(InputError, match=r"ramp_R0\.08\.csv"):
        render(spec, tmp_path)


def test_extract_missing_sample_names_file_and_nearest(ramp_family, tmp_path):
    doc = _three_panel_doc()
    doc["panels"][1]["at"] = {"g": 0.012345}
    spec = parse_spec(doc, "demo", ramp_family["dir"])
    with pytest.raises(InputError) as err:
        render(spec, tmp_path)
    msg = str(err.value)
    assert "ramp_R" in msg and "0.012345" in msg and "nearest" in msg


def test_collapse_glob_must_match_one_file(ramp_family, tmp_path):
    extra = ramp_family["dir"] / "velocity_copy.csv"
    extra.write_text((ramp_family["dir"] / "velocity.csv").read_text())
    (ramp_family["dir"] / "velocity_copy.report.json").write_text(
        (ramp_family["dir"] / "velocity.report.json").read_text()
    )
    doc = _three_panel_doc()
    doc["panels"][2]["input"] = "velocity*.csv"
    spec = parse_spec(doc, "demo", ramp_family["dir"])
    with pytest.raises(InputError, match="exactly one"):
        render(spec, tmp_path)


def test_errorbars_can_be_disabled(ramp_family, tmp_path):
    doc = _three_panel_doc()
    for panel in doc["panels"]:
        panel["errorbars"] = False
    doc["name"] = "bare"
    spec = parse_spec(doc, "bare", ramp_family["dir"])
    svg, png = render(spec, tmp_path)
    assert png.read_bytes().startswith(PNG_MAGIC)


def test_unused_grid_slots_are_hidden(ramp_family, tmp_path):
    doc = _three_panel_doc()
    doc["layout"] = [2, 2]
    spec = parse_spec(doc, "demo", ramp_family["dir"])
    svg, png = render(spec, tmp_path)
    assert png.exists()


def test_curves_panel_with_region_ambiguity(ramp_family, tmp_path):
    g = [0.1, 0.0]
    lines = ["t,p,g,observable,region_size,mean,sem,n_traj"]
    for size in (16, 32):
        for i, gv in enumerate(g):
            lines.append(
                f"{i/2},{gv + 0.15995},{gv},S_region,{size},{1.0 + size},0.05,10"
            )
    path = ramp_family["dir"] / "regions.csv"
    path.write_text("\n".join(lines) + "\n")
    (ramp_family["dir"] / "regions.meta.json").write_text(
        json.dumps(
            {
                "format": "miptkz-aggregate-v1",
                "spec": {"L": 64, "schedule": {"kind": "constant", "p": 0.15995}},
            }
        )
    )
    doc = {
        "panels": [
            {
                "kind": "curves",
                "inputs": ["regions.csv"],
                "observable": "S_region",
                "label": "L",
            }
        ]
    }
    spec = parse_spec(doc, "regions", ramp_family["dir"])
    with pytest.raises(InputError, match="region_size"):
        render(spec, tmp_path)
    doc["panels"][0]["region_size"] = 16
    spec = parse_spec(doc, "regions", ramp_family["dir"])
    svg, png = render(spec, tmp_path)
    assert png.exists()
