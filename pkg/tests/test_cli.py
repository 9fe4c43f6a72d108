import json
from pathlib import Path

import pytest

from fltz.cli import render_text, run
from fltz.fan import fixture

GOLDEN = Path(__file__).parent / "golden"

CASES = {
    "fan_info_blp2": ["fan", "info", "--fan", "blp2"],
    "skeleton_strata_p2": ["skeleton", "strata", "--fan", "p2"],
    "skeleton_components_pn3": ["skeleton", "components", "--fan", "pn:3", "--cone", ""],
    "skeleton_classify_p2": ["skeleton", "classify", "--fan", "p2", "--u", "0,0", "--p", "2/3,2/3"],
    "cocore_p2": ["cocore", "--fan", "p2", "--m", "1,1,-1"],
    "generate_p2": ["generate", "--fan", "p2", "--cone", "0,1", "--verify-k"],
    "blowup_c3": ["blowup", "--fan", "c3", "--tau", "0,1,2"],
    "stop_remove_p2": ["stop-remove", "--fan", "p2", "--cone", "0"],
    "ext_table_p2": ["ext-table", "--fan", "p2", "--values", "0,0,2;0,0,1;0,0,0"],
    "cohomology_p2": ["cohomology", "--fan", "p2", "--divisor", "0,0,-3", "--graded"],
    "smooth_check_p2": ["smooth-check", "--fan", "p2", "--divisor", "1,0,1", "--eps", "0.05",
                        "--checks", "grad,homog,cofinal,slice", "--seed", "7"],
    "plot_fan_p2": ["plot", "fan", "--fan", "p2"],
}


def _json(argv, capsys):
    code = run(argv + ["--json"])
    out = capsys.readouterr().out
    return code, json.loads(out)


@pytest.mark.parametrize("name", sorted(CASES))
def test_golden(name, capsys):
    code, data = _json(CASES[name], capsys)
    assert code == 0
    expected = json.loads((GOLDEN / f"{name}.json").read_text(encoding="utf-8"))
    assert data == expected


def test_fan_validate_file(tmp_path, capsys):
    path = tmp_path / "p2.json"
    path.write_text(json.dumps(fixture("p2").to_json()), encoding="utf-8")
    assert run(["fan", "validate", "--file", str(path)]) == 0
    assert capsys.readouterr().out.splitlines()[0] == "smooth complete, 7 cones"


def test_fan_validate_rejects_bad_fan(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"rank": 2, "rays": [[1, 0], [0, 1], [1, 1]], "max_cones": [[0, 1], [0, 2]]}))
    assert run(["fan", "validate", "--file", str(path)]) == 1
    assert "invalid fan" in capsys.readouterr().out


def test_components_count(capsys):
    code, data = _json(["skeleton", "components", "--fan", "pn:3", "--cone", ""], capsys)
    assert code == 0 and data["count"] == 3


def test_generate_message(capsys):
    assert run(["generate", "--fan", "p2", "--cone", "0,1", "--verify-k"]) == 0
    first = capsys.readouterr().out.splitlines()[0]
    assert first == "4 leaves, K-identity verified"


def test_failed_check_exit_code(capsys):
    code, data = _json(["smooth-check", "--fan", "p2", "--values", "0,0,0", "--eps", "0.8",
                        "--checks", "division"], capsys)
    assert code == 1 and not data["passed"]


@pytest.mark.parametrize("argv", [
    [],
    ["nonsense"],
    ["fan", "validate"],
    ["fan", "info", "--fan", "p2", "--bogus"],
    ["cocore", "--fan", "p2", "--m", "1,1"],
    ["skeleton", "components", "--fan", "p2", "--cone", "0,1,2"],
    ["smooth-check", "--fan", "p2", "--values", "0,0,0", "--checks", "nope"],
    ["plot", "fan", "--fan", "p3"],
])
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert capsys.readouterr().err


def test_seed_from_environment(monkeypatch, capsys):
    argv = ["smooth-check", "--fan", "p2", "--values", "0,0,-1", "--checks", "grad", "--samples", "20"]
    monkeypatch.setenv("FLTZ_SEED", "3")
    _, a = _json(argv, capsys)
    assert a["seed"] == 3
    _, b = _json(argv + ["--seed", "5"], capsys)
    assert b["seed"] == 5
    monkeypatch.delenv("FLTZ_SEED")
    _, c = _json(argv, capsys)
    assert c["seed"] == 7


def test_text_is_rendered_from_json(capsys):
    code, data = _json(CASES["cocore_p2"], capsys)
    run(CASES["cocore_p2"])
    assert capsys.readouterr().out == render_text(data)


def test_output_is_deterministic(capsys):
    argv = CASES["smooth_check_p2"] + ["--json"]
    run(argv)
    first = capsys.readouterr().out
    run(argv)
    assert capsys.readouterr().out == first


@pytest.mark.parametrize("target,extra", [
    ("fan", []), ("cover", ["--eps", "0.1"]), ("slice", ["--alpha", "2"]), ("arrangement", ["--cone", ""]),
])
def test_plot_writes_svg(tmp_path, target, extra, capsys):
    out = tmp_path / f"{target}.svg"
    fan = "blp2" if target == "slice" else "p2"
    assert run(["plot", target, "--fan", fan, "-o", str(out)] + extra) == 0
    text = out.read_text(encoding="utf-8")
    assert text.startswith("<?xml") and 'version="1.1"' in text and text.rstrip().endswith("</svg>")


def test_smooth_check_svg(tmp_path, capsys):
    out = tmp_path / "h.svg"
    assert run(["smooth-check", "--fan", "p2", "--divisor", "1,0,1", "--checks", "homog", "--svg", str(out)]) == 0
    assert out.read_text(encoding="utf-8").count("<rect") > 100


def regenerate():
    """Rewrite the golden files from the current implementation."""
    import contextlib
    import io
    GOLDEN.mkdir(exist_ok=True)
    for name, argv in CASES.items():
        buf = io.StringIO()
        with contextlib.redirect_stdout(buf):
            run(argv + ["--json"])
        (GOLDEN / f"{name}.json").write_text(buf.getvalue(), encoding="utf-8")


if __name__ == "__main__":
    regenerate()
