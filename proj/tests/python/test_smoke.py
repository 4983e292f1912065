"""Smoke tests for the python bindings: the compiled module imports, drives
the same engine as the CLI, and surfaces errors as python exceptions.

Runs under pytest or directly (python3 tests/python/test_smoke.py)."""

import json
import os
import sys
import tempfile
from pathlib import Path

import bilag

SCENES = Path(os.environ.get("BILAG_SCENE_DIR",
                             Path(__file__).resolve().parents[2] / "scenes"))


def test_command_list_is_complete():
    cmds = bilag.commands()
    assert len(cmds) == 14
    assert cmds[0] == "verify-structure"
    assert "cherry-equivariance" in cmds


def test_verify_structure_passes_on_the_golden_scene():
    code, report, table = bilag.run("verify-structure", str(SCENES / "darboux2.scene"))
    d = json.loads(report)
    assert code == 0
    assert d["schema"] == 1
    assert d["pass"] is True
    assert d["seed"] == 7
    assert all(c["pass"] for c in d["checks"])
    assert table == ""


def test_flag_overrides_reach_the_report():
    code, report, _ = bilag.run("verify-structure", str(SCENES / "darboux2.scene"),
                                seed=99, samples=17)
    d = json.loads(report)
    assert code == 0
    assert d["seed"] == 99
    assert d["samples"] == 17


def test_glue_emits_a_table_and_writes_files():
    with tempfile.TemporaryDirectory() as tmp:
        out = os.path.join(tmp, "glue.json")
        code, report, table = bilag.run("cherry-glue", str(SCENES / "glue_pair.scene"),
                                        out=out)
        assert code == 0
        assert table.startswith("x,f_x,t_x,in_delta\n")
        assert table.count("\n") == 513
        on_disk = json.load(open(out))
        assert on_disk == json.loads(report)
        assert open(os.path.join(tmp, "glue.csv")).read() == table


def test_rotation_number_helper():
    rho, enclosure = bilag.rotation_number(0.25, iters=4000)
    assert abs(rho - 0.25) <= enclosure
    assert enclosure == 2.0 / 4000


def test_expression_helpers():
    assert abs(bilag.evaluate("q*p + sin(0)", ["q", "p"], [2.0, 3.0]) - 6.0) < 1e-12
    # graded-lexicographic Taylor coefficients of q^2 * p at (1, 2):
    # value, d/dq, d/dp, (1/2) d2/dq2, d2/dqdp, (1/2) d2/dp2
    coeffs = bilag.derivatives("q*q*p", ["q", "p"], [1.0, 2.0], 2)
    assert len(coeffs) == 6
    expected = [2.0, 4.0, 1.0, 2.0, 2.0, 0.0]
    assert all(abs(a - b) < 1e-12 for a, b in zip(coeffs, expected))


def test_failures_surface_as_exceptions_and_exit_codes():
    # malformed scene: python-level exception with the parse context
    with tempfile.NamedTemporaryFile("w", suffix=".scene", delete=False) as f:
        f.write("[gadget G]\nvalue = 1\n")
        bad = f.name
    try:
        try:
            bilag.run("verify-structure", bad)
            raise AssertionError("expected SceneParseError")
        except bilag.SceneParseError as e:
            assert "gadget" in str(e)
    finally:
        os.unlink(bad)

    # runnable scene, wrong command for its contents: exit code 1 with a report
    code, report, _ = bilag.run("cherry-glue", str(SCENES / "rotation.scene"))
    assert code == 1
    assert "error" in json.loads(report)

    # unknown command: exit code 2
    code, _, _ = bilag.run("frobnicate", str(SCENES / "rotation.scene"))
    assert code == 2


def main():
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
                print(f"ok   {name}")
            except Exception as exc:  # noqa: BLE001 - report and continue
                failures += 1
                print(f"FAIL {name}: {exc!r}")
    if failures:
        sys.exit(1)
    print("all python smoke tests passed")


if __name__ == "__main__":
    main()
