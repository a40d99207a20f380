import json
import pathlib
import subprocess
import sys

import numpy as np
import pytest

from periodlab import chains as ch
from periodlab import cli
from periodlab import glue as gl
from periodlab import homology as hm
from periodlab import manifest as mf

ROOT = pathlib.Path(__file__).resolve().parent.parent
MANIFESTS = ROOT / "manifests"


def run_cli(args, **kw):
    return subprocess.run(
        [sys.executable, "-m", "periodlab", *args],
        capture_output=True,
        text=True,
        cwd=ROOT,
        env={"PYTHONPATH": str(ROOT / "src"), "PATH": "/usr/bin:/bin"},
        **kw,
    )


def test_load_circle_manifest():
    man = mf.load_manifest(str(MANIFESTS / "circle.json"))
    assert set(man.chains) == {"gamma", "gamma_semialg"}
    assert man.forms["dtheta"].degree == 1
    assert man.simplices["sqrt_graph"].dim == 1


def test_duplicate_name_rejected_with_path():
    data = {
        "schema": "periodlab/1",
        "ambient_dim": 1,
        "simplices": [
            {"name": "x", "dim": 1, "components": ["t"]},
            {"name": "x", "dim": 1, "components": ["t"]},
        ],
    }
    with pytest.raises(mf.ManifestError) as err:
        mf.Manifest(data)
    assert "/simplices/1/name" in str(err.value)


def test_unresolved_reference_rejected():
    data = {
        "schema": "periodlab/1",
        "ambient_dim": 2,
        "chains": [{"name": "c", "terms": [{"simplex": "ghost", "coeff": 1}]}],
    }
    with pytest.raises(mf.ManifestError) as err:
        mf.Manifest(data)
    assert "/chains/0/terms/0/simplex" in str(err.value)


def test_bad_expression_flagged_with_path():
    data = {
        "schema": "periodlab/1",
        "ambient_dim": 1,
        "simplices": [{"name": "x", "dim": 1, "components": ["t +"]}],
    }
    with pytest.raises(mf.ManifestError) as err:
        mf.Manifest(data)
    assert "/simplices/0/components" in str(err.value)


def test_wrong_schema_rejected():
    with pytest.raises(mf.ManifestError):
        mf.Manifest({"schema": "periodlab/99"})


def test_evaluator_descriptions_roundtrip():
    sigma = ch.ExprMap(["t", "sqrt(t)"], 1)
    cone = ch.Cone(sigma)
    composed = ch.Composed(cone, ch.face_map(2, 1))
    prism = ch.PrismMap(sigma, "1 - t^2")
    rng = np.random.default_rng(0)
    for ev in (sigma, cone, composed, prism, ch.face_map(3, 2)):
        desc = mf.evaluator_to_dict(ev)
        desc2 = json.loads(json.dumps(desc))
        back = mf.evaluator_from_dict(desc2)
        assert back.dim == ev.dim and back.ambient == ev.ambient
        for _ in range(15):
            p = ch.random_interior_point(ev.dim, rng)
            assert np.abs(back.evaluate(p) - ev.evaluate(p)).max() <= 1e-15


def test_glued_evaluator_roundtrip():
    def semi(theta0):
        return gl.Triangulation(
            hm.SimplicialComplex([(0, 1), (1, 2)]),
            {
                (0, 1): ch.ExprMap(
                    [f"cos({theta0} + pi/2*t)", f"sin({theta0} + pi/2*t)"], 1
                ),
                (1, 2): ch.ExprMap(
                    [f"cos({theta0} + pi/2 + pi/2*t)", f"sin({theta0} + pi/2 + pi/2*t)"], 1
                ),
                (0,): ch.ExprMap([f"cos({theta0})", f"sin({theta0})"], 0),
                (1,): ch.ExprMap([f"cos({theta0} + pi/2)", f"sin({theta0} + pi/2)"], 0),
                (2,): ch.ExprMap([f"cos({theta0} + pi)", f"sin({theta0} + pi)"], 0),
            },
            marks={"B": {(0,), (2,)}},
        )

    upper = semi("0")
    lower = semi("pi")
    G = gl.glue(gl.GlueInput(upper, lower, {(0,): (2,), (2,): (0,)}))
    data = mf.triangulation_to_manifest("glued", G)
    man = mf.Manifest(json.loads(json.dumps(data)))
    back = man.triangulations["glued"]
    rng = np.random.default_rng(1)
    for s, ev in G.evaluators.items():
        ev2 = back.evaluators[s]
        for _ in range(10):
            p = ch.random_interior_point(ev.dim, rng)
            assert np.abs(ev2.evaluate(p) - ev.evaluate(p)).max() <= 1e-10
    assert back.marks["B"] == G.marks["B"]


def test_canonical_json_fixed_format():
    s = mf.canonical_json({"b": [1.5, 2, True, None], "a": "x"})
    assert s == '{"a":"x","b":[1.5,2,true,null]}\n'
    assert mf.canonical_json({"v": 1.0 / 3.0}) == '{"v":0.33333333333333331}\n'


def test_cli_homology_exit_codes_and_values():
    res = run_cli(["homology", "manifests/torus.json", "--complex", "T7", "--deterministic"])
    assert res.returncode == 0
    out = json.loads(res.stdout)
    assert out["results"]["homology"]["betti"] == [1, 2, 1]
    res = run_cli(["homology", "manifests/complexes.json", "--complex", "rp2_6", "--deterministic"])
    out = json.loads(res.stdout)
    assert out["results"]["homology"]["betti"] == [1, 0, 0]
    assert out["results"]["homology"]["torsion"]["1"] == [2]


def test_cli_periods_circle():
    res = run_cli(
        ["periods", "manifests/circle.json", "--cycles", "gamma", "--forms", "dtheta",
         "--deterministic"]
    )
    assert res.returncode == 0
    out = json.loads(res.stdout)
    value = out["results"]["periods"]["values"][0][0]
    assert abs(value - 2 * np.pi) <= 1e-6


def test_cli_periods_csv():
    res = run_cli(
        ["periods", "manifests/circle.json", "--cycles", "gamma", "--forms", "dtheta",
         "--output", "csv", "--deterministic"]
    )
    assert res.returncode == 0
    lines = res.stdout.strip().splitlines()
    assert lines[0] == "cycle,dtheta"
    assert lines[1].startswith("gamma,6.28318530717958")


def test_cli_check_stokes_pass_and_input_error():
    res = run_cli(
        ["check-stokes", "manifests/square.json", "--chain", "square", "--form", "x_dy",
         "--tol", "1e-6", "--deterministic"]
    )
    assert res.returncode == 0
    out = json.loads(res.stdout)
    assert out["results"]["stokes"]["verdict"] == "pass"
    # degree mismatch is an input error
    res = run_cli(
        ["check-stokes", "manifests/circle.json", "--chain", "gamma", "--form", "x_dy"]
    )
    assert res.returncode == 2


def test_cli_check_volume_verdicts():
    res = run_cli(
        ["check-volume", "manifests/circle.json", "--simplex", "sqrt_graph", "--faces",
         "--deterministic"]
    )
    assert res.returncode == 0
    out = json.loads(res.stdout)
    assert out["results"]["volume"]["verdict"] == "yes"
    res = run_cli(["check-volume", "manifests/circle.json", "--simplex", "tsin_graph"])
    assert res.returncode == 1


def test_cli_missing_manifest_is_input_error():
    res = run_cli(["homology", "no_such_file.json", "--complex", "T7"])
    assert res.returncode == 2
    assert "error" in res.stderr


def test_cli_bad_manifest_is_input_error(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"schema": "periodlab/1", "simplices": [{"name": "x"}]}')
    res = run_cli(["check-volume", str(bad), "--simplex", "x"])
    assert res.returncode == 2
    assert "/simplices/0" in res.stderr


def test_cli_subdivide_chain_roundtrip(tmp_path):
    out_file = tmp_path / "sd.json"
    res = run_cli(
        ["subdivide", "manifests/circle.json", "--chain", "gamma", "--deterministic",
         "--out", str(out_file)]
    )
    assert res.returncode == 0
    man = mf.load_manifest(str(out_file))
    sd = man.chains["gamma_sd"]
    assert len(sd) == 4


def test_cli_cone_emits_reingestible_manifest(tmp_path):
    out_file = tmp_path / "cone.json"
    res = run_cli(
        ["cone", "manifests/circle.json", "--simplex", "sqrt_graph", "--deterministic",
         "--out", str(out_file)]
    )
    assert res.returncode == 0
    man = mf.load_manifest(str(out_file))
    cone = man.simplices["sqrt_graph_cone"]
    assert cone.dim == 2 and cone.ambient == 2


def test_cli_glue_roundtrip(tmp_path):
    out_file = tmp_path / "glued.json"
    res = run_cli(
        [
            "glue", "manifests/circle_upper.json", "manifests/circle_lower.json",
            "--table", "manifests/circle_btable.json", "--deterministic",
            "--out", str(out_file),
        ]
    )
    assert res.returncode == 0
    man = mf.load_manifest(str(out_file))
    T = man.triangulations["glued"]
    assert hm.homology(T.complex).betti == [1, 1]
    T.validate(face_tol=1e-10)


def test_cli_in_process_runner_matches_subprocess():
    # the console entry point and python -m dispatch share run()
    rc = cli.run(["homology", str(MANIFESTS / "complexes.json"), "--complex",
                  "hollow_triangle", "--deterministic", "--out", "/dev/null"])
    assert rc == 0
