"""Renderer tests.

Inputs are produced by the orbitkit CLI (the only interface the renderer
consumes), then rendered and cross-checked against the sidecars.
"""
import json
import os
import subprocess
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), ".."))

import render  # noqa: E402


def run_orbitkit(args):
    out = subprocess.run([sys.executable, "-m", "orbitkit.cli"] + args,
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    return out.stdout


@pytest.fixture(scope="module")
def produced(tmp_path_factory):
    """so(3) cloud + half-plane leaf maps generated through the CLI."""
    root = tmp_path_factory.mktemp("inputs")
    code = ("from orbitkit.corpus import builtin_cases\n"
            "from orbitkit.fields import family_to_json\n"
            "from orbitkit.expr import dumps_json\n"
            "import sys\n"
            "for c in builtin_cases():\n"
            "    if c.name in ('so3-spheres', 'halfplane-x-noninteg'):\n"
            "        open(sys.argv[1] + '/' + c.name + '.json', 'w')"
            ".write(dumps_json(family_to_json(c.family)))\n")
    subprocess.run([sys.executable, "-c", code, str(root)], check=True)
    cloud = root / "so3-cloud.csv"
    run_orbitkit(["orbit", str(root / "so3-spheres.json"), "--from", "1,0,0",
                  "--budget", "600", "--seed", "0", "--tol", "1e-9",
                  "--out", str(cloud)])
    sat = root / "halfplane-sat.csv"
    rank = root / "halfplane-rank.csv"
    run_orbitkit(["leafmap", str(root / "halfplane-x-noninteg.json"),
                  "--box", "-1,1,-1,1", "--res", "5,5", "--budget", "40",
                  "--out", str(sat), "--rank-out", str(rank)])
    return {"cloud": cloud, "sat": sat, "rank": rank, "root": root}


def test_scatter3d_so3_cloud(produced, tmp_path):
    out = tmp_path / "so3.png"
    code = render.main(["--in", str(produced["cloud"]), "--kind", "scatter3d",
                        "--out", str(out)])
    assert code == 0
    assert out.exists() and out.stat().st_size > 0
    sidecar = json.loads((str(out) + ".json") and open(str(out) + ".json").read())
    rows = [ln for ln in produced["cloud"].read_text().splitlines()[1:] if ln]
    assert sidecar["points"] == len(rows)
    # pixel-free sphere check: the sidecar carries the data-derived deviation
    assert sidecar["max_radius_dev"] <= 1e-5


def test_heatmap_rank_map_class_counts(produced, tmp_path):
    out = tmp_path / "rank.png"
    code = render.main(["--in", str(produced["rank"]), "--kind", "heatmap",
                        "--out", str(out)])
    assert code == 0
    sidecar = json.loads(open(str(out) + ".json").read())
    # derive counts from the CSV independently
    rows = produced["rank"].read_text().splitlines()[1:]
    values = [int(v) for ln in rows for v in ln.split(",")]
    want = {}
    for v in values:
        want[str(v)] = want.get(str(v), 0) + 1
    assert sidecar["class_counts"] == want
    assert set(want) == {"1", "2"}  # exactly two classes in the rank map
    assert want["1"] == 15 and want["2"] == 10


def test_heatmap_saturation_map_single_class(produced, tmp_path):
    out = tmp_path / "sat.png"
    assert render.main(["--in", str(produced["sat"]), "--kind", "heatmap",
                        "--out", str(out)]) == 0
    sidecar = json.loads(open(str(out) + ".json").read())
    assert sidecar["class_counts"] == {"2": 25}  # one class: saturated plane


def test_diffmap_localizes_nonintegrability(produced, tmp_path):
    out = tmp_path / "diff.png"
    code = render.main(["--in", str(produced["sat"]), "--in2",
                        str(produced["rank"]), "--kind", "diffmap",
                        "--out", str(out)])
    assert code == 0
    sidecar = json.loads(open(str(out) + ".json").read())
    # difference is 1 exactly on the x <= 0 half of the 5x5 grid
    assert sidecar["class_counts"] == {"0": 10, "1": 15}


def test_scatter2d_rejects_3d_cloud(produced, tmp_path):
    out = tmp_path / "bad.png"
    code = render.main(["--in", str(produced["cloud"]), "--kind", "scatter2d",
                        "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_malformed_csv_nonzero_status(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("u,v,w\n1,2,3\n")
    out = tmp_path / "bad.png"
    code = render.main(["--in", str(bad), "--kind", "scatter2d",
                        "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_empty_cloud_rejected(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("x1,x2,word\n")
    out = tmp_path / "empty.png"
    code = render.main(["--in", str(empty), "--kind", "scatter2d",
                        "--out", str(out)])
    assert code == 1
    assert not out.exists()


def test_missing_header_rejected(tmp_path):
    bad = tmp_path / "noheader.csv"
    bad.write_text("1,2\n3,4\n")
    code = render.main(["--in", str(bad), "--kind", "heatmap",
                        "--out", str(tmp_path / "x.png")])
    assert code == 1


def test_diffmap_requires_second_input(produced, tmp_path):
    code = render.main(["--in", str(produced["sat"]), "--kind", "diffmap",
                        "--out", str(tmp_path / "d.png")])
    assert code == 1


def test_usage_error(tmp_path):
    assert render.main(["--kind", "heatmap"]) == 2
