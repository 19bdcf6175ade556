import copy

import numpy as np
import pytest

from orbitkit.corpus import (CASE_NAMES, ExampleCase, builtin_cases,
                             leaf_dim_map, leafmap_to_csv, parse_leafmap_csv,
                             run_case, semicontinuity_artifacts,
                             write_case_files)
from orbitkit.expr import dumps_json, loads_json


def test_builtin_cases_count_and_names():
    cases = builtin_cases()
    assert len(cases) == 6
    assert tuple(c.name for c in cases) == CASE_NAMES


def test_shipped_json_matches_builders(tmp_path):
    import pathlib
    shipped = pathlib.Path("src/orbitkit/cases")
    regenerated = write_case_files(tmp_path)
    for path in regenerated:
        assert (shipped / path.name).read_text() == path.read_text()


def test_every_expectation_is_tagged():
    for case in builtin_cases():
        assert case.note
        for entry in case.expectations:
            assert entry["kind"] in ("rank", "orbit_dim", "bracket", "check",
                                     "cloud", "leafmap")


@pytest.mark.parametrize("name", CASE_NAMES)
def test_case_passes(name):
    case = [c for c in builtin_cases() if c.name == name][0]
    report = run_case(case, budget=800, seed=0)
    failures = [e for e in report.entries if not e.passed]
    assert report.passed, failures


def test_corrupted_expectation_fails_only_that_entry():
    case = [c for c in builtin_cases() if c.name == "flag-line"][0]
    bad = ExampleCase(name=case.name, note=case.note, family=case.family,
                      expectations=copy.deepcopy(case.expectations))
    bad.expectations[0]["expect"] = 7  # rank at (1) is really 1
    report = run_case(bad, budget=200, seed=0)
    assert not report.entries[0].passed
    assert all(e.passed for e in report.entries[1:])


def test_run_case_deterministic():
    case = [c for c in builtin_cases() if c.name == "balan-pair"][0]
    a = run_case(case, budget=300, seed=4).to_json()
    b = run_case(case, budget=300, seed=4).to_json()
    assert a == b


def test_leaf_dim_map_halfplane():
    case = [c for c in builtin_cases() if c.name == "halfplane-x-noninteg"][0]
    orbit, rank = leaf_dim_map(case.family, [-1, -1], [1, 1], (5, 5),
                               budget=40, seed=0)
    assert np.all(orbit == 2)
    for ix, x in enumerate(np.linspace(-1, 1, 5)):
        want = 2 if x > 0 else 1
        assert np.all(rank[ix, :] == want)
    assert np.all(rank <= orbit)
    assert semicontinuity_artifacts(orbit) == []


def test_leaf_dim_map_rejects_tiny_resolution():
    case = [c for c in builtin_cases() if c.name == "flag-line"][0]
    with pytest.raises(ValueError):
        leaf_dim_map(case.family, [-1], [1], (1,), budget=10)


def test_semicontinuity_artifact_detection():
    grid = np.zeros((3, 3), dtype=int)
    grid[1, 1] = 2  # isolated spike: must be flagged
    assert semicontinuity_artifacts(grid) == [(1, 1)]
    slope = np.array([[0, 1], [1, 1]])
    assert semicontinuity_artifacts(slope) == []


def test_leafmap_csv_roundtrip():
    grid = np.array([[0, 1, 2], [2, 1, 0]])
    text = leafmap_to_csv(grid, [-1, -2], [1, 2])
    assert text.splitlines()[0] == "# dims: 2,3 box: -1,1,-2,2"
    back, lo, hi = parse_leafmap_csv(text)
    assert np.array_equal(back, grid)
    assert lo == [-1, -2] and hi == [1, 2]


def test_leafmap_csv_roundtrip_3d():
    grid = np.arange(8).reshape(2, 2, 2)
    text = leafmap_to_csv(grid, [0, 0, 0], [1, 1, 1])
    back, _, _ = parse_leafmap_csv(text)
    assert np.array_equal(back, grid)


def test_case_json_roundtrip():
    case = [c for c in builtin_cases() if c.name == "arjen-module"][0]
    back = ExampleCase.from_json(loads_json(dumps_json(case.to_json())))
    assert back.name == case.name
    assert back.family.rule == case.family.rule
    assert back.companion is not None
    assert len(back.expectations) == len(case.expectations)
