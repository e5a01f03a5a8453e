import json

import numpy as np
import pytest

from poleshift.cli import main, read_shifts
from poleshift.contour import PoleContour
from poleshift.pencil import write_matrix_market, write_vector
from poleshift.problems import gen_random_pencil


@pytest.fixture
def files(tmp_path):
    pencil, _, _ = gen_random_pencil(30, condition=40, seed=2)
    write_matrix_market(pencil.H, tmp_path / "H.mtx")
    write_matrix_market(pencil.S, tmp_path / "S.mtx")
    b = np.random.default_rng(1).standard_normal(30)
    write_vector(b, tmp_path / "b.vec")
    shifts = [[0.0, e] for e in np.linspace(-10, 10, 5)] + [[-3.0, 1.0]]
    (tmp_path / "z.json").write_text(json.dumps(shifts))
    return tmp_path, pencil, b


def test_gen_contour(tmp_path):
    assert main(["gen-contour", "--min", "1", "--max", "100", "--poles", "30",
                 "--out", str(tmp_path / "c.json")]) == 0
    c = PoleContour.load(tmp_path / "c.json")
    assert c.P == 30 and len(json.loads((tmp_path / "c.json").read_text())["weights"][0]) == 2


def test_gen_contour_bad_poles(tmp_path, capsys):
    assert main(["gen-contour", "--min", "1", "--max", "100", "--poles", "31",
                 "--out", str(tmp_path / "c.json")]) == 1
    assert "even" in capsys.readouterr().err


@pytest.mark.parametrize("method", ["pole", "lanczos"])
def test_solve(files, method):
    d, pencil, b = files
    out = d / f"{method}.json"
    rc = main(["solve", "--pencil", str(d / "H.mtx"), "--overlap", str(d / "S.mtx"),
               "--rhs", str(d / "b.vec"), "--shifts", str(d / "z.json"), "--method", method,
               "--tol", "1e-9", "--out", str(out)])
    assert rc == 0
    doc = json.loads(out.read_text())
    for (zr, zi), sol in zip(doc["shifts"], doc["solutions"]):
        u = np.array([complex(a, c) for a, c in sol])
        ref = np.linalg.solve(pencil.shifted_matrix(complex(zr, zi)), b)
        assert np.linalg.norm(u - ref) / np.linalg.norm(ref) < 1e-6


def test_solve_with_explicit_bounds(files):
    d, _, _ = files
    rc = main(["solve", "--pencil", str(d / "H.mtx"), "--overlap", str(d / "S.mtx"),
               "--rhs", str(d / "b.vec"), "--shifts", str(d / "z.json"), "--min", "0.9",
               "--max", "45", "--poles", "40", "--out", str(d / "u.json")])
    assert rc == 0 and json.loads((d / "u.json").read_text())["P"] == 40


def test_solve_length_mismatch(files, capsys):
    d, _, _ = files
    write_vector(np.ones(3), d / "short.vec")
    rc = main(["solve", "--pencil", str(d / "H.mtx"), "--rhs", str(d / "short.vec"),
               "--shifts", str(d / "z.json"), "--out", str(d / "u.json")])
    assert rc == 1 and "length" in capsys.readouterr().err


def test_bad_shift_file(tmp_path):
    (tmp_path / "z.json").write_text('[1, 2]')
    with pytest.raises(ValueError):
        read_shifts(tmp_path / "z.json")


def test_chi0_command(tmp_path, capsys):
    grid = json.dumps({"points": 48, "potential": "gaussian", "centers": [3, 7],
                       "depths": [-4, -4], "width": 0.6})
    rc = main(["chi0", "--grid", grid, "--ne", "2", "--omega-list", "0,1", "--poles", "40",
               "--seed", "3", "--out", str(tmp_path / "chi.json")])
    assert rc == 0
    doc = json.loads((tmp_path / "chi.json").read_text())
    assert doc["basis_solves"] == 2 * 20 and len(doc["values"]) == 2
    assert "basis solves" in capsys.readouterr().out


def test_bench_decay(tmp_path):
    assert main(["bench", "decay", "--out-dir", str(tmp_path)]) == 0
    header = (tmp_path / "pole_decay.csv").read_text().splitlines()[0]
    assert header == "P,error"
    assert json.loads((tmp_path / "pole_decay.json").read_text())["r_squared"] >= 0.98
