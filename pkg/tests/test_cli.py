import csv
import io
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy.stats import norm

from ordered_copulas.cli import main

HERE = Path(__file__).parent
DATA = HERE / "data"
GOLDEN = HERE / "golden"


def run(args, capsys):
    code = main([str(a) for a in args])
    out = capsys.readouterr()
    return code, out.out, out.err


def table(text):
    lines = text.splitlines()
    assert lines[0].startswith("# ")
    rows = list(csv.reader(io.StringIO("\n".join(lines[1:]))))
    header, body = rows[0], rows[1:]
    return header, np.array([[float(v) for v in r] for r in body])


# bounds ----------------------------------------------------------------------

def test_bounds_golden_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "ordered_copulas", "bounds",
         "--config", "data/disjoint_uniforms.json", "--grid", "3"],
        cwd=HERE, capture_output=True, text=True, check=True,
    )
    assert proc.stdout == (GOLDEN / "bounds_disjoint_grid3.csv").read_text(encoding="utf-8")


def test_bounds_disjoint_formula(capsys):
    code, out, _ = run(["bounds", "--config", DATA / "disjoint_uniforms.json", "--grid", 9], capsys)
    assert code == 0
    header, t = table(out)
    assert header == ["x1", "x2", "L", "upper", "P"]
    x1, x2, L, M, P = t.T
    F1 = np.clip(x1 - 1, 0, 1)
    F2 = np.clip(x2, 0, 1)
    expect = np.where(x1 <= x2, F1, np.maximum(F1 + F2 - 1, 0))
    np.testing.assert_allclose(L, expect, atol=1e-12)
    np.testing.assert_allclose(M, np.minimum(F1, F2), atol=1e-12)
    assert np.all((L <= P + 1e-12) & (P <= M + 1e-12))


def test_bounds_identical(capsys):
    code, out, _ = run(["bounds", "--config", DATA / "identical_normals.json", "--grid", 7], capsys)
    assert code == 0
    _, t = table(out)
    x1, x2, L, M, _ = t.T
    expect = norm.cdf(np.minimum(x1, x2))
    np.testing.assert_allclose(L, expect, atol=1e-11)
    np.testing.assert_allclose(M, expect, atol=1e-11)


def test_bounds_grid_zero(capsys):
    code, _, err = run(["bounds", "--config", DATA / "disjoint_uniforms.json", "--grid", 0], capsys)
    assert code == 2 and "usage error" in err


@pytest.mark.parametrize("content", ["not json", '{"F1": {"type": "uniform"}}',
                                     '{"F1": {"type": "weird"}, "F2": {"type": "uniform"}}',
                                     '{"F1": {"type": "power"}, "F2": {"type": "uniform"}}'])
def test_bad_config(content, tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text(content, encoding="utf-8")
    code, _, err = run(["bounds", "--config", path], capsys)
    assert code == 2 and "config error" in err


def test_missing_config_file(tmp_path, capsys):
    code, _, err = run(["bounds", "--config", tmp_path / "none.json"], capsys)
    assert code == 2


def test_unordered_marginals_exit_3(tmp_path, capsys):
    path = tmp_path / "c.json"
    path.write_text('{"F1": {"type": "uniform"}, "F2": {"type": "power", "alpha": 2}}')
    code, _, err = run(["bounds", "--config", path], capsys)
    assert code == 3 and err.startswith("not-stochastically-ordered")


def test_empirical_relative_path(tmp_path, capsys):
    (tmp_path / "x1.txt").write_text("# sample\n2\n3\n4\n")
    (tmp_path / "x2.txt").write_text("1\n2\n3\n")
    cfg = tmp_path / "c.json"
    cfg.write_text('{"F1": {"type": "empirical", "file": "x1.txt"},'
                   ' "F2": {"type": "empirical", "file": "x2.txt"}}')
    code, out, _ = run(["bounds", "--config", cfg, "--grid", 4], capsys)
    assert code == 0
    _, t = table(out)
    assert t.shape == (16, 5)


def test_no_subcommand(capsys):
    code, _, err = run([], capsys)
    assert code == 2


# tau-rho-curve ---------------------------------------------------------------

def test_curve_power(capsys):
    code, out, _ = run(["tau-rho-curve", "--family", "power", "--points", 10], capsys)
    assert code == 0
    header, t = table(out)
    assert header == ["parameter", "tau_min", "rho_min"]
    a, tau, rho = t.T
    np.testing.assert_allclose(tau, (3 * a - 1) / (1 + a), atol=1e-9)
    assert tau[-1] == 1.0 and rho[-1] == 1.0


def test_curve_exp_ratio(capsys):
    code, out, _ = run(["tau-rho-curve", "--family", "exp-ratio", "--points", 3], capsys)
    _, t = table(out)
    assert t[0, 0] == pytest.approx(1 / 3)
    assert abs(t[0, 1]) < 1e-9


def test_curve_normal_shift_zero(capsys):
    code, out, _ = run(["tau-rho-curve", "--family", "normal-shift", "--points", 51], capsys)
    _, t = table(out)
    d, tau, _ = t.T
    np.testing.assert_allclose(tau, 4 * norm.cdf(-d / np.sqrt(2)) - 1, atol=1e-8)
    k = np.nonzero(np.diff(np.sign(tau)))[0][0]
    root = d[k] - tau[k] * (d[k + 1] - d[k]) / (tau[k + 1] - tau[k])
    assert abs(root - 0.954) < 1e-3


def test_curve_unknown_family(capsys):
    code, _, err = run(["tau-rho-curve", "--family", "gamma"], capsys)
    assert code == 2


def test_curve_threads_identical(capsys, monkeypatch):
    _, one, _ = run(["tau-rho-curve", "--family", "exp-ratio", "--points", 8], capsys)
    monkeypatch.setenv("ORDERED_COPULAS_THREADS", "4")
    _, four, _ = run(["tau-rho-curve", "--family", "exp-ratio", "--points", 8], capsys)
    assert one == four


def test_curve_bad_threads(capsys, monkeypatch):
    monkeypatch.setenv("ORDERED_COPULAS_THREADS", "zero")
    code, _, _ = run(["tau-rho-curve", "--family", "power", "--points", 2], capsys)
    assert code == 2


# sample ----------------------------------------------------------------------

def test_sample_byte_identical(tmp_path, capsys):
    outs = []
    for k in range(2):
        path = tmp_path / f"s{k}.csv"
        code, _, _ = run(["sample", "--config", DATA / "power_uniform.json", "--law", "L",
                          "--n", 300, "--seed", 42, "--out", path], capsys)
        assert code == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    text = outs[0].decode()
    assert text.startswith("# seed=42 ")
    header, t = table(text)
    assert header == ["x1", "x2"] and t.shape == (300, 2)
    x1, x2 = t.T
    assert np.all(x1 >= x2)
    on_diag = np.abs(x1 - x2) < 1e-9
    anti = np.abs(x1 + x2 - 1) < 1e-9
    assert np.all(on_diag | anti) and anti.any() and on_diag.any()


def test_sample_maxent_fills_triangle(capsys):
    code, out, _ = run(["sample", "--config", DATA / "power_uniform.json", "--law", "maxent",
                        "--n", 1000, "--seed", 1], capsys)
    assert code == 0
    _, t = table(out)
    x1, x2 = t.T
    assert np.all(x1 >= x2)
    off = np.abs(x1 - x2) > 1e-3
    assert off.mean() > 0.95
    assert np.mean(np.abs(x1 + x2 - 1) < 1e-6) < 0.01


def test_sample_seed_changes_output(capsys):
    _, a, _ = run(["sample", "--config", DATA / "power_uniform.json", "--n", 5, "--seed", 1], capsys)
    _, b, _ = run(["sample", "--config", DATA / "power_uniform.json", "--n", 5, "--seed", 2], capsys)
    assert a.splitlines()[2:] != b.splitlines()[2:]


def test_sample_precondition_exit_3(capsys):
    code, _, err = run(["sample", "--config", DATA / "identical_normals.json", "--law", "L",
                        "--n", 10], capsys)
    assert code == 3 and err.startswith("unsupported")


def test_sample_unknown_law(capsys):
    code, _, _ = run(["sample", "--config", DATA / "power_uniform.json", "--law", "P"], capsys)
    assert code == 2


# maxent-density --------------------------------------------------------------

def test_maxent_density_lattice(capsys):
    code, out, _ = run(["maxent-density", "--config", DATA / "power_uniform.json", "--grid", 3],
                       capsys)
    assert code == 0
    header, t = table(out)
    assert header == ["x1", "x2", "f"]
    x1, x2, f = t.T
    k = np.nonzero((x1 == 0.5) & (x2 == 0.25))[0][0]
    assert abs(f[k] - 1.7778) < 1e-4
    np.testing.assert_allclose(f, 2 * (1 - x1) / (1 - x2) ** 2, rtol=1e-10)


def test_maxent_density_identical(capsys):
    code, _, err = run(["maxent-density", "--config", DATA / "identical_normals.json"], capsys)
    assert code == 3
    assert "no-maxent: entropy condition fails" in err


# validate --------------------------------------------------------------------

def test_validate_cube_diagonal(capsys):
    code, out, _ = run(["validate", "--config", DATA / "cube_diagonal.json"], capsys)
    assert code == 3
    line = next(ln for ln in out.splitlines() if ln.startswith("diagonal:"))
    assert "fail D3 at t=" in line
    t = float(line.split("t=")[1].split()[0])
    assert t > 0.8


def test_validate_identical(capsys):
    code, out, _ = run(["validate", "--config", DATA / "identical_normals.json"], capsys)
    assert "dominance: pass" in out
    assert "entropy condition: fail (no-maxent: entropy condition fails)" in out


def test_validate_compatible_bertino(capsys):
    code, out, _ = run(["validate", "--config", DATA / "power_uniform.json"], capsys)
    assert code == 0
    assert "compatibility: pass" in out
    assert "unimodal: yes (r=0.5" in out


def test_validate_incompatible(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"F1": {"type": "power", "alpha": 2}, "F2": {"type": "uniform"},'
                   ' "ctilde": {"type": "independence"}}')
    code, out, _ = run(["validate", "--config", cfg], capsys)
    assert code == 3 and "compatibility: fail (incompatible-copula" in out


def test_validate_dominance_failure(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text('{"F1": {"type": "uniform"}, "F2": {"type": "power", "alpha": 2}}')
    code, out, _ = run(["validate", "--config", cfg], capsys)
    assert code == 3 and "dominance: fail (not-stochastically-ordered" in out


def test_console_help():
    proc = subprocess.run([sys.executable, "-m", "ordered_copulas", "--help"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    for cmd in ("bounds", "tau-rho-curve", "sample", "maxent-density", "validate"):
        assert cmd in proc.stdout
