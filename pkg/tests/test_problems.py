import json

import numpy as np
import pytest

from aoed import model, problems
from aoed.errors import FormatError, InvalidSpec, IoError

from conftest import diag_model


def test_diagonal_family():
    mod = problems.generate(problems.ProblemSpec(family="diagonal", variances=(4.0, 1.0)))
    np.testing.assert_array_equal(mod.forward, np.eye(2))
    np.testing.assert_array_equal(mod.prior_cov, np.diag([4.0, 1.0]))
    assert (mod.m, mod.d, mod.n, mod.noise_var) == (2, 1, 2, 1.0)


def test_random_family_deterministic():
    spec = problems.ProblemSpec(family="random_gaussian", m=6, d=2, n=9, seed=123)
    a, b = problems.generate(spec), problems.generate(spec)
    for name in ("forward", "prior_cov", "prior_mean"):
        np.testing.assert_array_equal(getattr(a, name), getattr(b, name))
    assert a.noise_var == b.noise_var
    c = problems.generate(problems.ProblemSpec(family="random_gaussian", m=6, d=2, n=9, seed=124))
    assert not np.array_equal(a.forward, c.forward)


def test_rng_is_philox():
    assert isinstance(problems.rng(5).bit_generator, np.random.Philox)


def test_grid_family_spd_and_psd():
    mod = problems.generate(problems.ProblemSpec(family="grid_source", m=16, d=2, n=49, length_scale=0.3))
    np.linalg.cholesky(mod.prior_cov)
    ker = model.precompute(mod)
    assert np.linalg.eigvalsh(ker.K).min() >= -1e-10 * np.abs(ker.K).max()
    assert mod.forward.shape == (32, 49)


@pytest.mark.parametrize("variances, pct, expected", [((1.0, 1.0), 100.0, 1.0), ((4.0, 1.0), 1.0, 0.025)])
def test_calibrate_examples(variances, pct, expected):
    assert problems.calibrate_noise(diag_model(variances), pct) == pytest.approx(expected, rel=1e-15)


def test_calibrate_matches_monte_carlo():
    mod = problems.generate(problems.ProblemSpec(family="grid_source", m=16, d=2, n=49, seed=0))
    gen = np.random.default_rng(99)
    x = gen.standard_normal((100_000, mod.n)) @ np.linalg.cholesky(mod.prior_cov).T
    y = x @ mod.forward.T
    mc = 0.01 * y.var(axis=0).mean()
    assert problems.calibrate_noise(mod, 1.0) == pytest.approx(mc, rel=0.02)
    assert mod.noise_var == pytest.approx(problems.calibrate_noise(mod, 1.0), rel=1e-14)


def test_noise_var_override():
    spec = problems.ProblemSpec(family="random_gaussian", m=4, d=1, n=5, seed=1, noise_var=0.3)
    assert problems.generate(spec).noise_var == 0.3


@pytest.mark.parametrize("kwargs", [
    dict(family="nope", m=2, n=2),
    dict(family="random_gaussian", m=0, d=1, n=3),
    dict(family="random_gaussian", m=2, d=1, n=3, noise_percent=0.0),
    dict(family="grid_source", m=4, d=1, n=10),
    dict(family="diagonal", variances=(1.0, -1.0)),
    dict(family="random_gaussian", m=2, d=1, n=3, seed=-1),
])
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidSpec):
        problems.generate(problems.ProblemSpec(**kwargs))


@pytest.mark.parametrize("spec", [
    problems.ProblemSpec(family="diagonal", variances=(4.0, 1.0, 0.25)),
    problems.ProblemSpec(family="random_gaussian", m=5, d=2, n=7, seed=3),
    problems.ProblemSpec(family="grid_source", m=8, d=2, n=25, seed=2),
])
def test_round_trip_bitwise(tmp_path, spec):
    mod = problems.generate(spec)
    problems.save_model(mod, tmp_path / "M", provenance={"spec": spec.to_dict()})
    back = problems.load_model(tmp_path / "M")
    for name in ("forward", "prior_cov", "prior_mean"):
        np.testing.assert_array_equal(getattr(back, name), getattr(mod, name))
    assert back.noise_var == mod.noise_var
    assert (back.m, back.d, back.n) == (mod.m, mod.d, mod.n)
    w = np.linspace(0, 1, mod.m)
    assert model.objective(back, model.precompute(back), w) == model.objective(mod, model.precompute(mod), w)
    assert problems.load_manifest(tmp_path / "M")["format_version"] == 1


def test_files_are_plain_csv(tmp_path):
    problems.save_model(diag_model([4.0, 1.0]), tmp_path)
    assert (tmp_path / "F.csv").read_text() == "1,0\n0,1\n"
    assert (tmp_path / "prior_mean.csv").read_text() == "0\n0\n"


def _saved(tmp_path):
    mod = problems.generate(problems.ProblemSpec(family="random_gaussian", m=3, d=1, n=4, seed=0))
    problems.save_model(mod, tmp_path)
    return tmp_path


def test_shape_mismatch(tmp_path):
    path = _saved(tmp_path)
    (path / "prior_cov.csv").write_text("1,0,0\n0,1,0\n0,0,1\n")
    with pytest.raises(FormatError):
        problems.load_model(path)


def test_version_mismatch(tmp_path):
    path = _saved(tmp_path)
    manifest = json.loads((path / "manifest.json").read_text())
    manifest["format_version"] = 2
    (path / "manifest.json").write_text(json.dumps(manifest))
    with pytest.raises(FormatError, match="version"):
        problems.load_model(path)


def test_missing_files(tmp_path):
    with pytest.raises(IoError):
        problems.load_model(tmp_path / "absent")
    path = _saved(tmp_path)
    (path / "F.csv").unlink()
    with pytest.raises(IoError):
        problems.load_model(path)


def test_bump_source_shape():
    pts = problems.grid_points(49, 0.35)
    src = problems.bump_source(pts)
    assert src.shape == (49,) and np.all(np.isfinite(src))
