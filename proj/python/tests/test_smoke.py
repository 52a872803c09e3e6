import math

import numpy as np
import pytest

import bistable


def test_nominal_params_and_variant():
    p = bistable.HarvesterParams("asymmetric", 0.041)
    assert p.f == 0.041
    assert p.delta == 0.15
    assert p.variant == "asymmetric"
    assert bistable.HarvesterParams().variant == "sym-linear"
    p.set("kappa", 0.45)
    assert p.get("kappa") == 0.45


def test_integrate_power_identity():
    p = bistable.HarvesterParams("sym-linear", 0.25)
    tr = bistable.integrate(p, t_end=50.0, dt=0.01)
    assert tr["t"].shape == (5001,)
    np.testing.assert_array_equal(tr["power"], p.lambda_ * tr["v"] * tr["v"])


def test_rhs_at_rest_is_zero():
    p = bistable.HarvesterParams()
    assert bistable.rhs(p, [0.0, 0.0, 0.0], 0.0) == [0.0, 0.0, 0.0]


def test_regimes():
    low = bistable.classify(bistable.HarvesterParams("sym-linear", 0.041))
    high = bistable.classify(bistable.HarvesterParams("sym-linear", 0.25))
    assert low["motion"] == "intrawell"
    assert high["motion"] == "interwell"
    assert high["crossings"] > 0


def test_equilibria_symmetric():
    eq = bistable.equilibria(bistable.HarvesterParams())
    assert [round(x, 12) for x, _ in eq] == [-1.0, 0.0, 1.0]
    assert [s for _, s in eq] == [True, False, True]


def test_zero_one_test_separates_regular_from_chaotic():
    t = np.arange(5000)
    assert bistable.zero_one_test(np.sin(0.7 * t)) < 0.1
    x = np.empty(5000)
    x[0] = 0.3
    for i in range(1, 5000):
        x[i] = 3.97 * x[i - 1] * (1 - x[i - 1])
    assert bistable.zero_one_test(x) > 0.9


def test_sampling_and_surrogate_round_trip():
    cfg = bistable.Config()
    spec = cfg.spec(0.25)
    assert spec.params == ["lambda", "kappa", "f", "omega"]
    lo, hi = spec.supports[2]
    assert lo == pytest.approx(0.2) and hi == pytest.approx(0.3)
    x = bistable.sample(spec, 200, 5)
    assert x.shape == (200, 4)
    np.testing.assert_array_equal(x, bistable.sample(spec, 200, 5))
    z = 2.0 * (x[:, 0] - 0.04) / 0.02 - 1.0
    y = 1.0 + 0.5 * z + 0.25 * z * z
    s = bistable.fit(spec, x, y, degree=2)
    assert s.loo < 1e-10
    np.testing.assert_allclose(s.predict(x), y, atol=1e-10)
    assert s.mean == pytest.approx(1.0 + 0.25 / 3.0)
    back = bistable.Surrogate.deserialize(s.serialize())
    assert back.coeffs == s.coeffs
    assert back.serialize() == s.serialize()


def test_statistics_helpers():
    rng = np.random.default_rng(1)
    v = rng.standard_normal(20000)
    grid = np.linspace(-4, 4, 201)
    d = bistable.kde(v, grid)
    assert d[100] == pytest.approx(1 / math.sqrt(2 * math.pi), abs=0.03)
    assert bistable.modality(d, 0.1) == 1
    two = bistable.kde(np.concatenate([v - 6, v + 6]), np.linspace(-10, 10, 401))
    assert bistable.modality(two, 0.1) == 2
    n = bistable.normalize(np.array([1.0, 2.0, 3.0]))
    assert n.mean() == pytest.approx(0.0)
    lo, hi = bistable.wilson_interval(40, 100)
    assert lo == pytest.approx(0.30940128643245896) and hi == pytest.approx(0.49799741320893826)
    ens = np.tile(np.linspace(0, 1, 50), (40, 1)) + np.linspace(-1, 1, 40)[:, None]
    lower, median, upper = bistable.confidence_band(ens)
    assert np.all(lower <= median) and np.all(median <= upper)


def test_errors_carry_codes():
    with pytest.raises(bistable.BistableError) as info:
        bistable.interval_from_nominal(0.0, 0.2)
    assert info.value.code == "ZeroNominal"
    with pytest.raises(bistable.BistableError) as info:
        bistable.Config({"model.gamma": "1"})
    assert info.value.code == "Config"


def test_config_dump_and_hash():
    cfg = bistable.Config({"model.variant": "sym-nonlinear", "random.seed": "7"})
    assert cfg.variant == "sym-nonlinear"
    assert cfg.seed == 7
    assert len(cfg.hash()) == 16
    assert "[model]" in cfg.dump()
