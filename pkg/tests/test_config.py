import math

import numpy as np
import pytest

from hpqfim import config
from hpqfim.errors import ConfigError
from hpqfim.models import ModelName
from hpqfim.priors import PriorKind, Scheme


def test_parse_number():
    assert config.parse_number("pi/2") == math.pi / 2
    assert config.parse_number("2*pi/3") == 2 * math.pi / 3
    assert config.parse_number("-1e-3") == -1e-3
    for bad in ("__import__('os')", "pi/0", "x", "1,2"):
        with pytest.raises(ConfigError):
            config.parse_number(bad)


def test_parse_interval():
    i = config.parse_interval("(0, 1]")
    assert (i.lo, i.hi, i.lo_open, i.hi_open, i.periodic) == (0, 1, True, False, False)
    c = config.parse_interval("[0, 2*pi)")
    assert c.periodic
    with pytest.raises(ConfigError):
        config.parse_interval("0..1")
    with pytest.raises(ConfigError):
        config.parse_interval("[1, 0]")


def test_minimal_config_defaults():
    cfg = config.loads("model.name = ExtraRotation\n")
    assert cfg.model.name is ModelName.EXTRA_ROTATION
    assert cfg.prior.kind is PriorKind.UNIFORM
    assert cfg.rule.scheme is Scheme.PERIODIC_TRAPEZOID
    assert cfg.grid_points == 50 and cfg.seed == 0
    g = cfg.grid_values()
    assert g[0] > 0 and g[-1] < math.pi


def test_full_config():
    text = """
    # comment
    model.name = Direction
    model.phi = pi/4
    prior.kind = TruncatedGaussian
    prior.domain = (0.01, 0.99)
    prior.mu = 0.5
    prior.sigma = 0.1
    quadrature.nodes = 96
    grid.points = 11
    weight = 1, 0; 0, 2
    seed = 42
    output.path = out.csv
    """
    cfg = config.loads(text)
    assert cfg.model.d_I == 2 and cfg.model.phi == math.pi / 4
    assert cfg.prior.sigma == 0.1 and len(cfg.rule) == 96
    np.testing.assert_array_equal(cfg.weight, np.diag([1.0, 2.0]))
    assert cfg.seed == 42 and cfg.output_path == "out.csv"
    np.testing.assert_array_equal(cfg.interest_at(1.0), [1.0, math.pi / 4])


@pytest.mark.parametrize("text", [
    "",
    "model.name = Nope",
    "model.name = ExtraRotation\nmodel.r = 1.5",
    "model.name = ExtraRotation\nbogus = 1",
    "model.name = ExtraRotation\nmodel.r = 0.5\nmodel.r = 0.4",
    "model.name = ExtraRotation\nprior.kind = Gamma",
    "model.name = ExtraRotation\ngrid.points = 1",
    "model.name = ExtraRotation\nweight = 1, 0; 0, 1",
    "model.name = ExtraRotation\nweight = -1",
    "model.name = Direction\ngrid.hi = 4",
    "model.name = Direction\nprior.domain = (0, 2)",
    "model.name = ExtraRotation\nseed = -3",
    "model.name = ExtraRotation\nno equals sign",
    "model.name = AnisotropicShrink\nprior.kind = RaisedCosine\nprior.width = 2",
])
def test_bad_configs(text):
    with pytest.raises(ConfigError):
        config.loads(text)


def test_load_missing_file(tmp_path):
    with pytest.raises(ConfigError):
        config.load(tmp_path / "none.cfg")
