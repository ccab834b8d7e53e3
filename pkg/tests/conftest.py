import numpy as np
import pytest

from cscdyn import DomainSpec, ModelParams, ProgenyKernel, build_grid

UNIT_DOMAIN_33 = DomainSpec((1.0,), (33,))


@pytest.fixture
def canonical_params():
    """The workhorse configuration: sigma=1, alpha=0.5, delta=0.1, d=0.5."""
    return ModelParams(d=0.5, alpha=0.5, delta=0.1, kernel=ProgenyKernel(1.0),
                       domain=UNIT_DOMAIN_33)


@pytest.fixture
def unit_grid_33():
    return build_grid(UNIT_DOMAIN_33)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
