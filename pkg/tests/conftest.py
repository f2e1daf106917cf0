import warnings

import pytest

from fracrate.fields import ResolutionWarning, default_grid, gaussian, sample, smooth_bump


@pytest.fixture(scope="session")
def grid1():
    return default_grid(1)


@pytest.fixture(scope="session")
def gauss1(grid1):
    return sample(gaussian(1.0), grid1)


@pytest.fixture(scope="session")
def bump1(grid1):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ResolutionWarning)
        return sample(smooth_bump(1.0), grid1)
