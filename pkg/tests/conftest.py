import pytest

import aroiseg as a
import helpers


@pytest.fixture
def sphere64() -> tuple[a.Volume3D, a.Mask3D]:
    return a.generate_phantom(helpers.sphere_spec())


@pytest.fixture
def sphere64_clean() -> tuple[a.Volume3D, a.Mask3D]:
    return a.generate_phantom(helpers.sphere_spec(noise_sigma_hu=0.0))
