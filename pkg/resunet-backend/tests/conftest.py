"""Shared fixtures: a real training set produced by the engine's CLI.

The backend consumes the segmentation engine only through files and the
stdio protocol, so the fixture shells out to the installed ``aroiseg``
executable rather than importing it.
"""

import json
import subprocess
from pathlib import Path

import pytest

from resunet_helpers import engine_cli

PHANTOM_SPEC = {
    "shape_zyx": [32, 40, 40],
    "noise_sigma_hu": 12.0,
    "rng_seed": 7,
    "nodules": [
        {
            "center_zyx": [15, 16, 16],
            "semi_axes_zyx": [5.2, 6.0, 6.0],
            "intensity_hu": 750.0,
        }
    ],
}
PREP_SEED = 3


@pytest.fixture(scope="session")
def prep_manifest_dir(tmp_path_factory) -> Path:
    """An aroi-prep/1 training set (13 samples) built via the engine CLI."""
    root = tmp_path_factory.mktemp("prep")
    spec_path = root / "spec.json"
    spec_path.write_text(json.dumps(PHANTOM_SPEC))
    subprocess.run(
        [engine_cli(), "phantom", "--spec", str(spec_path),
         "--out-vol", str(root / "vol"), "--out-gt", str(root / "gt")],
        check=True, capture_output=True,
    )
    out_dir = root / "train"
    subprocess.run(
        [engine_cli(), "prep", "--volume", str(root / "vol.rvol.json"),
         "--gt", str(root / "gt.rvol.json"), "--seed", str(PREP_SEED),
         "--out-dir", str(out_dir)],
        check=True, capture_output=True,
    )
    return out_dir
