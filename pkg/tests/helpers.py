"""Shared builders for tests: phantoms, oracle backends, the mock argv."""

import sys
from pathlib import Path

import numpy as np

import aroiseg as a

MOCK_SCRIPT = Path(__file__).parent / "mock_backend.py"


def mock_argv(*flags: str) -> list[str]:
    """Command line for the scripted protocol mock."""
    return [sys.executable, str(MOCK_SCRIPT), *flags]


def intensity_oracle() -> a.FunctionBackend:
    """Backend that thresholds the normalized crop at 0.5.

    On a phantom whose nodule sits well above the background this reads
    the ground truth straight off the intensities inside the requested
    window, making it the ground-truth-within-ROI backend the tracking
    tests call for.
    """
    return a.FunctionBackend(lambda view, p: (p.pixels >= 0.5).astype(float),
                             name="intensity-oracle")


def counting_oracle() -> tuple[a.FunctionBackend, list]:
    """intensity_oracle plus a call log (one entry per inference)."""
    calls: list = []

    def fn(view: str, p: a.Patch2D) -> np.ndarray:
        calls.append(view)
        return (p.pixels >= 0.5).astype(float)

    return a.FunctionBackend(fn, name="counting-oracle"), calls


def sphere_spec(noise_sigma_hu: float = 20.0, rng_seed: int = 20260818) -> a.PhantomSpec:
    """The acceptance sphere: radius 8 at the center of a 64-cube."""
    return a.PhantomSpec(
        shape_zyx=(64, 64, 64), background_hu=-800.0,
        noise_sigma_hu=noise_sigma_hu,
        nodules=(a.NoduleSpec(center_zyx=(32.0, 32.0, 32.0),
                              semi_axes_zyx=(8.0, 8.0, 8.0),
                              intensity_hu=750.0),),
        rng_seed=rng_seed)


def drift_spec() -> a.PhantomSpec:
    """Ellipsoid whose in-plane center moves 2 voxels per slice, spanning
    exactly 12 axial slices (z = 26..37) of a 64-cube."""
    return a.PhantomSpec(
        shape_zyx=(64, 64, 64), background_hu=-800.0, noise_sigma_hu=0.0,
        nodules=(a.NoduleSpec(center_zyx=(31.5, 32.0, 32.0),
                              semi_axes_zyx=(5.75, 6.0, 6.0),
                              intensity_hu=750.0,
                              drift_yx_per_slice=(2.0, 0.0)),),
        rng_seed=0)


def small_sphere_spec() -> a.PhantomSpec:
    """Noiseless sphere spanning axial slices exactly 10..20, seeded walks
    start at 15. Shape (32, 40, 40), center (15, 16, 16)."""
    return a.PhantomSpec(
        shape_zyx=(32, 40, 40), background_hu=-800.0, noise_sigma_hu=0.0,
        nodules=(a.NoduleSpec(center_zyx=(15.0, 16.0, 16.0),
                              semi_axes_zyx=(5.2, 6.0, 6.0),
                              intensity_hu=750.0),),
        rng_seed=0)
