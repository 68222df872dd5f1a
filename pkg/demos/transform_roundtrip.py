"""Calibrate the inversion constant, then round-trip a radial profile through the spectral side.

Run:  python3 demos/transform_roundtrip.py
"""

import numpy as np

from damekricci import H3, SpaceParams, SphericalEvaluator
from damekricci.spectral import (RadialGrid, RadialProfile, SobolevKind, SpectralGrid, calibrate, isft, sft,
                                 sobolev_norm)


def main():
    rgrid = RadialGrid.for_frequency(7.5, 24)
    sgrid = SpectralGrid.for_radius(24, 7.5)
    for space in (H3, SpaceParams(2, 1), SpaceParams(4, 3)):
        ev = calibrate(SphericalEvaluator(space))
        C = ev.space.inversion_constant
        profile = RadialProfile.from_function(rgrid, lambda s: (1 + s ** 2) * np.exp(-s ** 2))
        spectrum = sft(ev, profile, sgrid)
        back = isft(ev, spectrum, rgrid)
        spatial = profile.l2_norm(space)
        spectral = np.sqrt(C) * sobolev_norm(space, spectrum, SobolevKind("homogeneous"))
        print(f"{space}: inversion constant {C:.15g} (2^(m_z-1)/pi = {2 ** (space.m_z - 1) / np.pi:.15g})")
        print(f"    max |isft(sft f) - f| = {np.max(np.abs(back.values - profile.values)):.2e}")
        print(f"    ||f||_2 = {spatial:.12g}, spectral norm = {spectral:.12g}")


if __name__ == "__main__":
    main()
