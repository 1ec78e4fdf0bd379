"""Shared fixtures: PS-3 test instances, their spectra and per-pair lifts."""
from __future__ import annotations

import numpy as np
import pytest

from psthree.cauchy_lift import EigenLift, SheetAtlas, analyze_pair
from psthree.rational_map import gauge_transform, ps3_instance, random_gauge
from psthree.spectral import SpectralProblem, converged_pairs, solve

TEST_A = (2.0, 5.0, 10.0)


class Instance:
    """A cubic test map with its spectra at N and 2N and lazily built lifts."""

    def __init__(self, name, R, N=64):
        self.name = name
        self.R = R
        self.spectrum = solve(SpectralProblem(R, N))
        self.reference = solve(SpectralProblem(R, 2 * N))
        self.converged = converged_pairs(self.spectrum, self.reference)
        self.atlas = SheetAtlas(R)
        self._lifts = {}
        self._analyses = {}

    def lift(self, pair):
        if pair.index not in self._lifts:
            self._lifts[pair.index] = EigenLift(pair, self.atlas)
        return self._lifts[pair.index]

    def analysis(self, pair):
        if pair.index not in self._analyses:
            self._analyses[pair.index] = analyze_pair(pair, self.atlas)
        return self._analyses[pair.index]

    def antisymmetric(self):
        return [p for p in self.converged if self.lift(p).symmetry == "antisymmetric"]

    def tagged_spectrum(self):
        """Spectrum with converged pairs classified, the rest left unclassified."""
        conv = {p.index for p in self.converged}
        tags = [self.lift(p).symmetry if p.index in conv else "unclassified"
                for p in self.spectrum.pairs]
        return self.spectrum.with_tags(tags)


@pytest.fixture(scope="session")
def ps3_instances():
    """Maps built from a in {2, 5, 10} plus one gauged copy of the a = 5 map."""
    out = [Instance(f"a={a:g}", ps3_instance(a)) for a in TEST_A]
    L1, L2 = random_gauge(np.random.default_rng(11))
    out.append(Instance("a=5 gauged", gauge_transform(ps3_instance(5.0), L1, L2)))
    return out


@pytest.fixture(scope="session")
def instance_a5(ps3_instances):
    return ps3_instances[1]


@pytest.fixture(scope="session")
def lift_a5(instance_a5):
    return instance_a5.lift(instance_a5.converged[0])
