"""Local hidden-variable physics: pair emission and the three-way polarizer switch."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

TWO_PI = 2.0 * math.pi


class SwitchOutcome(enum.IntEnum):
    PLUS = 0
    MINUS = 1
    UNDETECTED = 2


@dataclass(frozen=True)
class DetectorSettings:
    angle: float
    threshold: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.threshold < 0.5:
            raise ValueError(f"threshold must lie in [0, 0.5), got {self.threshold}")


@dataclass(frozen=True)
class PairState:
    """Hidden variables of one photon pair.

    Photon 1 is polarized at ``lam + eps1`` and photon 2 at
    ``lam + delta + eps2``.
    """

    lam: float
    delta: float
    eps1: float = 0.0
    eps2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "lam", self.lam % TWO_PI)

    @property
    def photon_angles(self) -> tuple[float, float]:
        return self.lam + self.eps1, self.lam + self.delta + self.eps2


def classify(photon_angle, detector_angle, threshold: float):
    """Vectorised switch: returns an int8 array of SwitchOutcome codes.

    Ties with ``0.5 +/- threshold`` fall in the dead band.
    """
    c2 = np.cos(np.asarray(photon_angle) - detector_angle) ** 2
    out = np.full(c2.shape, SwitchOutcome.UNDETECTED, dtype=np.int8)
    out[c2 > 0.5 + threshold] = SwitchOutcome.PLUS
    out[c2 < 0.5 - threshold] = SwitchOutcome.MINUS
    return out


def measure(photon_angle: float, detector: DetectorSettings) -> SwitchOutcome:
    c2 = math.cos(photon_angle - detector.angle) ** 2
    if c2 > 0.5 + detector.threshold:
        return SwitchOutcome.PLUS
    if c2 < 0.5 - detector.threshold:
        return SwitchOutcome.MINUS
    return SwitchOutcome.UNDETECTED


def pair_from_uniforms(u_lam, u_eps1, u_eps2, delta: float, decoherence: float):
    """Map uniforms in [0, 1) onto (lambda, eps1, eps2); works on arrays too.

    The perturbations are uniform on [-d*pi/2, d*pi/2] and vanish exactly at
    d = 0.
    """
    lam = TWO_PI * u_lam
    if decoherence == 0.0:
        zero = np.zeros_like(lam) if isinstance(lam, np.ndarray) else 0.0
        return lam, zero, zero
    half = 0.5 * decoherence * math.pi
    return lam, half * (2.0 * u_eps1 - 1.0), half * (2.0 * u_eps2 - 1.0)


def emit_pair(random_source, delta: float = math.pi / 2, decoherence: float = 0.0) -> PairState:
    """Draw one pair from a stream exposing ``random() -> float``.

    Draw order is lambda, eps1, eps2; the two perturbation draws are always
    consumed so the stream position does not depend on ``decoherence``.
    """
    if not 0.0 <= decoherence <= 1.0:
        raise ValueError(f"decoherence must lie in [0, 1], got {decoherence}")
    u = random_source.random(), random_source.random(), random_source.random()
    lam, e1, e2 = pair_from_uniforms(*u, delta, decoherence)
    return PairState(lam, delta, e1, e2)


def dead_band_fraction(threshold: float) -> float:
    """Fraction of uniformly polarized photons the switch leaves undetected."""
    return 2.0 / math.pi * math.asin(2.0 * threshold)
