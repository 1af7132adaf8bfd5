"""Deterministic reference values for the Monte Carlo engine.

Photon 1 is described by ``u = 2 * (lambda + eps1 - alpha)``, uniform on the
circle.  The switch turns ``u`` into an outcome through three arc sets:

    plus        (-c, c)
    minus       (pi - c, pi + c)
    undetected  (c, pi - c) and (pi + c, 2 pi - c)

with ``c = arccos(2 * threshold)``.  Photon 2 sees the same arcs at
``u + phi`` where ``phi = 2 * (delta + alpha - beta) + 2 * (eps2 - eps1)``, so
each joint probability at fixed ``phi`` is an arc-overlap length over 2 pi.
The perturbation difference ``w = eps2 - eps1`` has a triangular density on
[-d pi, d pi].  Both the overlap lengths (in ``w``) and the density are
piecewise linear, so Gauss-Legendre panels cut at every kink integrate
exactly up to rounding.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import EmptyTallyError

TWO_PI = 2.0 * math.pi
STANDARD_ANGLES = (0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8)

_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(3)
_TRAPEZOID_NODES = 64


def analog_integral(alpha: float, beta: float, delta: float, method: str = "closed") -> float:
    """Pair-averaged product of the two analog transmission probabilities.

    ``method="closed"`` uses 1/8 * (2 + cos 2(beta - alpha - delta));
    ``method="quadrature"`` uses the periodic trapezoid rule, which is exact
    for this degree-4 trigonometric integrand.
    """
    if method == "closed":
        return 0.125 * (2.0 + math.cos(2.0 * (beta - alpha - delta)))
    if method == "quadrature":
        lam = TWO_PI * np.arange(_TRAPEZOID_NODES) / _TRAPEZOID_NODES
        vals = np.cos(lam - alpha) ** 2 * np.cos(lam + delta - beta) ** 2
        return float(vals.mean())
    raise ValueError(f"unknown method {method!r}")


def _arcs(threshold: float):
    c = math.acos(2.0 * threshold)
    return [
        [(-c, 2 * c)],
        [(math.pi - c, 2 * c)],
        [(c, math.pi - 2 * c), (math.pi + c, math.pi - 2 * c)],
    ]


def _overlap(a, la, b, lb):
    """Length of arc [a, a+la] intersected with arc [b, b+lb] on the circle."""
    d = np.mod(b - a, TWO_PI)
    first = np.clip(np.minimum(la, d + lb) - d, 0.0, None)
    second = np.clip(np.minimum(la, d - TWO_PI + lb) - np.maximum(0.0, d - TWO_PI), 0.0, None)
    return first + second


def joint_at_shift(phi, threshold: float) -> np.ndarray:
    """Joint outcome probabilities for a fixed relative shift ``phi``.

    Returns an array of shape (3, 3) + phi.shape.
    """
    phi = np.asarray(phi, dtype=np.float64)
    arcs = _arcs(threshold)
    out = np.zeros((3, 3) + phi.shape)
    for i, j in itertools.product(range(3), range(3)):
        for a, la in arcs[i]:
            for b, lb in arcs[j]:
                if la > 0 and lb > 0:
                    out[i, j] += _overlap(a, la, b - phi, lb)
    return out / TWO_PI


def _breakpoints(phi0: float, threshold: float, width: float) -> np.ndarray:
    """Kinks of the integrand in w on [-width, width]."""
    ends = [e for arcs in _arcs(threshold) for a, la in arcs for e in (a, a + la)]
    pts = {-width, 0.0, width}
    for e1, e2 in itertools.product(ends, ends):
        # overlap kinks where phi = e2 - e1 (mod 2 pi), phi = phi0 + 2 w
        base = 0.5 * (e2 - e1 - phi0)
        k_lo = math.floor((-width - base) / math.pi)
        k_hi = math.ceil((width - base) / math.pi)
        for k in range(k_lo, k_hi + 1):
            w = base + k * math.pi
            if -width < w < width:
                pts.add(w)
    return np.array(sorted(pts))


@dataclass(frozen=True)
class OutcomeDistribution:
    probs: np.ndarray

    @property
    def definite(self) -> float:
        return float(self.probs[:2, :2].sum())

    def marginal(self, side: int) -> np.ndarray:
        return self.probs.sum(axis=1 - side)


def digital_distribution(alpha: float, beta: float, delta: float = math.pi / 2,
                         threshold: float = 0.0, decoherence: float = 0.0) -> OutcomeDistribution:
    """Exact probabilities of the nine joint switch outcomes."""
    if not 0.0 <= threshold < 0.5:
        raise ValueError(f"threshold must lie in [0, 0.5), got {threshold}")
    if not 0.0 <= decoherence <= 1.0:
        raise ValueError(f"decoherence must lie in [0, 1], got {decoherence}")
    phi0 = 2.0 * (delta + alpha - beta)
    width = decoherence * math.pi
    # overlaps move by at most 2 * width / (2 pi) per cell; below this it is rounding
    if width < 1e-13:
        return OutcomeDistribution(joint_at_shift(phi0, threshold))

    edges = _breakpoints(phi0, threshold, width)
    lo, hi = edges[:-1, None], edges[1:, None]
    w = 0.5 * (hi - lo) * _GL_NODES + 0.5 * (hi + lo)
    weight = 0.5 * (hi - lo) * _GL_WEIGHTS * (width - np.abs(w)) / width**2
    probs = (joint_at_shift(phi0 + 2.0 * w, threshold) * weight).sum(axis=(-2, -1))
    return OutcomeDistribution(probs)


def e_from_probs(probs) -> float:
    p = np.asarray(probs)
    definite = p[0, 0] + p[0, 1] + p[1, 0] + p[1, 1]
    if definite <= 0.0:
        raise EmptyTallyError("no double detections have positive probability")
    return float((p[0, 0] + p[1, 1] - p[0, 1] - p[1, 0]) / definite)


def oracle_E(alpha, beta, delta=math.pi / 2, threshold=0.0, decoherence=0.0) -> float:
    return e_from_probs(digital_distribution(alpha, beta, delta, threshold, decoherence).probs)


def chsh_combination(e_ab, e_abp, e_apb, e_apbp) -> float:
    return abs(e_ab - e_abp) + abs(e_apb + e_apbp)


def oracle_chsh(angles=STANDARD_ANGLES, delta=math.pi / 2, threshold=0.0, decoherence=0.0) -> float:
    """Exact post-selected CHSH value for angles ``(a, a', b, b')``."""
    a, ap, b, bp = angles
    e = [oracle_E(x, y, delta, threshold, decoherence) for x, y in ((a, b), (a, bp), (ap, b), (ap, bp))]
    return chsh_combination(*e)


def assignments(angles=STANDARD_ANGLES):
    """All labelings (a, a', b, b') of four angles, grouped by pairing.

    Yields ``(pairing, labeling)``; the pairing is the unordered split of the
    angles into two pairs, so there are three of them.
    """
    for perm in itertools.permutations(angles):
        yield frozenset((frozenset(perm[:2]), frozenset(perm[2:]))), perm


def best_assignment(angles=STANDARD_ANGLES, delta=math.pi / 2, threshold=0.0, decoherence=0.0):
    """Best CHSH value reached by each way of splitting the angles between sides."""
    best: dict = {}
    for pairing, perm in assignments(angles):
        s = oracle_chsh(perm, delta, threshold, decoherence)
        if pairing not in best or s > best[pairing][0] + 1e-12:
            best[pairing] = (s, perm)
    return best
