"""Energy assembly and inequality evaluators.

Total and rescaled energies, isoperimetric deficit, Fraenkel asymmetry,
the quantitative-isoperimetric and interpolation ratios, and the closed-form
ball oracle e(m) = c1 m^((n-1)/n) + c2 m^((2n-alpha)/n) used throughout the
test suite.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.fft import next_fast_len, irfftn, rfftn

from .errors import DegenerateDeficit, EmptySet, MassMismatch
from .grid import GridSet, perimeter, volume
from .riesz import Kernel, ball_riesz_energy, ball_volume, nonlocal_energy


@dataclass(frozen=True)
class EnergyBreakdown:
    """P, V, E = P + V and the mass of one set under one kernel."""

    P: float
    V: float
    E: float
    m: float
    kernel: Kernel


@dataclass(frozen=True)
class RescaleParams:
    """lambda = (m/omega_n)^(1/n) and epsilon = lambda^(n+1-alpha)."""

    lam: float
    eps: float

    @staticmethod
    def from_mass(k: Kernel, m: float) -> "RescaleParams":
        lam = (m / ball_volume(k.n)) ** (1.0 / k.n)
        return RescaleParams(lam, lam ** (k.n + 1 - k.alpha))


@lru_cache(maxsize=None)
def _c2(n: int, alpha: float) -> float:
    """Riesz energy of the unit-volume ball: V(B1) scaled to mass 1."""
    vb1 = ball_riesz_energy(Kernel(n, alpha))
    return vb1 * (1.0 / ball_volume(n)) ** ((2 * n - alpha) / n)


@dataclass(frozen=True)
class BallOracle:
    """Closed-form ball energies for a kernel.

    c1 = n * omega_n^(1/n) is the perimeter coefficient; c2 the nonlocal
    coefficient from quadrature (cross-checked by Monte Carlo in tests).
    """

    n: int
    alpha: float

    @property
    def c1(self) -> float:
        return self.n * ball_volume(self.n) ** (1.0 / self.n)

    @property
    def c2(self) -> float:
        return _c2(self.n, self.alpha)

    def radius(self, m: float) -> float:
        return (m / ball_volume(self.n)) ** (1.0 / self.n)

    def perimeter(self, m: float) -> float:
        return self.c1 * m ** ((self.n - 1) / self.n)

    def nonlocal_energy(self, m: float) -> float:
        return self.c2 * m ** ((2 * self.n - self.alpha) / self.n)

    def energy(self, m: float) -> float:
        return self.perimeter(m) + self.nonlocal_energy(m)

    def two_ball_crossover(self) -> float:
        """Mass where one ball and two half-mass balls tie: the closed form

            m* = [ c1 (2^(1/n) - 1) / (c2 (1 - 2^((alpha-n)/n))) ]^(n/(n+1-alpha))
        """
        n, a = self.n, self.alpha
        num = self.c1 * (2 ** (1.0 / n) - 1)
        den = self.c2 * (1 - 2 ** ((a - n) / n))
        return (num / den) ** (n / (n + 1 - a))


def ball_energy(n: int, alpha: float, m: float) -> EnergyBreakdown:
    """Analytic EnergyBreakdown for the mass-m ball."""
    oracle = BallOracle(n, alpha)
    P = oracle.perimeter(m)
    V = oracle.nonlocal_energy(m)
    return EnergyBreakdown(P, V, P + V, m, Kernel(n, alpha))


def total_energy(s: GridSet, k: Kernel, perimeter_method: str = "surface_mesh",
                 v_method: str = "convolution") -> EnergyBreakdown:
    """E(F) = P(F) + V(F) with the default estimators."""
    k.check_grid(s)
    P = perimeter(s, method=perimeter_method)
    V = nonlocal_energy(s, k, method=v_method)
    return EnergyBreakdown(P, V, P + V, volume(s), k)


def rescaled_energy(s: GridSet, k: Kernel, m: float):
    """E_eps(F) = P(F) + eps * V(F) for a unit-volume shape F, with eps from
    the mass rescaling. Returns (value, RescaleParams)."""
    if abs(volume(s) - ball_volume(k.n)) > 0.01 * ball_volume(k.n):
        raise MassMismatch("rescaled_energy expects volume omega_n within 1%")
    params = RescaleParams.from_mass(k, m)
    eb = total_energy(s, k)
    return eb.P + params.eps * eb.V, params


def isoperimetric_deficit(s: GridSet, perimeter_method: str = "surface_mesh") -> float:
    """D(F) = P(F) / (n omega_n^(1/n) m^((n-1)/n)) - 1."""
    if not s.cells.any():
        raise EmptySet("deficit of empty set")
    n = s.n
    m = volume(s)
    P = perimeter(s, method=perimeter_method)
    return P / (n * ball_volume(n) ** (1.0 / n) * m ** ((n - 1) / n)) - 1.0


def _best_overlap(F: GridSet, G: GridSet) -> float:
    """max over integer lattice shifts of |F intersect (G + shift)|, via FFT
    cross-correlation of the indicators."""
    a = F.cells.astype(float)
    b = G.cells.astype(float)
    shape = [next_fast_len(sa + sb) for sa, sb in zip(a.shape, b.shape)]
    fa = rfftn(a, shape)
    fb = rfftn(b[tuple(slice(None, None, -1) for _ in range(b.ndim))], shape)
    corr = irfftn(fa * fb, shape)
    # correlation counts are integers up to FFT noise
    return float(np.rint(corr.max()))


def fraenkel_asymmetry(F: GridSet, G: GridSet) -> float:
    """min over lattice translations of |F sym-diff (G+x)| / |F|.

    Exhaustive over all integer shifts through the cross-correlation
    maximum; result in [0, 2].
    """
    if F.h != G.h:
        raise MassMismatch("fraenkel_asymmetry requires a common spacing")
    cf, cg = F.count(), G.count()
    if abs(cf - cg) > 1:
        raise MassMismatch("fraenkel_asymmetry requires equal volumes")
    if cf == 0 and cg == 0:
        return 0.0
    best = _best_overlap(F, G)
    hn = F.h**F.n
    return (cf + cg - 2 * best) * hn / (cf * hn)


def fraenkel_to_ball(s: GridSet) -> float:
    """Fraenkel asymmetry of s against the rasterized same-volume ball."""
    from .competitors import make_ball

    ball = make_ball(s.n, volume(s), s.h)
    return fraenkel_asymmetry(s, ball)


def check_qiso(s: GridSet, deficit_tol: float = 0.02):
    """Both sides of the quantitative isoperimetric inequality
    Delta <= C_n sqrt(D): returns (Delta, D, Delta/sqrt(D))."""
    if not s.cells.any():
        raise EmptySet("qiso of empty set")
    D = isoperimetric_deficit(s)
    if D <= deficit_tol:
        raise DegenerateDeficit(
            f"deficit {D:.4g} below estimator tolerance {deficit_tol}"
        )
    delta = fraenkel_to_ball(s)
    return delta, D, delta / np.sqrt(D)


def interpolation_ratio(s: GridSet, k: Kernel) -> float:
    """m / (P^((n-alpha)/(n+1-alpha)) * V^(1/(n+1-alpha))) for the set's
    indicator; scale-invariant on ball families."""
    if not s.cells.any():
        raise EmptySet("interpolation ratio of empty set")
    eb = total_energy(s, k)
    n, a = k.n, k.alpha
    p_exp = (n - a) / (n + 1 - a)
    v_exp = 1.0 / (n + 1 - a)
    return eb.m / (eb.P**p_exp * eb.V**v_exp)
