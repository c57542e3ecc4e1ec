"""Exact discrete-generation gamete dynamics at a single spatial point.

Two diallelic loci (alleles A/a and B/b) in a randomly mating diploid
population with non-overlapping generations. Heterozygotes pay a fitness
cost at each locus:

    AA: 1 + 2 sA     Aa: 1 + sA - SA     aa: 1
    BB: 1 + 2 sB     Bb: 1 + sB - SB     bb: 1

with multiplicative effects among loci. Recombination reshuffles the
double heterozygote AB|ab into Ab and aB gametes with probability ``r``.

The state is carried either as the four gamete frequencies
(u, v, w, z) = (AB, Ab, aB, ab), or equivalently as allele frequencies
plus linkage disequilibrium (p, q, D) with

    p = u + v,   q = u + w,   D = u z - v w = u - p q.

`recursion_step_exact` advances the gamete frequencies by one full
generation (random fusion, selection, recombination, gamete release).
`recursion_step_first_order` is the weak-selection limit of that map,
obtained by scaling all selection coefficients and the recombination
probability by a common small factor ``alpha``; it is the generator of
the continuous-time dynamics used by the spatial solvers.

All functions are pure and operate on value types; they are safe to call
concurrently. Scalar formulas accept numpy arrays componentwise, which
is what the spatial integrators rely on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleStateError

# Tolerances for simplex membership and (p,q,D) feasibility checks.
SUM_TOL = 1e-12
FEAS_TOL = 1e-12

# Linkage disequilibrium is bounded by 1/4 in absolute value on the simplex.
D_MAX = 0.25


@dataclass(frozen=True)
class FitnessParams:
    """Model constants: selection strengths, recombination, dispersal.

    Attributes:
        sA, sB: directional advantage of A over a (resp. B over b), >= 0.
        SA, SB: heterozygote fitness costs, > 0, with sA < SA and sB < SB.
        r: recombination probability between the two loci, in [0, 1/2].
        sigma2: dispersal variance per generation (squared space units).
    """

    sA: float
    sB: float
    SA: float
    SB: float
    r: float
    sigma2: float = 1.0

    def __post_init__(self):
        if not (0.0 <= self.sA < self.SA):
            raise ValueError(f"need 0 <= sA < SA, got sA={self.sA}, SA={self.SA}")
        if not (0.0 <= self.sB < self.SB):
            raise ValueError(f"need 0 <= sB < SB, got sB={self.sB}, SB={self.SB}")
        if not (0.0 <= self.r <= 0.5):
            raise ValueError(f"recombination must lie in [0, 1/2], got {self.r}")
        if not (self.sigma2 > 0.0):
            raise ValueError(f"dispersal variance must be positive, got {self.sigma2}")

    def scaled(self, alpha: float) -> "FitnessParams":
        """All selection coefficients and r multiplied by ``alpha`` (weak-effects scaling)."""
        return FitnessParams(
            sA=self.sA * alpha,
            sB=self.sB * alpha,
            SA=self.SA * alpha,
            SB=self.SB * alpha,
            r=self.r * alpha,
            sigma2=self.sigma2,
        )


@dataclass(frozen=True)
class GameteFreqs:
    """Frequencies of the four gamete types AB, Ab, aB, ab."""

    u: float
    v: float
    w: float
    z: float

    def __post_init__(self):
        for name, val in (("u", self.u), ("v", self.v), ("w", self.w), ("z", self.z)):
            if not (-SUM_TOL <= val <= 1.0 + SUM_TOL):
                raise ValueError(f"gamete frequency {name}={val} outside [0, 1]")
        total = self.u + self.v + self.w + self.z
        if abs(total - 1.0) > SUM_TOL:
            raise ValueError(f"gamete frequencies sum to {total}, expected 1")

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w, self.z])


@dataclass(frozen=True)
class PQD:
    """Allele frequencies and linkage disequilibrium (p, q, D)."""

    p: float
    q: float
    D: float

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0 and 0.0 <= self.q <= 1.0):
            raise ValueError(f"allele frequencies must lie in [0, 1], got p={self.p}, q={self.q}")
        if abs(self.D) > D_MAX + FEAS_TOL:
            raise ValueError(f"linkage disequilibrium |D|={abs(self.D)} exceeds 1/4")


def _fitness_weights(fp: FitnessParams) -> tuple[float, float, float, float]:
    """Per-locus genotype fitnesses (homozygote AA-like, heterozygote) for both loci."""
    wAA = 1.0 + 2.0 * fp.sA
    wAa = 1.0 + fp.sA - fp.SA
    wBB = 1.0 + 2.0 * fp.sB
    wBb = 1.0 + fp.sB - fp.SB
    return wAA, wAa, wBB, wBb


def mean_fitness(g: GameteFreqs, fp: FitnessParams):
    """Population mean fitness after random fusion of gametes.

    Ten quadratic terms: one per unordered genotype, diagonal terms once
    and off-diagonal terms with the factor 2 from ordered pairing.
    """
    return _mean_fitness_arrays(g.u, g.v, g.w, g.z, fp)


def _mean_fitness_arrays(u, v, w, z, fp: FitnessParams):
    wAA, wAa, wBB, wBb = _fitness_weights(fp)
    return (
        wAA * wBB * u * u
        + wAA * v * v
        + wBB * w * w
        + z * z
        + 2.0 * wAA * wBb * u * v
        + 2.0 * wAa * wBB * u * w
        + 2.0 * wAa * wBb * u * z
        + 2.0 * wAa * wBb * v * w
        + 2.0 * wAa * v * z
        + 2.0 * wBb * w * z
    )


def _recursion_numerators(u, v, w, z, fp: FitnessParams):
    """Unnormalized next-generation gamete frequencies.

    The four expressions sum to the mean fitness identically, which is
    the conservation property the recursion relies on.
    """
    wAA, wAa, wBB, wBb = _fitness_weights(fp)
    r = fp.r
    het = wAa * wBb  # double-heterozygote fitness, the only genotype that recombines
    num_u = (
        wAA * wBB * u * u
        + wAA * wBb * u * v
        + wAa * wBB * u * w
        + (1.0 - r) * het * u * z
        + r * het * w * v
    )
    num_v = (
        wAA * v * v
        + wAA * wBb * v * u
        + wAa * v * z
        + (1.0 - r) * het * v * w
        + r * het * u * z
    )
    num_w = (
        wBB * w * w
        + wBb * w * z
        + wAa * wBB * w * u
        + (1.0 - r) * het * w * v
        + r * het * u * z
    )
    num_z = (
        z * z
        + wAa * z * v
        + wBb * z * w
        + (1.0 - r) * het * z * u
        + r * het * w * v
    )
    return num_u, num_v, num_w, num_z


def recursion_step_exact(g: GameteFreqs, fp: FitnessParams) -> GameteFreqs:
    """Advance gamete frequencies by one full generation.

    Selection acts on the sixteen ordered diploid genotypes formed by
    random fusion; recombination reshuffles double heterozygotes. The
    output is renormalized by its exact sum to keep long iterations on
    the simplex despite rounding.
    """
    num_u, num_v, num_w, num_z = _recursion_numerators(g.u, g.v, g.w, g.z, fp)
    wbar = _mean_fitness_arrays(g.u, g.v, g.w, g.z, fp)
    u, v, w, z = num_u / wbar, num_v / wbar, num_w / wbar, num_z / wbar
    total = u + v + w + z
    return GameteFreqs(u / total, v / total, w / total, z / total)


def _step_arrays(u, v, w, z, fp: FitnessParams):
    """Vectorized one-generation map on raw arrays (no renormalization)."""
    num_u, num_v, num_w, num_z = _recursion_numerators(u, v, w, z, fp)
    wbar = _mean_fitness_arrays(u, v, w, z, fp)
    return num_u / wbar, num_v / wbar, num_w / wbar, num_z / wbar


def recursion_step_first_order(s: PQD, fp: FitnessParams, alpha: float) -> PQD:
    """Weak-selection one-generation map on (p, q, D).

    Limit of the exact recursion when every selection coefficient and
    the recombination probability are scaled by ``alpha``; correct to
    first order in ``alpha``. With D = 0 the two loci decouple.
    """
    p, q, D = s.p, s.q, s.D
    selA = fp.SA * (2.0 * p - 1.0) + fp.sA
    selB = fp.SB * (2.0 * q - 1.0) + fp.sB
    p_new = p + alpha * (selA * p * (1.0 - p) + selB * D)
    q_new = q + alpha * (selB * q * (1.0 - q) + selA * D)
    D_new = D - alpha * (fp.r + (2.0 * p - 1.0) * selA + (2.0 * q - 1.0) * selB) * D
    return PQD(p_new, q_new, D_new)


def to_pqd(g: GameteFreqs) -> PQD:
    """Allele frequencies and linkage disequilibrium of a gamete state."""
    return PQD(p=g.u + g.v, q=g.u + g.w, D=g.u * g.z - g.v * g.w)


def from_pqd(s: PQD) -> GameteFreqs:
    """Reconstruct gamete frequencies from (p, q, D).

    Raises:
        InfeasibleStateError: if any reconstructed frequency falls
            outside [0, 1] by more than the feasibility tolerance.
            Noise inside the tolerance band is clamped to the boundary.
    """
    p, q, D = s.p, s.q, s.D
    u = p * q + D
    v = p * (1.0 - q) - D
    w = (1.0 - p) * q - D
    z = (1.0 - p) * (1.0 - q) + D
    gametes = (u, v, w, z)
    if min(gametes) < -FEAS_TOL or max(gametes) > 1.0 + FEAS_TOL:
        raise InfeasibleStateError(
            f"(p={p}, q={q}, D={D}) reconstructs gametes outside [0, 1]: {gametes}",
            gametes,
        )
    u, v, w, z = (min(max(y, 0.0), 1.0) for y in gametes)
    return GameteFreqs(u, v, w, z)
