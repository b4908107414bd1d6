"""Analytic assembly reliability under the kinetic tile assembly model.

Tiles attach anywhere at rate r_f = k̂_f·e^(-G_mc) and detach at rate
r_{r,b} = k̂_f·e^(-b·G_se) where b is the total bound strength, so growth
races against error trapping: once neighbouring growth freezes a site, the
tile sitting there is locked in.  Conditioning on correct input tiles, the
per-site steady state of that race has a closed form driven only by how many
tile types mismatch the correct one on one or both input sides.  Multiplying
the per-site conditional probabilities over the whole grid scores a tile
set's chance of assembling the pattern without a single frozen error.

All physical constants are folded into the two dimensionless parameters
G_mc (monomer concentration) and G_se (sticky-end strength) before any
reliability computation; for a given assembly deadline there is an optimal
choice of both, used throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

from .atam import TileSystem, assemble
from .patterns import Pattern


@dataclass(frozen=True)
class PhysicalParams:
    """Lab conditions: DX-tile rate constants at temperature T for a run of
    ``assembly_time_s`` seconds."""

    temperature_k: float
    assembly_time_s: float
    a_f: float = 5e8        # /M/sec
    e_f: float = 4000.0     # cal/mol
    gas_r: float = 2.0      # cal/mol/K

    def __post_init__(self) -> None:
        if self.temperature_k <= 0 or self.assembly_time_s <= 0:
            raise ValueError("temperature and assembly time must be positive")


def forward_rate_constant(params: PhysicalParams) -> float:
    """Arrhenius forward rate k_f = A_f * exp(-E_f / (R*T)), in /M/sec."""
    return params.a_f * math.exp(-params.e_f / (params.gas_r * params.temperature_k))


def bond_energy(b: int, temperature_k: float) -> float:
    """Standard free energy (cal/mol) to break b sticky-end bonds, from the
    nearest-neighbour estimate for 5-base DX-tile glues.

    Documented for completeness; the reliability path never evaluates it
    because its effect is already folded into G_mc and G_se.
    """
    return math.exp(5 * b * (11 - 4000.0 / temperature_k) + 3)


@dataclass(frozen=True)
class KineticModel:
    """Dimensionless operating point plus the rates it induces."""

    g_mc: float
    g_se: float
    k_f: float

    @property
    def k_hat(self) -> float:
        # adjusted forward constant folding entropic factors (orientation,
        # location) into the rate scale
        return math.e ** 3 * self.k_f

    @cached_property
    def r_f(self) -> float:
        return self.k_hat * math.exp(-self.g_mc)

    def r_r(self, b: int) -> float:
        """Detachment rate of a tile held by total bond strength b."""
        return self.k_hat * math.exp(-b * self.g_se)

    @cached_property
    def r_star(self) -> float:
        """Net growth rate rendering sites frozen: r_f - r_{r,2}."""
        return self.r_f - self.r_r(2)

    @property
    def in_regime(self) -> bool:
        """The small-error approximation regime 2*G_se > G_mc > G_se."""
        return 2 * self.g_se > self.g_mc > self.g_se


def optimal_params(m: int, n: int, params: PhysicalParams) -> KineticModel:
    """Operating point minimising error probability at the required speed.

    Finishing an m*n pattern in t seconds needs growth rate roughly
    r* = sqrt(m^2 + n^2) / t; maximising the mismatch penalty
    G_mc - G_se under that constraint gives G_mc = -log(2 r*/k̂_f) and
    G_se = -log(r*/k̂_f)/2, which reproduce r* exactly by construction.
    """
    k_f = forward_rate_constant(params)
    k_hat = math.e ** 3 * k_f
    r_star = math.hypot(m, n) / params.assembly_time_s
    if params.assembly_time_s * k_hat <= 2 * math.hypot(m, n):
        raise ValueError("assembly time too short: rates would be unphysical")
    g_mc = -math.log(2 * r_star / k_hat)
    g_se = -0.5 * math.log(r_star / k_hat)
    return KineticModel(g_mc=g_mc, g_se=g_se, k_f=k_f)


@dataclass(frozen=True)
class MismatchProfile:
    """Per-site counts of tile types disagreeing with the correct tile on
    exactly one (m1) or both (m2) input glues. For a deterministic tile set
    1 + m1 + m2 equals the tile count at every site."""

    m: int
    n: int
    m1: tuple[tuple[int, ...], ...]
    m2: tuple[tuple[int, ...], ...]

    def at(self, x: int, y: int) -> tuple[int, int]:
        return self.m1[y - 1][x - 1], self.m2[y - 1][x - 1]

    def sites(self):
        for y in range(1, self.n + 1):
            for x in range(1, self.m + 1):
                yield (x, y), self.m1[y - 1][x - 1], self.m2[y - 1][x - 1]


def mismatch_profile(system: TileSystem, pattern: Pattern) -> MismatchProfile:
    """Count input-glue mismatches of every tile type against each site's
    correct tile in the terminal assembly."""
    assembly = assemble(system, pattern.m, pattern.n)
    m1_rows, m2_rows = [], []
    for y in range(1, pattern.n + 1):
        r1, r2 = [], []
        for x in range(1, pattern.m + 1):
            correct = assembly.at(x, y)
            one = two = 0
            for t in system.tiles:
                mismatches = (t.glue_s != correct.glue_s) + (t.glue_w != correct.glue_w)
                if mismatches == 1:
                    one += 1
                elif mismatches == 2:
                    two += 1
            r1.append(one)
            r2.append(two)
        m1_rows.append(tuple(r1))
        m2_rows.append(tuple(r2))
    return MismatchProfile(pattern.m, pattern.n, tuple(m1_rows), tuple(m2_rows))


def site_correct_prob(m1: int, m2: int, model: KineticModel) -> float:
    """Steady-state probability that a site freezes with the correct tile,
    conditioned on correct input tiles.

    This is the closed form of the kinetic-trapping flow balance over the
    states empty / correct / one-match / no-match with freezing rate r*.
    """
    a = 1.0 / (model.r_star + model.r_r(2))
    b = m1 / (model.r_star + model.r_r(1))
    c = m2 / (model.r_star + model.r_r(0))
    return a / (a + b + c)


def _site_log_prob(m1: int, m2: int, model: KineticModel) -> float:
    a = 1.0 / (model.r_star + model.r_r(2))
    b = m1 / (model.r_star + model.r_r(1))
    c = m2 / (model.r_star + model.r_r(0))
    return -math.log1p((b + c) / a)


@dataclass(frozen=True)
class ApproxSiteError:
    value: float
    in_regime: bool


def approx_site_error(m1: int, model: KineticModel) -> ApproxSiteError:
    """Small-error estimate m1 * exp(-(G_mc - G_se)) of a site going wrong.

    Valid for 2*G_se > G_mc > G_se; outside that regime the value is still
    returned but flagged.
    """
    value = m1 * math.exp(-(model.g_mc - model.g_se))
    return ApproxSiteError(value=value, in_regime=model.in_regime)


@dataclass(frozen=True)
class ReliabilityReport:
    """Whole-pattern error-free assembly probability at the optimal operating
    point, with the per-site ingredients used to compute it."""

    model: KineticModel
    profile: MismatchProfile
    log_reliability: float

    @property
    def reliability(self) -> float:
        # underflows to 0.0 below ~1e-308; the log carries the information
        return math.exp(self.log_reliability)

    def site_prob(self, x: int, y: int) -> float:
        m1, m2 = self.profile.at(x, y)
        return site_correct_prob(m1, m2, self.model)


def reliability(system: TileSystem, pattern: Pattern,
                params: PhysicalParams) -> ReliabilityReport:
    """Probability the system assembles the pattern with no frozen errors.

    The product of per-site conditional probabilities runs over all m*n
    sites in a fixed row-major order and is accumulated in log space.
    Seed-adjacent sites use the same formula; the seed's glues count as
    correct inputs.
    """
    model = optimal_params(pattern.m, pattern.n, params)
    profile = mismatch_profile(system, pattern)
    log_total = 0.0
    for _, m1, m2 in profile.sites():
        log_total += _site_log_prob(m1, m2, model)
    return ReliabilityReport(model=model, profile=profile, log_reliability=log_total)
