"""Closed-form engine: opportunity, conditional densities, coverage, throughput.

Everything here is deterministic math on SystemParams.  The Monte-Carlo layer
re-estimates the same quantities empirically; quantities derived without
approximation must match it to statistical error, bound-type quantities must
bracket it.
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate as _sp_integrate
from scipy.special import gamma as _gamma

DEFAULT_REL_TOL = 1e-8

# CoverageBounds tolerates this much float noise before declaring the
# ordering violated; genuine violations are far larger.
_BOUND_SLACK = 1e-9


class IntegrationError(RuntimeError):
    """Semi-infinite quadrature failed to converge."""


@dataclass(frozen=True)
class CoverageBounds:
    """Ordered probability bracket [lower, upper] for a coverage probability."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        lo, up = self.lower, self.upper
        if not (-_BOUND_SLACK <= lo <= up + _BOUND_SLACK and up <= 1.0 + _BOUND_SLACK):
            raise ValueError(f"invalid coverage bounds [{lo}, {up}]")
        object.__setattr__(self, "lower", min(max(lo, 0.0), 1.0))
        object.__setattr__(self, "upper", min(max(up, self.lower), 1.0))


@dataclass(frozen=True)
class ValueBounds:
    """Ordered bracket for a nonnegative quantity with no unit-interval cap
    (throughputs are per-area densities)."""

    lower: float
    upper: float

    def __post_init__(self) -> None:
        if not 0.0 <= self.lower <= self.upper + _BOUND_SLACK:
            raise ValueError(f"invalid value bounds [{self.lower}, {self.upper}]")
        object.__setattr__(self, "upper", max(self.upper, self.lower))


class DensityProfileKind(enum.Enum):
    """Which conditional radial density profile to evaluate.

    Names read population_AROUND_center_protocol; *_UPPER tags evaluate the
    shifted-argument upper bound rather than an exact profile.
    """

    ST_AROUND_PR_PRA = "ST_AROUND_PR_PRA"
    ST_AROUND_PT_PTA = "ST_AROUND_PT_PTA"
    ST_AROUND_PR_PTA_UPPER = "ST_AROUND_PR_PTA_UPPER"
    PR_AROUND_ST_PRA = "PR_AROUND_ST_PRA"
    PT_AROUND_ST_PTA = "PT_AROUND_ST_PTA"
    PT_AROUND_ST_PRA_UPPER = "PT_AROUND_ST_PRA_UPPER"
    PT_AROUND_SR_PRA_UPPER = "PT_AROUND_SR_PRA_UPPER"
    PT_AROUND_SR_PTA_UPPER = "PT_AROUND_SR_PTA_UPPER"


def kappa(alpha: float) -> float:
    """Interference geometry constant 2*pi^2 / (alpha * sin(2*pi/alpha)).

    This is the constant for which the success probability of a Rayleigh link
    of length d at SIR target theta against a unit-density Poisson field of
    unit-power interferers is exp(-kappa * theta^(2/alpha) * d^2).  Equals
    pi^2/2 at alpha=4.
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    return 2.0 * math.pi**2 / (alpha * math.sin(2.0 * math.pi / alpha))


def spatial_opportunity(mu_p: float, P_p: float, N: float, alpha: float) -> float:
    """Probability that the strongest primary signal received at a point stays
    at or below the activation threshold N.

    exp{-2*pi*mu_p*Gamma(2/alpha)*(P_p/N)^(2/alpha)/alpha}.  The same formula
    serves receiver-beacon and transmitter-pilot sensing; only the threshold
    differs.  N=0 returns the continuous limit 0, N=inf returns 1.
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if mu_p < 0 or P_p <= 0 or N < 0:
        raise ValueError("require mu_p >= 0, P_p > 0, N >= 0")
    if mu_p == 0.0:
        return 1.0
    if N == 0.0:
        return 0.0
    if math.isinf(N):
        return 1.0
    exponent = 2.0 * math.pi * mu_p * _gamma(2.0 / alpha) * (P_p / N) ** (2.0 / alpha) / alpha
    return math.exp(-exponent)


def active_st_density(lambda_0: float, Q: float) -> float:
    """Density of secondary transmitters that pass their activation test."""
    if not 0.0 <= Q <= 1.0:
        raise ValueError(f"Q must be a probability, got {Q}")
    if lambda_0 < 0:
        raise ValueError("lambda_0 must be nonnegative")
    return lambda_0 * Q


def exclusion_opportunity(mu_p: float, D: float) -> float:
    """Probability that no active primary lies within distance D: exp(-mu_p*pi*D^2)."""
    if D < 0:
        raise ValueError("D must be nonnegative")
    if mu_p < 0:
        raise ValueError("mu_p must be nonnegative")
    return math.exp(-mu_p * math.pi * D * D)


def threshold_for_opportunity(Q: float, mu_p: float, P_p: float, alpha: float) -> float:
    """Invert spatial_opportunity for N: the threshold achieving opportunity Q."""
    if not 0.0 < Q < 1.0:
        raise ValueError(f"Q must lie strictly inside (0, 1), got {Q}")
    if mu_p <= 0:
        raise ValueError("inversion requires mu_p > 0")
    return P_p * (2.0 * math.pi * mu_p * _gamma(2.0 / alpha) / (alpha * (-math.log(Q)))) ** (alpha / 2.0)


def exclusion_radius_for_opportunity(Q: float, mu_p: float) -> float:
    """Invert exclusion_opportunity for D."""
    if not 0.0 < Q <= 1.0:
        raise ValueError(f"Q must lie in (0, 1], got {Q}")
    if mu_p <= 0:
        raise ValueError("inversion requires mu_p > 0")
    return math.sqrt(-math.log(Q) / (math.pi * mu_p))


def beta_factor(mu_p: float, P_p: float, N: float, alpha: float) -> float:
    """Clustering correction for the density of other active STs seen from an
    active ST: exp{pi*mu_p*Gamma((2+alpha)/alpha)*(P_p/(2N))^(2/alpha)} >= 1.

    Conditioning on one ST passing its threshold test pushes primaries away,
    which makes nearby STs more likely to pass too; beta bounds that boost.
    N=0 diverges (returns inf), N=inf returns 1.
    """
    if not alpha > 2:
        raise ValueError(f"alpha must exceed 2, got {alpha}")
    if mu_p < 0 or P_p <= 0 or N < 0:
        raise ValueError("require mu_p >= 0, P_p > 0, N >= 0")
    if mu_p == 0.0:
        return 1.0
    if N == 0.0:
        return math.inf
    if math.isinf(N):
        return 1.0
    exponent = math.pi * mu_p * _gamma((2.0 + alpha) / alpha) * (P_p / (2.0 * N)) ** (2.0 / alpha)
    return math.exp(exponent) if exponent < 709.0 else math.inf


def _clustered_st_density(lambda_0: float, mu_p: float, P_p: float, N: float,
                          alpha: float) -> float:
    """lambda_s * beta computed in log space.

    The two exponents are proportional (beta = Q^(-2^(-2/alpha))), so the
    product lambda_0 * Q^(1 - 2^(-2/alpha)) stays finite as N -> 0 even though
    beta alone overflows.
    """
    e = 2.0 / alpha
    log_q = -2.0 * math.pi * mu_p * _gamma(e) * (P_p / N) ** e / alpha
    return lambda_0 * math.exp(log_q * (1.0 - 2.0 ** (-e)))


# Profile tag -> (prefactor source, threshold name, argument shift expressed in
# link distances).  Prefactor "st" means the active-ST density under that
# protocol, "primary" means mu_p.
_PROFILE_TABLE = {
    DensityProfileKind.ST_AROUND_PR_PRA: ("st", "N_ra", ()),
    DensityProfileKind.ST_AROUND_PT_PTA: ("st", "N_ta", ()),
    DensityProfileKind.ST_AROUND_PR_PTA_UPPER: ("st", "N_ta", ("d_p",)),
    DensityProfileKind.PR_AROUND_ST_PRA: ("primary", "N_ra", ()),
    DensityProfileKind.PT_AROUND_ST_PTA: ("primary", "N_ta", ()),
    DensityProfileKind.PT_AROUND_ST_PRA_UPPER: ("primary", "N_ra", ("d_p",)),
    DensityProfileKind.PT_AROUND_SR_PRA_UPPER: ("primary", "N_ra", ("d_p", "d_s")),
    DensityProfileKind.PT_AROUND_SR_PTA_UPPER: ("primary", "N_ta", ("d_s",)),
}


def conditional_density(kind: DensityProfileKind, r, params) -> float | np.ndarray:
    """Radial density profile of one population seen from a typical point.

    All profiles share the shape prefactor * (1 - exp(-N*(r+shift)^alpha/P_p)):
    the activation test thins points near the conditioning location and the
    profile recovers the unconditional density at large range.
    """
    try:
        prefactor_kind, threshold_name, shift_names = _PROFILE_TABLE[kind]
    except KeyError:
        raise ValueError(f"unknown density profile kind: {kind!r}") from None
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr < 0):
        raise ValueError("r must be nonnegative")
    N = params.require(threshold_name)
    if prefactor_kind == "st":
        Q = spatial_opportunity(params.mu_p, params.P_p, N, params.alpha)
        prefactor = active_st_density(params.lambda_0, Q)
    else:
        prefactor = params.mu_p
    shift = sum(getattr(params, name) for name in shift_names)
    out = prefactor * -np.expm1(-N * (r_arr + shift) ** params.alpha / params.P_p)
    return float(out) if out.ndim == 0 else out


def integrate_semi_infinite(
    f: Callable[[float], float],
    rel_tol: float = DEFAULT_REL_TOL,
    *,
    scale: float = 1.0,
    max_doublings: int = 64,
) -> float:
    """Integrate f over [0, inf) for integrands with eventually-monotone decay.

    Strategy: adaptive quadrature over doubling segments [0,s], [s,2s], ...
    until two consecutive segments contribute below rel_tol relative to the
    running sum, then an infinite-interval quadrature picks up the remaining
    tail, so slowly decaying (power-law) tails are not silently dropped.
    ``scale`` sets the first segment length; pass the integrand's natural decay
    scale when it is far from 1 (e.g. sharply peaked near the origin).
    """
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    if scale <= 0:
        raise ValueError("scale must be positive")

    def _quad(a: float, b: float, floor: float) -> float:
        eps_abs = max(rel_tol * floor * 1e-2, 1e-280)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", _sp_integrate.IntegrationWarning)
            value, _ = _sp_integrate.quad(
                f, a, b, epsabs=eps_abs, epsrel=rel_tol * 1e-1, limit=200
            )
        if not math.isfinite(value):
            raise IntegrationError(f"non-finite quadrature result on [{a}, {b}]")
        return value

    total = 0.0
    upper = 0.0
    segment = scale
    small_streak = 0
    for _ in range(max_doublings):
        contribution = _quad(upper, upper + segment, abs(total))
        total += contribution
        upper += segment
        segment *= 2.0
        if abs(contribution) <= rel_tol * max(abs(total), 1e-300) / 4.0:
            small_streak += 1
            if small_streak >= 2:
                break
        else:
            small_streak = 0
    else:
        raise IntegrationError(
            f"no convergence after {max_doublings} segment doublings (reached u={upper:g})"
        )
    total += _quad(upper, math.inf, abs(total))
    return total


def _interference_kernel(c: float, alpha: float) -> Callable[[float], float]:
    """u -> 1/(1 + c*u^alpha), the Rayleigh success attenuation of one
    interferer at range u (c collects target, powers and link distance)."""

    def kernel(u: float) -> float:
        return 1.0 / (1.0 + c * u**alpha)

    return kernel


def coverage_primary_no_secondaries(params) -> float:
    """Primary link success with the secondary tier silent."""
    k = kappa(params.alpha)
    return math.exp(-k * params.theta_p ** (2.0 / params.alpha) * params.d_p**2 * params.mu_p)


def coverage_primary_all_active(params) -> float:
    """Primary link success with every candidate ST transmitting."""
    k = kappa(params.alpha)
    e = 2.0 / params.alpha
    dens = params.mu_p + params.lambda_0 * (params.P_s / params.P_p) ** e
    return math.exp(-k * params.theta_p**e * params.d_p**2 * dens)


def coverage_secondary_all_active(params) -> float:
    """Secondary link success with every candidate ST transmitting."""
    k = kappa(params.alpha)
    e = 2.0 / params.alpha
    dens = params.mu_p * (params.P_p / params.P_s) ** e + params.lambda_0
    return math.exp(-k * params.theta_s**e * params.d_s**2 * dens)


def coverage_primary_pra(params, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Coverage probability of the typical primary link under receiver-side
    threshold activation.

    Product of three exponential factors: the baseline with interferer density
    mu_p + lambda_s*(P_s/P_p)^(2/alpha); a correction crediting the thinning of
    STs near the receiver; and a cross term coupling each ST's sensing fading
    (capped at N_ra) with the interference it causes, which is what channel
    reciprocity contributes.
    """
    N = params.require("N_ra")
    alpha, P_p, P_s = params.alpha, params.P_p, params.P_s
    if N == 0.0:
        return coverage_primary_no_secondaries(params)
    if math.isinf(N):
        return coverage_primary_all_active(params)
    e = 2.0 / alpha
    Q = spatial_opportunity(params.mu_p, P_p, N, alpha)
    lam_s = active_st_density(params.lambda_0, Q)
    k = kappa(alpha)
    exponent = -k * params.theta_p**e * params.d_p**2 * (params.mu_p + lam_s * (P_s / P_p) ** e)
    if lam_s > 0.0:
        exponent += 2.0 * math.pi / alpha * lam_s * (P_p / N) ** e * _gamma(e)
        cross = math.exp(-params.theta_p * P_s * N * params.d_p**alpha / P_p**2)
        if cross > 0.0:
            c = P_p / (params.theta_p * P_s * params.d_p**alpha)

            def integrand(u: float) -> float:
                cu = c * u**alpha
                return cu / (1.0 + cu) * math.exp(-N * u**alpha / P_p) * u

            scale = min(1.0, (P_p / N) ** (1.0 / alpha))
            exponent -= 2.0 * math.pi * lam_s * cross * integrate_semi_infinite(
                integrand, rel_tol, scale=scale
            )
    return math.exp(exponent)


def coverage_primary_pta_bounds(params, rel_tol: float = DEFAULT_REL_TOL) -> CoverageBounds:
    """Bracket for primary coverage under transmitter-side threshold activation.

    Sensing happens at the ST against PT pilots while interference lands on the
    PR, so the ST thinning seen from the receiver is only known through bounds:
    the upper bound thins interferers by their distance to the receiver, the
    lower bound by the worst-case shifted distance through the transmitter.
    """
    N = params.require("N_ta")
    alpha, P_p, P_s = params.alpha, params.P_p, params.P_s
    if N == 0.0:
        v = coverage_primary_no_secondaries(params)
        return CoverageBounds(v, v)
    if math.isinf(N):
        v = coverage_primary_all_active(params)
        return CoverageBounds(v, v)
    e = 2.0 / alpha
    Q = spatial_opportunity(params.mu_p, P_p, N, alpha)
    lam_s = active_st_density(params.lambda_0, Q)
    k = kappa(alpha)
    base = -k * params.theta_p**e * params.d_p**2 * (params.mu_p + lam_s * (P_s / P_p) ** e)
    if lam_s == 0.0:
        v = math.exp(base)
        return CoverageBounds(v, v)
    c = P_p / (params.theta_p * P_s * params.d_p**alpha)
    kernel = _interference_kernel(c, alpha)
    d_p = params.d_p
    scale = min(1.0, (P_p / N) ** (1.0 / alpha))

    def integrand_near(u: float) -> float:
        return math.exp(-N * u**alpha / P_p) * kernel(u) * u

    def integrand_shifted(u: float) -> float:
        return math.exp(-N * (u + d_p) ** alpha / P_p) * kernel(u) * u

    upper = math.exp(base + 2.0 * math.pi * lam_s * integrate_semi_infinite(integrand_near, rel_tol, scale=scale))
    lower = math.exp(base + 2.0 * math.pi * lam_s * integrate_semi_infinite(integrand_shifted, rel_tol, scale=scale))
    return CoverageBounds(lower, upper)


def coverage_secondary_pra_lower(params, rel_tol: float = DEFAULT_REL_TOL) -> float:
    """Lower bound on secondary coverage under receiver-beacon activation.

    Conditioning on the typical ST being active both inflates nearby active-ST
    density (beta factor, penalised exactly) and thins primaries near the
    secondary receiver (credited through the shifted-argument profile bound).
    N_ra=0 returns the limit 1: activation then requires all primaries to be
    arbitrarily far away, leaving the accepted link interference-free.
    """
    N = params.require("N_ra")
    alpha, P_p, P_s = params.alpha, params.P_p, params.P_s
    if N == 0.0:
        return 1.0
    if math.isinf(N):
        return coverage_secondary_all_active(params)
    e = 2.0 / alpha
    lam_beta = _clustered_st_density(params.lambda_0, params.mu_p, P_p, N, alpha)
    k = kappa(alpha)
    exponent = -k * params.theta_s**e * params.d_s**2 * (
        params.mu_p * (P_p / P_s) ** e + lam_beta
    )
    if params.mu_p > 0.0:
        c = P_s / (params.theta_s * P_p * params.d_s**alpha)
        kernel = _interference_kernel(c, alpha)
        shift = params.d_p + params.d_s

        def integrand(u: float) -> float:
            return math.exp(-N * (u + shift) ** alpha / P_p) * kernel(u) * u

        scale = min(1.0, (P_p / N) ** (1.0 / alpha))
        exponent += 2.0 * math.pi * params.mu_p * integrate_semi_infinite(integrand, rel_tol, scale=scale)
    return min(math.exp(exponent), 1.0)


def coverage_secondary_pta_bounds(params, rel_tol: float = DEFAULT_REL_TOL) -> CoverageBounds:
    """Bracket for secondary coverage under transmitter-pilot activation.

    Upper bound: primaries thinned by their distance to the secondary receiver
    and other STs kept at the unconditional active density.  Lower bound:
    thinning measured through the transmitter (shift d_s) and active-ST density
    inflated by beta.
    """
    N = params.require("N_ta")
    alpha, P_p, P_s = params.alpha, params.P_p, params.P_s
    if N == 0.0:
        return CoverageBounds(1.0, 1.0)
    if math.isinf(N):
        v = coverage_secondary_all_active(params)
        return CoverageBounds(v, v)
    e = 2.0 / alpha
    Q = spatial_opportunity(params.mu_p, P_p, N, alpha)
    lam_s = active_st_density(params.lambda_0, Q)
    lam_beta = _clustered_st_density(params.lambda_0, params.mu_p, P_p, N, alpha)
    k = kappa(alpha)
    base_density = params.mu_p * (P_p / P_s) ** e
    c = P_s / (params.theta_s * P_p * params.d_s**alpha)
    kernel = _interference_kernel(c, alpha)
    d_s = params.d_s
    scale = min(1.0, (P_p / N) ** (1.0 / alpha))

    def integrand_near(u: float) -> float:
        return math.exp(-N * u**alpha / P_p) * kernel(u) * u

    def integrand_shifted(u: float) -> float:
        return math.exp(-N * (u + d_s) ** alpha / P_p) * kernel(u) * u

    common = k * params.theta_s**e * d_s**2
    mu_term = 2.0 * math.pi * params.mu_p
    upper = math.exp(
        -common * (base_density + lam_s)
        + mu_term * integrate_semi_infinite(integrand_near, rel_tol, scale=scale)
    )
    lower = math.exp(
        -common * (base_density + lam_beta)
        + mu_term * integrate_semi_infinite(integrand_shifted, rel_tol, scale=scale)
    )
    return CoverageBounds(min(lower, 1.0), min(upper, 1.0))


def spatial_throughput(kind: str, params, coverage, opportunity: float | None = None):
    """Density of successful transmissions per unit area.

    primary: mu_p * coverage.  secondary: lambda_0 * opportunity * coverage,
    where ``opportunity`` is the activation probability of the matching
    protocol.  CoverageBounds map through linearly.
    """
    if kind == "primary":
        factor = params.mu_p
    elif kind == "secondary":
        if opportunity is None:
            raise ValueError("secondary throughput requires the opportunity probability")
        factor = active_st_density(params.lambda_0, opportunity)
    else:
        raise ValueError(f"kind must be 'primary' or 'secondary', got {kind!r}")
    if isinstance(coverage, CoverageBounds):
        return ValueBounds(factor * coverage.lower, factor * coverage.upper)
    if not 0.0 <= coverage <= 1.0:
        raise ValueError(f"coverage must be a probability, got {coverage}")
    return factor * coverage
