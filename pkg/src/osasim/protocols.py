"""Secondary activation protocols and joint network realizations.

A realization is one synchronous slot: active primary pairs, candidate
secondary pairs, every fading the metrics need, and the activation decision of
each candidate ST.  Two threshold protocols (sense beacon power from primary
receivers, or pilot power from primary transmitters) and two exclusion-region
baselines (distance to receivers or transmitters), plus always/never-transmit
limits.

The one structural subtlety: under receiver-beacon sensing, the channel an ST
measures toward a primary receiver is the same channel its interference will
travel, so those two fading values are one number.  Under pilot sensing the
sensed (ST<->PT) and interfering (ST->PR) channels are distinct and their
fadings independent.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .geometry import PointPattern, SimWindow, empty_pattern, place_partner, sample_hppp
from .params import SystemParams

DEFAULT_REJECTION_CAP = 1_000_000


class RejectionCapError(RuntimeError):
    """Conditioning on an active typical ST failed within the attempt cap."""


class ProtocolKind(enum.Enum):
    PRA = "PRA"                  # activate iff max beacon power from PRs <= N_ra
    PTA = "PTA"                  # activate iff max pilot power from PTs <= N_ta
    ERR = "ERR"                  # activate iff min distance to active PRs >= D_excl
    ERT = "ERT"                  # activate iff min distance to active PTs >= D_excl
    ALL_ACTIVE = "ALL_ACTIVE"    # every candidate transmits
    NONE_ACTIVE = "NONE_ACTIVE"  # no candidate transmits


class Conditioning(enum.Enum):
    NONE = "none"
    TYPICAL_PRIMARY_PAIR = "typical_primary_pair"
    TYPICAL_SECONDARY_PAIR = "typical_secondary_pair"


_THRESHOLD_FIELD = {
    ProtocolKind.PRA: "N_ra",
    ProtocolKind.PTA: "N_ta",
    ProtocolKind.ERR: "D_excl",
    ProtocolKind.ERT: "D_excl",
}


@dataclass(frozen=True)
class DataFadings:
    """Fadings toward the typical receiver of the conditioned link."""

    link: float                      # typical transmitter -> typical receiver
    from_active_pts: np.ndarray      # background PT -> receiver
    from_candidate_sts: np.ndarray   # candidate ST -> receiver


@dataclass(frozen=True)
class NetworkRealization:
    """One joint draw of both tiers with all randomness the metrics consume.

    ``sensing_sources`` holds the positions the activation rule measures
    against (PRs for beacon sensing and receiver exclusion, PTs for pilot
    sensing and transmitter exclusion); when a typical primary pair is
    conditioned in, its relevant point occupies row 0.  ``sensing_fadings`` is
    the (candidate ST, source) fading matrix for the threshold protocols, None
    for the distance-based ones.
    """

    kind: ProtocolKind
    conditioning: Conditioning
    window: SimWindow
    active_pts: PointPattern
    active_prs: PointPattern
    candidate_sts: PointPattern
    paired_srs: PointPattern
    st_active_flags: np.ndarray
    sensing_sources: np.ndarray
    sensing_fadings: np.ndarray | None
    typical_pt: np.ndarray | None = None
    typical_pr: np.ndarray | None = None
    typical_st: np.ndarray | None = None
    typical_sr: np.ndarray | None = None
    typical_st_sensing: np.ndarray | None = None
    typical_st_active: bool | None = None
    data_fadings: DataFadings | None = None
    rejected_attempts: int = 0

    @property
    def n_active_sts(self) -> int:
        return int(np.count_nonzero(self.st_active_flags))


def aloha_thin(pattern: PointPattern, p: float, rng: np.random.Generator) -> PointPattern:
    """Independently keep each point with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"retention probability must lie in [0, 1], got {p}")
    keep = rng.random(pattern.n) < p
    return PointPattern(pattern.xy[keep], pattern.window, pattern.intensity * p)


def _pairwise_distances(a_xy: np.ndarray, b_xy: np.ndarray) -> np.ndarray:
    """(len(a), len(b)) Euclidean distance matrix."""
    diff = a_xy[:, None, :] - b_xy[None, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def _max_power_rows(st_xy: np.ndarray, src_xy: np.ndarray, fadings: np.ndarray,
                    P_tx: float, alpha: float) -> np.ndarray:
    """Max received sensing power per ST over all sources; 0 with no sources.

    A zero ST-source distance yields infinite power, which correctly forces
    the threshold test to fail.
    """
    if src_xy.shape[0] == 0:
        return np.zeros(st_xy.shape[0])
    d = _pairwise_distances(st_xy, src_xy)
    with np.errstate(divide="ignore"):
        powers = P_tx * fadings * d ** (-alpha)
    return powers.max(axis=1)


def max_sensed_power(st, sources_xy: np.ndarray, fadings: np.ndarray,
                     P_tx: float, alpha: float) -> float:
    """Strongest sensing power one ST receives from the given sources."""
    sources_xy = np.asarray(sources_xy, dtype=float).reshape(-1, 2)
    fadings = np.asarray(fadings, dtype=float)
    if fadings.shape != (sources_xy.shape[0],):
        raise ValueError("one fading per source required")
    st_xy = np.asarray(st, dtype=float).reshape(1, 2)
    return float(_max_power_rows(st_xy, sources_xy, fadings[None, :], P_tx, alpha)[0])


def _flags_from_geometry(kind: ProtocolKind, st_xy: np.ndarray, src_xy: np.ndarray,
                         fadings: np.ndarray | None, threshold: float,
                         P_tx: float, alpha: float) -> np.ndarray:
    n = st_xy.shape[0]
    if kind is ProtocolKind.ALL_ACTIVE:
        return np.ones(n, dtype=bool)
    if kind is ProtocolKind.NONE_ACTIVE:
        return np.zeros(n, dtype=bool)
    if kind in (ProtocolKind.PRA, ProtocolKind.PTA):
        return _max_power_rows(st_xy, src_xy, fadings, P_tx, alpha) <= threshold
    if kind in (ProtocolKind.ERR, ProtocolKind.ERT):
        if src_xy.shape[0] == 0:
            return np.ones(n, dtype=bool)
        return _pairwise_distances(st_xy, src_xy).min(axis=1) >= threshold
    raise ValueError(f"unknown protocol kind: {kind!r}")


def required_threshold(kind: ProtocolKind, params: SystemParams) -> float:
    """The activation parameter the given kind reads (0 for the no-op kinds)."""
    field = _THRESHOLD_FIELD.get(kind)
    return 0.0 if field is None else params.require(field)


def secondary_activation(st_index: int, realization: NetworkRealization,
                         kind: ProtocolKind, threshold: float,
                         params: SystemParams) -> bool:
    """Re-evaluate one candidate ST's activation decision.

    Uses the realization's stored geometry and sensing fadings, so the same
    draw can be re-tested under a different threshold (the decision is
    monotone in it) or a different rule of the same information class.
    """
    flags = activation_flags(realization, kind, threshold, params)
    return bool(flags[st_index])


def activation_flags(realization: NetworkRealization, kind: ProtocolKind,
                     threshold: float, params: SystemParams) -> np.ndarray:
    """Vectorized secondary_activation over every candidate ST."""
    if kind in (ProtocolKind.PRA, ProtocolKind.PTA) and realization.sensing_fadings is None \
            and realization.candidate_sts.n > 0:
        raise ValueError(f"realization lacks sensing fadings, cannot evaluate {kind.value}")
    if threshold < 0:
        raise ValueError("threshold must be nonnegative")
    src = _sources_for_kind(kind, realization)
    return _flags_from_geometry(kind, realization.candidate_sts.xy, src,
                                realization.sensing_fadings, threshold,
                                params.P_p, params.alpha)


def _sources_for_kind(kind: ProtocolKind, realization: NetworkRealization) -> np.ndarray:
    """Sensing/exclusion reference points for re-evaluation under ``kind``.

    Threshold kinds must reuse the stored sources (their fadings are bound to
    them); distance kinds only need positions and can be recomputed.
    """
    if kind in (ProtocolKind.PRA, ProtocolKind.PTA, ProtocolKind.ALL_ACTIVE,
                ProtocolKind.NONE_ACTIVE):
        return realization.sensing_sources
    rows = []
    if kind is ProtocolKind.ERR:
        if realization.typical_pr is not None:
            rows.append(realization.typical_pr[None, :])
        rows.append(realization.active_prs.xy)
    else:
        if realization.typical_pt is not None:
            rows.append(realization.typical_pt[None, :])
        rows.append(realization.active_pts.xy)
    return np.concatenate(rows, axis=0) if rows else np.empty((0, 2))


def _unit_vector(rng: np.random.Generator) -> np.ndarray:
    phi = 2.0 * math.pi * rng.random()
    return np.array([math.cos(phi), math.sin(phi)])


def _draw_primaries(params: SystemParams, window: SimWindow,
                    rng: np.random.Generator) -> tuple[PointPattern, PointPattern]:
    # Active pairs are drawn at density mu_p directly; thinning a mu_0 parent
    # by p_p yields the same law (see aloha_thin and its closure test).
    pts = sample_hppp(params.mu_p, window, rng)
    prs = place_partner(pts, params.d_p, rng)
    return pts, prs


def _draw_secondaries(params: SystemParams, window: SimWindow,
                      rng: np.random.Generator) -> tuple[PointPattern, PointPattern]:
    sts = sample_hppp(params.lambda_0, window, rng)
    srs = place_partner(sts, params.d_s, rng)
    return sts, srs


def _stack_sources(typical: np.ndarray | None, background: np.ndarray) -> np.ndarray:
    if typical is None:
        return background
    return np.concatenate([typical[None, :], background], axis=0)


def build_realization(params: SystemParams, window: SimWindow, kind: ProtocolKind,
                      conditioning: Conditioning, rng: np.random.Generator,
                      max_attempts: int | None = None) -> NetworkRealization:
    """Draw one slot of the overlaid network under the requested conditioning.

    typical_primary_pair: typical PR at the origin, its PT at distance d_p in a
    uniform random direction; both participate in sensing and exclusion exactly
    like background primaries.  typical_secondary_pair: typical SR at the
    origin, its ST at distance d_s; the draw is rejected and repeated until the
    typical ST's own activation test passes, realizing the conditional law.

    Draw order is fixed (orientation, primaries, [typical sensing], candidate
    secondaries, sensing matrix, data fadings) so a given generator state maps
    to one realization regardless of caller.
    """
    if conditioning is Conditioning.TYPICAL_SECONDARY_PAIR:
        return _build_secondary_conditioned(params, window, kind, rng, max_attempts)

    threshold = required_threshold(kind, params)
    typical_pt = typical_pr = None
    if conditioning is Conditioning.TYPICAL_PRIMARY_PAIR:
        typical_pr = np.zeros(2)
        typical_pt = params.d_p * _unit_vector(rng)

    pts, prs = _draw_primaries(params, window, rng)
    sts, srs = _draw_secondaries(params, window, rng)

    if kind in (ProtocolKind.PRA, ProtocolKind.ERR):
        sources = _stack_sources(typical_pr, prs.xy)
    else:
        sources = _stack_sources(typical_pt, pts.xy)

    sensing = None
    if kind in (ProtocolKind.PRA, ProtocolKind.PTA):
        sensing = rng.exponential(size=(sts.n, sources.shape[0]))
    flags = _flags_from_geometry(kind, sts.xy, sources, sensing, threshold,
                                 params.P_p, params.alpha)

    data = None
    if conditioning is Conditioning.TYPICAL_PRIMARY_PAIR:
        link = float(rng.exponential())
        from_pts = rng.exponential(size=pts.n)
        if kind is ProtocolKind.PRA:
            # Reciprocity: the fading each ST sensed from the typical PR's
            # beacon (source row 0) is the fading of its interference onto
            # that same PR.
            from_sts = sensing[:, 0] if sts.n else np.empty(0)
        else:
            from_sts = rng.exponential(size=sts.n)
        data = DataFadings(link, from_pts, from_sts)

    return NetworkRealization(
        kind=kind, conditioning=conditioning, window=window,
        active_pts=pts, active_prs=prs, candidate_sts=sts, paired_srs=srs,
        st_active_flags=flags, sensing_sources=sources, sensing_fadings=sensing,
        typical_pt=typical_pt, typical_pr=typical_pr, data_fadings=data,
    )


def _build_secondary_conditioned(params: SystemParams, window: SimWindow,
                                 kind: ProtocolKind, rng: np.random.Generator,
                                 max_attempts: int | None) -> NetworkRealization:
    if kind is ProtocolKind.NONE_ACTIVE:
        raise RejectionCapError(
            "typical ST can never be active under NONE_ACTIVE conditioning"
        )
    if max_attempts is None:
        max_attempts = DEFAULT_REJECTION_CAP
    threshold = required_threshold(kind, params)
    typical_sr = np.zeros(2)

    for attempt in range(max_attempts):
        typical_st = params.d_s * _unit_vector(rng)
        pts, prs = _draw_primaries(params, window, rng)
        if kind in (ProtocolKind.PRA, ProtocolKind.ERR):
            sources = prs.xy
        else:
            sources = pts.xy

        typ_sensing = None
        if kind in (ProtocolKind.PRA, ProtocolKind.PTA):
            typ_sensing = rng.exponential(size=sources.shape[0])
            typ_flag = _flags_from_geometry(kind, typical_st[None, :], sources,
                                            typ_sensing[None, :], threshold,
                                            params.P_p, params.alpha)[0]
        else:
            typ_flag = _flags_from_geometry(kind, typical_st[None, :], sources,
                                            None, threshold, params.P_p,
                                            params.alpha)[0]
        if not typ_flag:
            continue

        # Accepted: only now draw the rest; candidates are conditionally
        # independent of the acceptance event given the primaries.
        sts, srs = _draw_secondaries(params, window, rng)
        sensing = None
        if kind in (ProtocolKind.PRA, ProtocolKind.PTA):
            sensing = rng.exponential(size=(sts.n, sources.shape[0]))
        flags = _flags_from_geometry(kind, sts.xy, sources, sensing, threshold,
                                     params.P_p, params.alpha)
        data = DataFadings(
            link=float(rng.exponential()),
            from_active_pts=rng.exponential(size=pts.n),
            from_candidate_sts=rng.exponential(size=sts.n),
        )
        return NetworkRealization(
            kind=kind, conditioning=Conditioning.TYPICAL_SECONDARY_PAIR,
            window=window, active_pts=pts, active_prs=prs, candidate_sts=sts,
            paired_srs=srs, st_active_flags=flags, sensing_sources=sources,
            sensing_fadings=sensing, typical_st=typical_st, typical_sr=typical_sr,
            typical_st_sensing=typ_sensing, typical_st_active=True,
            data_fadings=data, rejected_attempts=attempt,
        )

    raise RejectionCapError(
        f"no accepted realization in {max_attempts} attempts; "
        "the activation probability is too small for rejection conditioning"
    )
