"""Rayleigh-fading power-law channel: received power and SIR arithmetic."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """Path-loss law d^(-alpha); alpha must exceed 2 for finite interference."""

    alpha: float = 4.0

    def __post_init__(self) -> None:
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")


@dataclass(frozen=True)
class FadingDraw:
    """One unit-mean exponential power-fading coefficient."""

    h: float

    def __post_init__(self) -> None:
        if self.h < 0:
            raise ValueError("fading power must be nonnegative")


def sample_fading(rng: np.random.Generator) -> FadingDraw:
    return FadingDraw(float(rng.exponential()))


def sample_fadings(rng: np.random.Generator, shape) -> np.ndarray:
    """Array of i.i.d. Exp(1) fading powers."""
    return rng.exponential(size=shape)


def received_power(P_tx: float, h, d, ch: ChannelParams):
    """P_tx * h * d^(-alpha); rejects d <= 0 (co-located transceivers)."""
    if P_tx < 0:
        raise ValueError("transmit power must be nonnegative")
    if isinstance(h, FadingDraw):
        h = h.h
    d_arr = np.asarray(d, dtype=float)
    if np.any(d_arr <= 0):
        raise ValueError("distance must be positive")
    out = P_tx * np.asarray(h, dtype=float) * d_arr ** (-ch.alpha)
    return float(out) if out.ndim == 0 else out


def sir(signal: float, interference: float) -> float:
    """Signal-to-interference ratio; no noise term.

    Zero interference with positive signal is a perfect channel (returns inf);
    zero signal with zero interference is undefined and rejected.
    """
    if signal < 0 or interference < 0:
        raise ValueError("powers must be nonnegative")
    if interference == 0.0:
        if signal == 0.0:
            raise ValueError("SIR undefined for zero signal and zero interference")
        return math.inf
    return signal / interference
