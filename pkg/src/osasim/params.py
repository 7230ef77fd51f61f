"""Scalar model parameters shared by the analytic and simulation layers."""
from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

# Relative tolerance for the mu_p = mu_0 * p_p consistency check.
DENSITY_CONSISTENCY_RTOL = 1e-12


@dataclass(frozen=True)
class SystemParams:
    """All scalar parameters of the overlaid primary/secondary network model.

    The active primary density mu_p can be given directly, or derived from the
    initial PT density mu_0 and the Aloha access probability p_p.  When both
    routes are given they must agree to DENSITY_CONSISTENCY_RTOL relative.

    Thresholds (N_ra, N_ta, D_excl) default to None; evaluators that need one
    raise if it is missing.
    """

    mu_p: float | None = 0.01       # active primary pair density (per area)
    mu_0: float | None = None       # initial PT density before Aloha thinning
    p_p: float | None = None        # Aloha access probability
    lambda_0: float = 0.01          # candidate secondary transmitter density
    P_p: float = 5.0                # primary transmit power
    P_s: float = 2.0                # secondary transmit power
    d_p: float = 1.0                # PT -> PR link distance
    d_s: float = 1.0                # ST -> SR link distance
    theta_p: float = 3.0            # primary SIR target
    theta_s: float = 3.0            # secondary SIR target
    alpha: float = 4.0              # path-loss exponent, > 2
    N_ra: float | None = None       # beacon-power activation threshold
    N_ta: float | None = None       # pilot-power activation threshold
    D_excl: float | None = None     # exclusion radius for ERR/ERT

    def __post_init__(self) -> None:
        if self.mu_p is None:
            if self.mu_0 is None or self.p_p is None:
                raise ValueError("mu_p must be given directly or via mu_0 and p_p")
            object.__setattr__(self, "mu_p", self.mu_0 * self.p_p)
        elif self.mu_0 is not None and self.p_p is not None:
            derived = self.mu_0 * self.p_p
            scale = max(abs(self.mu_p), abs(derived), 1e-300)
            if abs(self.mu_p - derived) > DENSITY_CONSISTENCY_RTOL * scale:
                raise ValueError(
                    f"inconsistent densities: mu_p={self.mu_p} but mu_0*p_p={derived}"
                )
        self._validate()

    def _validate(self) -> None:
        if not self.alpha > 2:
            raise ValueError(f"alpha must exceed 2, got {self.alpha}")
        if self.mu_p < 0 or self.lambda_0 < 0:
            raise ValueError("densities must be nonnegative")
        if self.mu_0 is not None and self.mu_0 < 0:
            raise ValueError("mu_0 must be nonnegative")
        if self.p_p is not None and not 0.0 <= self.p_p <= 1.0:
            raise ValueError(f"p_p must lie in [0, 1], got {self.p_p}")
        if self.P_p <= 0 or self.P_s <= 0:
            raise ValueError("transmit powers must be positive")
        if self.d_p <= 0 or self.d_s <= 0:
            raise ValueError("link distances must be positive")
        if self.theta_p <= 0 or self.theta_s <= 0:
            raise ValueError("SIR targets must be positive")
        for name in ("N_ra", "N_ta", "D_excl"):
            value = getattr(self, name)
            if value is not None and not (value >= 0 or math.isinf(value)):
                raise ValueError(f"{name} must be nonnegative, got {value}")

    def replace(self, **changes) -> "SystemParams":
        """Return a copy with fields changed.

        Setting mu_p directly drops mu_0/p_p (unless also supplied) so the
        consistency check cannot trip on stale values.
        """
        if "mu_p" in changes:
            changes.setdefault("mu_0", None)
            changes.setdefault("p_p", None)
        return dataclasses.replace(self, **changes)

    def require(self, name: str) -> float:
        value = getattr(self, name)
        if value is None:
            raise ValueError(f"parameter {name} is required but not set")
        return value
