from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np


class Method(str, Enum):
    NONE = "none"
    LASSO = "lasso"
    WL = "wl"
    PAL_STR = "pal_str"
    PAL_RTS = "pal_rts"
    WPAL = "wpal"
    BETA_FBMP = "beta_fbmp"
    ORACLE_LS = "oracle_ls"
    ORACLE_PHASE = "oracle_phase"


@dataclass
class RecoveryEstimate:
    """Receiver-side estimate of the clipping signal.

    ``diagnostics`` carries solver details (iterations, objective history,
    convergence flag, weights) and is free-form.
    """

    c_hat: np.ndarray
    method: Method = Method.NONE
    diagnostics: dict = field(default_factory=dict)

    @property
    def support_hat(self) -> np.ndarray:
        return np.flatnonzero(self.c_hat)

    @classmethod
    def zero(cls, n: int, method: Method = Method.NONE) -> "RecoveryEstimate":
        return cls(np.zeros(n, dtype=complex), method)
