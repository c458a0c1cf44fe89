"""
Truncated single-mode Fock space model.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from src.core.utils.error_handling import ValidationError

MIN_CUTOFF = 2


@dataclass(frozen=True)
class ModeSpace:
    """Fock space spanned by |0> ... |cutoff-1>."""

    cutoff: int

    def __post_init__(self):
        try:
            cutoff: Optional[int] = int(self.cutoff)
        except (TypeError, ValueError):
            cutoff = None
        if cutoff is None or cutoff != self.cutoff or cutoff < MIN_CUTOFF:
            raise ValidationError(
                f"Fock cutoff must be an integer >= {MIN_CUTOFF}", field="cutoff", value=self.cutoff
            )
        # integral floats such as 3.0 are stored as int
        object.__setattr__(self, "cutoff", cutoff)

    @property
    def dimension(self) -> int:
        return self.cutoff

    def basis_state(self, k: int) -> np.ndarray:
        """Number state |k> as a complex column vector."""
        if not 0 <= k < self.cutoff:
            raise ValidationError(f"Basis index {k} outside [0, {self.cutoff})", field="k", value=k)
        state = np.zeros(self.cutoff, dtype=complex)
        state[k] = 1.0
        return state
