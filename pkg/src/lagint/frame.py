"""Atoms of one molecular structure."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass(frozen=True, eq=False)
class MolecularFrame:
    """Atoms of one structure: centers, radii and residue labels.

    ``solvent`` marks explicit solvent atoms (absent in solute-only frames).
    """

    centers: np.ndarray
    radii: np.ndarray
    labels: Optional[np.ndarray] = None
    solvent: Optional[np.ndarray] = None
    elements: Optional[tuple] = None
    names: Optional[tuple] = None
    index: int = 0

    @property
    def weights(self) -> np.ndarray:
        return self.radii ** 2

    def __len__(self) -> int:
        return len(self.centers)

    def solute(self) -> "MolecularFrame":
        """The frame without its solvent atoms."""
        if self.solvent is None or not self.solvent.any():
            return self
        keep = ~self.solvent
        sub = lambda x: None if x is None else tuple(np.asarray(x, dtype=object)[keep])
        return MolecularFrame(
            self.centers[keep], self.radii[keep],
            None if self.labels is None else self.labels[keep], None,
            sub(self.elements), sub(self.names), self.index,
        )
