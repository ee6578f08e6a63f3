"""Gauss-Legendre panels on subintervals of [0, 1]."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class QuadratureRule:
    """``nodes`` Gauss-Legendre points per panel, affinely mapped to each panel."""

    nodes: int = 32
    unit_nodes: np.ndarray = field(init=False, repr=False, compare=False)
    unit_weights: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if int(self.nodes) != self.nodes or self.nodes < 2:
            raise ValueError(f"need at least 2 nodes per panel, got {self.nodes!r}")
        t, w = np.polynomial.legendre.leggauss(int(self.nodes))
        x = 0.5 * (t + 1.0)
        w = 0.5 * w
        x.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "unit_nodes", x)
        object.__setattr__(self, "unit_weights", w)

    def panel(self, lo: float, hi: float):
        """Nodes and weights for the interval [lo, hi]."""
        h = hi - lo
        return lo + h * self.unit_nodes, h * self.unit_weights

    def integrate(self, f, lo: float = 0.0, hi: float = 1.0):
        """Integrate a vectorised ``f`` over [lo, hi] on one panel.

        ``f`` maps the node vector to values whose *last* axis runs over
        nodes; the result drops that axis.
        """
        x, w = self.panel(lo, hi)
        return np.asarray(f(x)) @ w
