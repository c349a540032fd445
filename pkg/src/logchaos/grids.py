"""Regular grids on a box and decreasing scale ladders.

Fields are sampled at cell centers of a regular grid on [0, length]^d,
d in {1, 2}. Measures assign cell masses at the same centers, so the
Lebesgue weight of every cell is h^d with h = length / n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

Array = np.ndarray


@dataclass(frozen=True)
class GridSpec:
    """Regular grid of cell centers on [0, length]^d with an inner margin.

    Parameters
    ----------
    d : int
        Ambient dimension, 1 or 2.
    n : int
        Points per axis; the grid has n**d cells.
    length : float
        Side length of the box.
    margin : float
        Width of the boundary collar excluded from the inner region.
        Mollified quantities are only evaluated on the inner region, so
        any mollifier scale must stay <= margin.
    """

    d: int
    n: int
    length: float = 1.0
    margin: float = 0.125

    def __post_init__(self) -> None:
        if self.d not in (1, 2):
            raise ValueError(f"d must be 1 or 2, got {self.d}")
        if self.n < 4:
            raise ValueError(f"n must be at least 4, got {self.n}")
        if not self.length > 0:
            raise ValueError(f"length must be positive, got {self.length}")
        if not 0 < self.margin < self.length / 2:
            raise ValueError(
                f"margin must lie in (0, length/2), got {self.margin}"
            )

    @property
    def h(self) -> float:
        return self.length / self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def axis(self) -> Array:
        """Cell centers along one axis, shape (n,)."""
        return (np.arange(self.n) + 0.5) * self.h

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.d

    def points(self) -> Array:
        """All cell centers, shape (n**d, d), row-major over axes."""
        ax = self.axis
        if self.d == 1:
            return ax[:, None]
        xx, yy = np.meshgrid(ax, ax, indexing="ij")
        return np.column_stack([xx.ravel(), yy.ravel()])

    def inner_slice(self) -> slice:
        """Index slice of the inner region along one axis."""
        ax = self.axis
        ok = (ax >= self.margin) & (ax <= self.length - self.margin)
        idx = np.nonzero(ok)[0]
        if idx.size == 0:
            raise ValueError("margin leaves no inner points")
        return slice(int(idx[0]), int(idx[-1]) + 1)

    def inner_axis(self) -> Array:
        return self.axis[self.inner_slice()]

    def offset_steps(self, offset: float, scale: float = 1.0) -> int:
        """Grid steps for the displacement scale*offset; must be exact.

        Raises ValueError when scale*offset is not a multiple of h, so
        shifted field values would fall between grid points.
        """
        steps = scale * offset / self.h
        rounded = round(steps)
        if abs(steps - rounded) > 1e-9:
            raise ValueError(
                f"offset {offset} at scale {scale} is not grid-aligned "
                f"(h = {self.h})"
            )
        return int(rounded)


@dataclass(frozen=True)
class ScaleLadder:
    """Strictly decreasing cut-off scales in (0, 1).

    The cut-off field is sampled jointly at every rung; rung j+1 refines
    rung j by an independent stationary increment.
    """

    scales: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        s = tuple(float(e) for e in self.scales)
        if len(s) == 0:
            raise ValueError("ladder needs at least one scale")
        if any(not 0 < e < 1 for e in s):
            raise ValueError(f"scales must lie in (0, 1), got {s}")
        if any(b >= a for a, b in zip(s, s[1:])):
            raise ValueError(f"scales must be strictly decreasing, got {s}")
        object.__setattr__(self, "scales", s)

    @classmethod
    def dyadic(cls, eps0: float, levels: int) -> "ScaleLadder":
        """Ladder eps0 * 2**-j for j = 0 .. levels-1."""
        if levels < 1:
            raise ValueError("levels must be >= 1")
        return cls(tuple(eps0 * 2.0**-j for j in range(levels)))

    def __len__(self) -> int:
        return len(self.scales)

    @property
    def finest(self) -> float:
        return self.scales[-1]

    def index_of(self, eps: float) -> int:
        for j, e in enumerate(self.scales):
            if abs(e - eps) <= 1e-12 * max(e, eps):
                return j
        raise ValueError(f"scale {eps} is not on the ladder {self.scales}")

    def require_resolvable(self, grid: GridSpec) -> None:
        # finest scale must span at least two cells, else the cut-off
        # structure is invisible on the grid
        if self.finest < 2 * grid.h:
            raise ValueError(
                f"finest scale {self.finest} under-resolves the grid "
                f"(need >= 2h = {2 * grid.h})"
            )
