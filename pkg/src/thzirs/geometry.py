"""3D placement, link angles, IRS element grids and near/far field classification."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateGeometryError

# Panel plane -> the two coordinate axes spanned by the element grid.
_PLANE_AXES = {"xy": (0, 1), "xz": (0, 2), "yz": (1, 2)}


@dataclass(frozen=True)
class Point3:
    x: float
    y: float
    z: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.x, self.y, self.z)):
            raise ValueError(f"non-finite coordinates: {self}")

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)

    @classmethod
    def from_array(cls, a) -> "Point3":
        return cls(float(a[0]), float(a[1]), float(a[2]))


@dataclass(frozen=True)
class LinkAngles:
    """Elevation from the +z axis in [0, pi] and azimuth in [0, 2pi)."""

    elevation: float
    azimuth: float


@dataclass(frozen=True)
class IrsPanel:
    """A rectangular Mx x My grid of square elements, densely packed.

    ``plane`` selects the two axes the grid spans; the default ``"xy"`` lays the
    panel horizontally so its boresight is +z.
    """

    center: Point3
    mx: int
    my: int
    element_side: float
    plane: str = "xy"

    def __post_init__(self):
        if self.mx < 1 or self.my < 1:
            raise ValueError("panel needs at least one element per axis")
        if not self.element_side > 0:
            raise ValueError("element_side must be positive")
        if self.plane not in _PLANE_AXES:
            raise ValueError(f"plane must be one of {sorted(_PLANE_AXES)}")

    @property
    def num_elements(self) -> int:
        return self.mx * self.my

    @property
    def element_area(self) -> float:
        return self.element_side**2

    @property
    def extent(self) -> tuple[float, float]:
        """Physical side lengths of the panel (element count times side)."""
        return self.mx * self.element_side, self.my * self.element_side

    @property
    def aperture(self) -> float:
        """Largest side length, used as the aperture D in the Rayleigh distance."""
        return max(self.extent)


@dataclass(frozen=True)
class Topology:
    transmitters: tuple[Point3, ...]
    receivers: tuple[Point3, ...]
    irs_panels: tuple[IrsPanel, ...]
    _grids: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "transmitters", tuple(self.transmitters))
        object.__setattr__(self, "receivers", tuple(self.receivers))
        object.__setattr__(self, "irs_panels", tuple(self.irs_panels))
        if not (self.transmitters and self.receivers and self.irs_panels):
            raise ValueError("topology needs K >= 1, L >= 1 and N >= 1")

    @property
    def num_tx(self) -> int:
        return len(self.transmitters)

    @property
    def num_rx(self) -> int:
        return len(self.receivers)

    @property
    def num_irs(self) -> int:
        return len(self.irs_panels)

    def grid(self, n: int) -> np.ndarray:
        """Cached element positions of panel ``n``."""
        if n not in self._grids:
            self._grids[n] = element_grid(self.irs_panels[n])
        return self._grids[n]


def distance(a: Point3, b: Point3) -> float:
    return math.dist((a.x, a.y, a.z), (b.x, b.y, b.z))


def element_grid(panel: IrsPanel) -> np.ndarray:
    """Element centre positions, shape (M, 3), row-major over (mx, my)."""
    s = panel.element_side
    u = (np.arange(panel.mx) - (panel.mx - 1) / 2.0) * s
    v = (np.arange(panel.my) - (panel.my - 1) / 2.0) * s
    uu, vv = np.meshgrid(u, v, indexing="ij")
    pts = np.tile(panel.center.as_array(), (panel.num_elements, 1))
    a, b = _PLANE_AXES[panel.plane]
    pts[:, a] += uu.ravel()
    pts[:, b] += vv.ravel()
    return pts


def link_geometry(origin, elements: np.ndarray):
    """Distances, elevations and azimuths of ``origin - element`` for every element.

    Vectorised form of :func:`link_angles`; ``origin`` is a Point3 or length-3 array.
    """
    o = origin.as_array() if isinstance(origin, Point3) else np.asarray(origin, float)
    r = o[None, :] - np.atleast_2d(elements)
    d = np.sqrt(np.einsum("ij,ij->i", r, r))
    if np.any(d == 0.0):
        raise DegenerateGeometryError("node coincides with an IRS element")
    elevation = np.arccos(np.clip(r[:, 2] / d, -1.0, 1.0))
    azimuth = np.mod(np.arctan2(r[:, 1], r[:, 0]), 2 * np.pi)
    return d, elevation, azimuth


def link_angles(origin: Point3, element: Point3) -> LinkAngles:
    _, psi, phi = link_geometry(origin, element.as_array())
    return LinkAngles(float(psi[0]), float(phi[0]))


def rayleigh_distance(aperture: float, wavelength: float) -> float:
    if aperture <= 0 or wavelength <= 0:
        raise ValueError("aperture and wavelength must be positive")
    return 2.0 * aperture**2 / wavelength


class FieldRegion(enum.Enum):
    NEAR = "near"
    FAR = "far"


def field_region(d: float, d_ray: float) -> FieldRegion:
    # Near is strictly d < d_ray; the boundary itself counts as far field.
    if d <= 0:
        raise ValueError("distance must be positive")
    return FieldRegion.NEAR if d < d_ray else FieldRegion.FAR


def points(coords: Sequence[Sequence[float]]) -> tuple[Point3, ...]:
    return tuple(Point3(*map(float, c)) for c in coords)
