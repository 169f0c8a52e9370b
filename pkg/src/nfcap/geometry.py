"""Array geometry, user locations, and exact channel vectors.

The array sits in the xz-plane, centered at the origin, with odd element
counts along both axes so the index sets are symmetric around the center
element. A user at range r and angles (theta, phi) sits at
r*(dir_x, dir_y, dir_z) with dir_x = sin(phi)cos(theta),
dir_y = sin(phi)sin(theta), dir_z = cos(phi); both angles live in the open
interval (0, pi), which keeps the user strictly in front of the array.
"""

from dataclasses import dataclass, field

import numpy as np
from numpy.typing import NDArray

from . import _kernels

SPEED_OF_LIGHT = 299792458.0
"Speed of light in m/s (exact SI value)."


@dataclass(frozen=True)
class ArrayGeometry:
    """Uniform planar (or linear) array in the xz-plane.

    m_x, m_z
        Odd element counts along x and z.
    pitch_d
        Center-to-center element spacing in meters, shared by both axes.
    element_side
        Side length sqrt(A) of the square element in meters. Defaults to
        wavelength/sqrt(4*pi), which makes the occupation ratio exactly
        1/pi at half-wavelength pitch.
    wavelength
        Carrier wavelength in meters.
    """

    m_x: int
    m_z: int
    pitch_d: float
    wavelength: float
    element_side: float = field(default=0.0)

    def __post_init__(self) -> None:
        for name, m in (("m_x", self.m_x), ("m_z", self.m_z)):
            if not isinstance(m, (int, np.integer)) or m < 1:
                raise ValueError(f"{name} must be a positive integer, got {m!r}")
            if m % 2 == 0:
                raise ValueError(
                    f"{name} must be odd (symmetric index set), got {m}")
        if self.pitch_d <= 0:
            raise ValueError(f"pitch_d must be positive, got {self.pitch_d}")
        if self.wavelength <= 0:
            raise ValueError(f"wavelength must be positive, got {self.wavelength}")
        if self.element_side == 0.0:
            object.__setattr__(self, "element_side",
                               self.wavelength / np.sqrt(4 * np.pi))
        if self.element_side <= 0:
            raise ValueError(
                f"element_side must be positive, got {self.element_side}")
        if self.pitch_d < self.element_side:
            raise ValueError(
                f"elements overlap: pitch_d {self.pitch_d} < element side "
                f"{self.element_side}")

    @classmethod
    def from_frequency(cls, m_x: int, m_z: int, frequency_hz: float,
                       pitch_d: float | None = None,
                       element_side: float | None = None) -> "ArrayGeometry":
        "Build from carrier frequency; pitch defaults to half a wavelength."
        if frequency_hz <= 0:
            raise ValueError(f"frequency must be positive, got {frequency_hz}")
        lam = SPEED_OF_LIGHT / frequency_hz
        return cls(m_x=m_x, m_z=m_z,
                   pitch_d=lam / 2 if pitch_d is None else pitch_d,
                   wavelength=lam,
                   element_side=0.0 if element_side is None else element_side)

    @property
    def m_total(self) -> int:
        "Total element count M."
        return self.m_x * self.m_z

    @property
    def element_area(self) -> float:
        "Element aperture A in m^2."
        return self.element_side**2

    @property
    def occupation_ratio(self) -> float:
        "A/d^2, the fraction of the aperture plate occupied by elements."
        return (self.element_side / self.pitch_d) ** 2


@dataclass(frozen=True)
class UserLocation:
    """Single-antenna user position in range/angle form.

    Direction cosines are cached at construction: dir_x along the array's
    x axis, dir_y boresight, dir_z along the z axis.
    """

    range_r: float
    azimuth_theta: float
    elevation_phi: float
    dir_x: float = field(init=False)
    dir_y: float = field(init=False)
    dir_z: float = field(init=False)

    def __post_init__(self) -> None:
        if self.range_r <= 0:
            raise ValueError(f"range_r must be positive, got {self.range_r}")
        for name, ang in (("azimuth_theta", self.azimuth_theta),
                          ("elevation_phi", self.elevation_phi)):
            if not 0.0 < ang < np.pi:
                raise ValueError(
                    f"{name} must lie in the open interval (0, pi), got {ang}")
        sp = np.sin(self.elevation_phi)
        object.__setattr__(self, "dir_x", sp * np.cos(self.azimuth_theta))
        object.__setattr__(self, "dir_y", sp * np.sin(self.azimuth_theta))
        object.__setattr__(self, "dir_z", np.cos(self.elevation_phi))
        if self.dir_y <= 1e-9:
            raise ValueError(
                "user lies in (or too close to) the array plane: "
                f"sin(phi)*sin(theta) = {self.dir_y:.3e} <= 1e-9")
        unit = self.dir_x**2 + self.dir_y**2 + self.dir_z**2
        if abs(unit - 1.0) > 1e-12:
            raise ValueError(f"direction cosines not unit length: {unit!r}")

    @property
    def position(self) -> NDArray[np.float64]:
        "Cartesian position vector."
        return self.range_r * np.array([self.dir_x, self.dir_y, self.dir_z])


@dataclass(frozen=True)
class ChannelVector:
    """Complex channel coefficients, one per element.

    Entries are flattened row-major with the z index fastest: entry i
    belongs to offsets (ix, iz) = (i // m_z - (m_x-1)/2, i % m_z - (m_z-1)/2).
    """

    entries: NDArray[np.complex128]
    model_tag: str

    def __post_init__(self) -> None:
        if self.model_tag not in ("NF", "FF"):
            raise ValueError(f"model_tag must be NF or FF, got {self.model_tag!r}")
        if not np.all(np.isfinite(self.entries)):
            raise ValueError("channel entries must be finite")

    def __len__(self) -> int:
        return len(self.entries)


def epsilon(geom: ArrayGeometry, u: UserLocation) -> float:
    "Pitch-to-range ratio d/r; rejects users closer than one pitch."
    eps = geom.pitch_d / u.range_r
    if eps >= 1.0:
        raise ValueError(
            f"user range {u.range_r} m is below the array pitch "
            f"{geom.pitch_d} m (d/r = {eps:.3f} >= 1)")
    return eps


def element_distance(geom: ArrayGeometry, u: UserLocation,
                     mx: int, mz: int) -> float:
    "Exact distance from the (mx, mz) element to the user, in meters."
    half_x = (geom.m_x - 1) // 2
    half_z = (geom.m_z - 1) // 2
    if not -half_x <= mx <= half_x:
        raise IndexError(f"mx = {mx} outside [-{half_x}, {half_x}]")
    if not -half_z <= mz <= half_z:
        raise IndexError(f"mz = {mz} outside [-{half_z}, {half_z}]")
    eps = epsilon(geom, u)
    q = (mx * mx + mz * mz) * eps * eps \
        - 2 * mx * eps * u.dir_x - 2 * mz * eps * u.dir_z + 1.0
    return u.range_r * np.sqrt(q)


def _all_distances(geom: ArrayGeometry, u: UserLocation) -> NDArray[np.float64]:
    eps = epsilon(geom, u)
    return _kernels.element_distances(geom.m_x, geom.m_z, u.range_r, eps,
                                      u.dir_x, u.dir_z)


def nf_channel_vector(geom: ArrayGeometry, u: UserLocation) -> ChannelVector:
    """Spherical-wave channel: per-element distance in amplitude and phase.

    Entry (mx, mz) is sqrt(A*r*dir_y/(4*pi*d_mx,mz^3)) * exp(-j*2*pi*d/lambda),
    the projected-aperture free-space coefficient.
    """
    dists = _all_distances(geom, u)
    amp_num = geom.element_area * u.range_r * u.dir_y / (4 * np.pi)
    return ChannelVector(
        entries=_kernels.nf_entries(dists, amp_num, geom.wavelength),
        model_tag="NF")


def ff_channel_vector(geom: ArrayGeometry, u: UserLocation) -> ChannelVector:
    "Planar-wave channel: index-free magnitude, linear phase ramp."
    eps = epsilon(geom, u)
    ix = np.arange(geom.m_x) - (geom.m_x - 1) // 2
    iz = np.arange(geom.m_z) - (geom.m_z - 1) // 2
    X, Z = np.meshgrid(ix, iz, indexing="ij")
    amp = np.sqrt(geom.element_area * u.dir_y / (4 * np.pi * u.range_r**2))
    phase = -2 * np.pi / geom.wavelength * u.range_r * (
        1.0 - X * eps * u.dir_x - Z * eps * u.dir_z)
    return ChannelVector(entries=(amp * np.exp(1j * phase)).ravel(),
                         model_tag="FF")


def green_amplitude_ratio(distance: float, wavelength: float) -> float:
    """Relative amplitude of the full free-space field versus its 1/r term.

    1 - 1/(k0 rho)^2 + 1/(k0 rho)^4 with k0 = 2*pi/wavelength; approaching 1
    from below beyond a few wavelengths, which justifies keeping only the
    radiating term.
    """
    if distance <= 0:
        raise ValueError(f"distance must be positive, got {distance}")
    if wavelength <= 0:
        raise ValueError(f"wavelength must be positive, got {wavelength}")
    kr = 2 * np.pi / wavelength * distance
    return 1.0 - 1.0 / kr**2 + 1.0 / kr**4
