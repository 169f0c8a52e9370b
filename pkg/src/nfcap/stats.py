"""Channel gains and correlation factors: exact, closed-form, quadrature, FF.

Exact quantities are element sums over real channel vectors and serve as
ground truth. The closed forms trade the sums for integrals (gain) or a
Chebyshev-Gauss rule (CCF) and are what the capacity sweeps run on, since
they stay cheap at apertures where a vector would not even fit in memory.
"""

import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import _kernels
from .geometry import ArrayGeometry, ChannelVector, UserLocation, epsilon


@dataclass(frozen=True)
class LinkStats:
    "Gain pair plus CCF for one two-user link."

    gain_1: float
    gain_2: float
    ccf_rho: float

    def __post_init__(self) -> None:
        if self.gain_1 < 0 or self.gain_2 < 0:
            raise ValueError(
                f"gains must be nonnegative, got {self.gain_1}, {self.gain_2}")
        if not -1e-12 <= self.ccf_rho <= 1 + 1e-12:
            raise ValueError(f"ccf_rho outside [0, 1]: {self.ccf_rho}")


class CcfEstimate(NamedTuple):
    "Quadrature CCF: clamped value plus the raw pre-clamp number."

    value: float
    raw: float


def _entries(h) -> np.ndarray:
    if isinstance(h, ChannelVector):
        return h.entries
    return np.asarray(h)


def gain_exact(h) -> float:
    "Channel gain: squared Euclidean norm of the vector."
    v = _entries(h)
    return float(np.real(np.vdot(v, v)))


def ccf_exact(h1, h2) -> float:
    """Channel correlation factor |h1^H h2|^2 / (|h1|^2 |h2|^2).

    0 for orthogonal channels, 1 for parallel ones.
    """
    v1, v2 = _entries(h1), _entries(h2)
    g1 = float(np.real(np.vdot(v1, v1)))
    g2 = float(np.real(np.vdot(v2, v2)))
    if g1 <= 0 or g2 <= 0:
        raise ValueError("ccf undefined for zero-norm channel vectors")
    return float(abs(np.vdot(v1, v2)) ** 2 / (g1 * g2))


def nf_gain_closed(geom: ArrayGeometry, u: UserLocation) -> float:
    """Closed-form NF gain of a UPA, the four-corner arctangent sum.

    Approximates the element sum by its continuous integral; relative error
    decays with d/r and is far below a percent for arrays observed from a
    few meters.
    """
    eps = epsilon(geom, u)
    psi = u.dir_y
    xs = (geom.m_x * eps / 2 + u.dir_x, geom.m_x * eps / 2 - u.dir_x)
    zs = (geom.m_z * eps / 2 + u.dir_z, geom.m_z * eps / 2 - u.dir_z)
    total = 0.0
    for x in xs:
        for z in zs:
            total += np.arctan(x * z / (psi * np.sqrt(psi**2 + x**2 + z**2)))
    return geom.occupation_ratio / (4 * np.pi) * total


def ff_gain_closed(geom: ArrayGeometry, u: UserLocation) -> float:
    "FF gain M*A*Psi/(4*pi*r^2); exact for planar-wave vectors."
    return geom.m_total * geom.element_area * u.dir_y / (4 * np.pi * u.range_r**2)


def ula_gain_closed(geom: ArrayGeometry, u: UserLocation) -> float:
    "Closed-form NF gain of a vertical ULA (m_x = 1, elements along z)."
    if geom.m_x != 1:
        raise ValueError(
            f"ULA closed form requires m_x = 1, got m_x = {geom.m_x}")
    m = geom.m_z
    eps = epsilon(geom, u)
    ct = np.cos(u.azimuth_theta)
    big_xi = ((m * eps - 2 * ct) / np.sqrt(m**2 * eps**2 - 4 * m * eps * ct + 4)
              + (m * eps + 2 * ct) / np.sqrt(m**2 * eps**2 + 4 * m * eps * ct + 4))
    return (geom.occupation_ratio * eps * np.sin(u.elevation_phi) * big_xi
            / (4 * np.pi * np.sin(u.azimuth_theta)))


def asymptotic_nf_gain(xi: float) -> float:
    "Saturated NF gain xi/2 of an infinite UPA."
    if not 0 < xi <= 1:
        raise ValueError(f"occupation ratio must lie in (0, 1], got {xi}")
    return xi / 2


def asymptotic_ula_gain(geom: ArrayGeometry, u: UserLocation) -> float:
    "Large-M limit of ula_gain_closed (does not require m_x = 1)."
    eps = epsilon(geom, u)
    return (geom.occupation_ratio * eps * np.sin(u.elevation_phi)
            / (2 * np.pi * np.sin(u.azimuth_theta)))


def nf_ccf_quadrature(geom: ArrayGeometry, u1: UserLocation, u2: UserLocation,
                      nodes_T: int = 200) -> CcfEstimate:
    """Chebyshev-Gauss approximation of the NF CCF.

    The double element sum of the inner product is replaced by a T x T node
    rule over the aperture. The raw estimate can exceed 1 by the rule's own
    error (notably for co-located users); the clamped value is what the
    capacity formulas consume.
    """
    if nodes_T < 2:
        raise ValueError(f"nodes_T must be at least 2, got {nodes_T}")
    eps1 = epsilon(geom, u1)
    epsilon(geom, u2)
    r1, r2 = u1.range_r, u2.range_r
    ups = r1 / r2
    t = np.arange(1, nodes_T + 1)
    delta = np.cos((2 * t - 1) * np.pi / (2 * nodes_T))
    w = np.sqrt(1.0 - delta**2)
    x = geom.m_x * eps1 / 2 * delta
    z = geom.m_z * eps1 / 2 * delta
    k0 = 2 * np.pi / geom.wavelength
    s = _kernels.ccf_quadrature_sum(x, z, w, ups, r1, r2, k0,
                                    u1.dir_x, u1.dir_z, u2.dir_x, u2.dir_z)
    m_total = geom.m_total
    area = geom.element_area
    pref = 1.0
    for u, g in ((u1, nf_gain_closed(geom, u1)), (u2, nf_gain_closed(geom, u2))):
        pref *= (np.pi * m_total * area * u.dir_y
                 / (16 * u.range_r**2 * g * nodes_T**2))
    raw = float(pref * abs(s) ** 2)
    return CcfEstimate(value=min(max(raw, 0.0), 1.0), raw=raw)


def ff_ccf_closed(geom: ArrayGeometry, u1: UserLocation, u2: UserLocation) -> float:
    """Closed-form FF CCF, piecewise in the direction-cosine offsets.

    The generic branch is the product of the two per-axis Dirichlet ratios
    over M^2 and matches the exact FF inner product to rounding. The two
    single-axis branches keep their published M^2 denominators, which are
    only consistent with a linear array; when that disagrees with the
    dimensionally consistent per-axis count by more than 1e-6 a warning is
    emitted so the discrepancy is never silent.
    """
    k0d = 2 * np.pi / geom.wavelength * geom.pitch_d
    dphi = k0d * (u1.dir_x - u2.dir_x)
    dome = k0d * (u1.dir_z - u2.dir_z)
    den_x = 1.0 - np.cos(dphi)
    den_z = 1.0 - np.cos(dome)
    x_degenerate = abs(den_x) < 1e-12
    z_degenerate = abs(den_z) < 1e-12
    ratio_x = geom.m_x**2 if x_degenerate else (1.0 - np.cos(geom.m_x * dphi)) / den_x
    ratio_z = geom.m_z**2 if z_degenerate else (1.0 - np.cos(geom.m_z * dome)) / den_z
    m2 = geom.m_total**2
    if x_degenerate and z_degenerate:
        return 1.0
    if z_degenerate:
        printed = ratio_x / m2
        consistent = ratio_x / geom.m_x**2
    elif x_degenerate:
        printed = ratio_z / m2
        consistent = ratio_z / geom.m_z**2
    else:
        return float(ratio_x * ratio_z / m2)
    if abs(printed - consistent) > 1e-6:
        warnings.warn(
            "FF CCF printed branch deviates from the per-axis form by "
            f"{abs(printed - consistent):.3e}; exact-vector ccf_exact is "
            "authoritative here", stacklevel=2)
    return float(printed)
