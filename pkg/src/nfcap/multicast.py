"""Multicast capacity: a single data stream beamformed to every user at
once, so the rate is set by the weakest link.

For two users the optimal beamformer and the capacity have closed
forms with a three-way case split: when one user is weak enough the
beam points straight at that user, otherwise the beam balances both
users inside their channel span. Routines here also cover min-rate
evaluation for arbitrary beamformers, the K-user capacity upper bound,
and large-array limits.

Noise arguments are variances throughout, written sigma1, sigma2 with
the squared symbol dropped from the names.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import ArrayGeometry, ChannelVector, UserLocation
from .stats import asymptotic_nf_gain, asymptotic_ula_gain

__all__ = [
    "Beamformer",
    "McFfAsymptote",
    "mc_rate_given_beamformer",
    "mc_beamformer_two_user",
    "mc_capacity_two_user",
    "mc_upper_bound",
    "mc_asymptotics",
]


@dataclass(frozen=True)
class Beamformer:
    """Unit-norm complex beamforming vector."""

    weights: np.ndarray

    def __post_init__(self) -> None:
        arr = np.asarray(self.weights, dtype=np.complex128).ravel()
        if arr.size == 0:
            raise ValueError("weights must not be empty")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-12:
            raise ValueError(f"beamformer norm must be 1 within 1e-12, got {norm!r}")
        object.__setattr__(self, "weights", arr)

    def __len__(self) -> int:
        return int(self.weights.size)


def _as_vector(ch: ChannelVector | np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(ch.entries if isinstance(ch, ChannelVector) else ch)
    vec = vec.astype(np.complex128).ravel()
    if vec.size == 0:
        raise ValueError(f"{name} must not be empty")
    return vec


def _check_noise(name: str, value: float) -> float:
    if not math.isfinite(value) or value <= 0.0:
        raise ValueError(f"{name} must be a positive noise variance, got {value}")
    return float(value)


def mc_rate_given_beamformer(
    w: Beamformer,
    channels: Sequence[ChannelVector | np.ndarray],
    noise_vars: Sequence[float],
    P: float,
) -> float:
    """Multicast rate of a fixed unit-norm beam: the common stream must
    be decodable by every user, so

        R = log2(1 + P * min_k |h_k^H w|^2 / var_k).
    """
    if P < 0.0 or not math.isfinite(P):
        raise ValueError(f"P must be finite and nonnegative, got {P}")
    if len(channels) == 0 or len(channels) != len(noise_vars):
        raise ValueError("channels and noise_vars must be equal-length and nonempty")
    weights = w.weights
    worst = math.inf
    for k, (ch, var) in enumerate(zip(channels, noise_vars)):
        vec = _as_vector(ch, f"channels[{k}]")
        if vec.size != weights.size:
            raise ValueError(
                f"channels[{k}] has {vec.size} entries, beamformer has {weights.size}"
            )
        var = _check_noise(f"noise_vars[{k}]", var)
        worst = min(worst, abs(np.vdot(vec, weights)) ** 2 / var)
    return math.log2(1.0 + P * worst)


def _mc_case_split(
    g1: float, g2: float, rho: float, var1: float, var2: float
) -> tuple[int, float, float, float]:
    """Resolve the three-branch optimum.

    Returns (branch, eta, mu1, mu2) where branch 1 or 2 means a pure
    matched beam to that user and branch 3 the balanced interior
    solution with effective gain eta = g1 g2 (1 - rho) / chi.
    """
    a = g1 / var1
    b = g2 / var2
    if a <= rho * b:
        return 1, a, 1.0, 0.0
    if b <= rho * a:
        return 2, b, 0.0, 1.0
    s1 = math.sqrt(var1)
    s2 = math.sqrt(var2)
    root = s1 * s2 * math.sqrt(g1 * g2 * rho)
    chi = var2 * g1 + var1 * g2 - 2.0 * root
    eta = g1 * g2 * (1.0 - rho) / chi
    mu1 = (var1 * g2 - root) / chi
    mu2 = (var2 * g1 - root) / chi
    return 3, eta, mu1, mu2


def mc_beamformer_two_user(
    h1: ChannelVector | np.ndarray,
    h2: ChannelVector | np.ndarray,
    sigma1: float,
    sigma2: float,
) -> Beamformer:
    """Capacity-achieving multicast beam for two users.

    When one noise-weighted gain is dominated (g1/var1 <= rho g2/var2
    or the mirror), the beam is the matched filter of the dominated
    user. Otherwise the optimum lies in span{h1, h2}:

        w = (mu1 / (s1 sqrt(eta))) h1 + (mu2 / (s2 sqrt(eta))) e^{-j angle(h1^H h2)} h2

    with s_k the noise standard deviations, weights mu1 + mu2 = 1, and
    eta chosen so that both users see the same rate and the norm is 1.
    """
    var1 = _check_noise("sigma1", sigma1)
    var2 = _check_noise("sigma2", sigma2)
    v1 = _as_vector(h1, "h1")
    v2 = _as_vector(h2, "h2")
    if v1.size != v2.size:
        raise ValueError(f"channel sizes differ: {v1.size} vs {v2.size}")
    g1 = float(np.vdot(v1, v1).real)
    g2 = float(np.vdot(v2, v2).real)
    if g1 <= 0.0 or g2 <= 0.0:
        raise ValueError("both channels must be nonzero")
    ip = complex(np.vdot(v1, v2))
    rho = min(abs(ip) ** 2 / (g1 * g2), 1.0)
    branch, eta, mu1, mu2 = _mc_case_split(g1, g2, rho, var1, var2)
    if branch == 1:
        weights = v1 / math.sqrt(g1)
    elif branch == 2:
        weights = v2 / math.sqrt(g2)
    else:
        phase = np.exp(-1j * np.angle(ip))
        s1 = math.sqrt(var1)
        s2 = math.sqrt(var2)
        scale = math.sqrt(eta)
        weights = (mu1 / (s1 * scale)) * v1 + (mu2 / (s2 * scale)) * phase * v2
        weights = weights / np.linalg.norm(weights)
    return Beamformer(weights)


def mc_capacity_two_user(
    g1: float, g2: float, rho: float, sigma1: float, sigma2: float, P: float
) -> float:
    """Two-user multicast capacity in bits per channel use.

    The three branches mirror the beamformer cases: a dominated user
    pins the rate at its own matched-filter capacity, otherwise

        C = log2(1 + P g1 g2 (1 - rho) / chi),
        chi = var2 g1 + var1 g2 - 2 s1 s2 sqrt(g1 g2 rho).
    """
    for name, val in (("g1", g1), ("g2", g2)):
        if not math.isfinite(val) or val < 0.0:
            raise ValueError(f"{name} must be finite and nonnegative, got {val}")
    if not (-1e-12 <= rho <= 1.0 + 1e-12):
        raise ValueError(f"correlation rho must lie in [0, 1], got {rho}")
    if P < 0.0 or not math.isfinite(P):
        raise ValueError(f"P must be finite and nonnegative, got {P}")
    var1 = _check_noise("sigma1", sigma1)
    var2 = _check_noise("sigma2", sigma2)
    rho = min(max(rho, 0.0), 1.0)
    if g1 <= 0.0 or g2 <= 0.0:
        return 0.0
    _, eta, _, _ = _mc_case_split(g1, g2, rho, var1, var2)
    return math.log2(1.0 + P * eta)


def mc_upper_bound(
    gains: Sequence[float], noise_vars: Sequence[float], P: float
) -> float:
    """Capacity upper bound for K-user multicast.

    Averaging the K single-user mutual informations bounds the common
    rate: C <= log2(1 + (P / K) sum_k g_k / var_k).
    """
    if len(gains) == 0 or len(gains) != len(noise_vars):
        raise ValueError("gains and noise_vars must be equal-length and nonempty")
    if P < 0.0 or not math.isfinite(P):
        raise ValueError(f"P must be finite and nonnegative, got {P}")
    total = 0.0
    for k, (g, var) in enumerate(zip(gains, noise_vars)):
        if not math.isfinite(g) or g < 0.0:
            raise ValueError(f"gains[{k}] must be finite and nonnegative, got {g}")
        var = _check_noise(f"noise_vars[{k}]", var)
        total += g / var
    return math.log2(1.0 + P * total / len(gains))


@dataclass(frozen=True)
class McFfAsymptote:
    """Far-field multicast limit at a given element count.

    ``static`` is the co-directional value, ``dynamic`` the
    distinct-direction value, and ``gap`` their difference
    static - dynamic, which lies in (0, 1] bits: same-direction users
    help a multicast beam rather than hurt it.
    """

    static: float
    dynamic: float
    gap: float = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gap", self.static - self.dynamic)


def mc_asymptotics(
    variant: str,
    *,
    xi: float | None = None,
    power: float | None = None,
    noise_vars: Sequence[float] | None = None,
    geom: ArrayGeometry | None = None,
    users: Sequence[UserLocation] | None = None,
    m_total: int | None = None,
) -> float | McFfAsymptote:
    """Large-array multicast capacity limits.

    variant "nf_upa": planar-array gains saturate at xi/2 per user with
    vanishing correlation; evaluates the two-user closed form at those
    gains. Requires ``xi``, ``power``, ``noise_vars``.

    variant "nf_ula": same with direction-dependent linear-array limit
    gains. Requires ``geom``, ``users``, ``power``, ``noise_vars``.

    variant "ff": far-field capacity keeps growing like log M. Returns
    :class:`McFfAsymptote` with static = log2(M P A / (4 pi) * min_k
    proj_k / (r_k^2 var_k)) and dynamic = log2(M P A / (4 pi) /
    (beta_1 + beta_2)), beta_k = r_k^2 var_k / proj_k. Requires
    ``geom``, ``users`` (exactly two), ``power``, ``noise_vars``,
    ``m_total``.
    """
    key = variant.lower()
    if key == "nf_upa":
        if xi is None or power is None or noise_vars is None:
            raise ValueError("variant 'nf_upa' requires xi, power, and noise_vars")
        if len(noise_vars) != 2:
            raise ValueError("variant 'nf_upa' is defined for exactly two users")
        limit_gain = asymptotic_nf_gain(xi)
        return mc_capacity_two_user(
            limit_gain, limit_gain, 0.0, noise_vars[0], noise_vars[1], power
        )
    if key == "nf_ula":
        if geom is None or users is None or power is None or noise_vars is None:
            raise ValueError(
                "variant 'nf_ula' requires geom, users, power, and noise_vars"
            )
        if len(users) != 2 or len(noise_vars) != 2:
            raise ValueError("variant 'nf_ula' is defined for exactly two users")
        lim1 = asymptotic_ula_gain(geom, users[0])
        lim2 = asymptotic_ula_gain(geom, users[1])
        return mc_capacity_two_user(
            lim1, lim2, 0.0, noise_vars[0], noise_vars[1], power
        )
    if key == "ff":
        if (
            geom is None
            or users is None
            or power is None
            or noise_vars is None
            or m_total is None
        ):
            raise ValueError(
                "variant 'ff' requires geom, users, power, noise_vars, and m_total"
            )
        if len(users) != 2 or len(noise_vars) != 2:
            raise ValueError("variant 'ff' is defined for exactly two users")
        if m_total <= 0:
            raise ValueError(f"m_total must be positive, got {m_total}")
        q = m_total * power * geom.element_area / (4.0 * math.pi)
        betas = [
            u.range_r**2 * _check_noise(f"noise_vars[{k}]", var) / u.dir_y
            for k, (u, var) in enumerate(zip(users, noise_vars))
        ]
        b1, b2 = betas
        return McFfAsymptote(
            static=math.log2(q / max(b1, b2)),
            dynamic=math.log2(q / (b1 + b2)),
        )
    raise ValueError(
        f"variant must be 'nf_upa', 'nf_ula', or 'ff', got {variant!r}"
    )
