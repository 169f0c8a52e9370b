"""Downlink (broadcast) capacity through uplink-downlink duality.

The sum capacity of the two-user downlink under a total power budget
equals the capacity of a dual uplink with a joint power constraint. The
optimal dual power split has a closed form. This module provides that
split, the resulting capacity, recovery of the downlink transmit
covariance matrices, region sampling, linear transmit precoders, an
iterative water-filling solver for any number of users, and the
large-array limits.

Scalar two-user routines take channel gains ``g1, g2`` and the squared
correlation ``rho``. Matrix routines take explicit channel vectors and
normalize them by the per-user noise standard deviation internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .geometry import ArrayGeometry, ChannelVector, UserLocation
from .mac import FfAsymptote, RatePoint, RateRegion, sic_rates_two_user
from .stats import asymptotic_nf_gain, asymptotic_ula_gain

__all__ = [
    "BcConfig",
    "PowerAllocation",
    "CovariancePair",
    "ConvergenceError",
    "bc_power_allocation_two_user",
    "bc_capacity_two_user",
    "bc_covariance_recovery",
    "bc_region_two_user",
    "bc_capacity_general",
    "linear_precoder_sum_rate",
    "bc_asymptotics",
]

_LOG2 = math.log(2.0)


@dataclass(frozen=True)
class BcConfig:
    """Total transmit power and per-user noise variances for a downlink.

    ``total_power_P`` is the sum-power budget in linear units.
    ``noise_var_per_user[k]`` is user k's receiver noise variance.
    """

    total_power_P: float
    noise_var_per_user: tuple[float, ...]

    def __post_init__(self) -> None:
        if not math.isfinite(self.total_power_P) or self.total_power_P <= 0.0:
            raise ValueError(
                f"total_power_P must be positive, got {self.total_power_P}"
            )
        if len(self.noise_var_per_user) == 0:
            raise ValueError("noise_var_per_user must not be empty")
        for k, var in enumerate(self.noise_var_per_user):
            if not math.isfinite(var) or var <= 0.0:
                raise ValueError(
                    f"noise_var_per_user[{k}] must be positive, got {var}"
                )
        object.__setattr__(
            self, "noise_var_per_user", tuple(float(v) for v in self.noise_var_per_user)
        )

    @property
    def num_users(self) -> int:
        return len(self.noise_var_per_user)


@dataclass(frozen=True)
class PowerAllocation:
    """Nonnegative per-user powers under a sum budget.

    ``note`` carries solver metadata, such as the fallback applied when
    the channels are fully correlated.
    """

    p_per_user: tuple[float, ...]
    note: str = ""

    def __post_init__(self) -> None:
        for k, p in enumerate(self.p_per_user):
            if not math.isfinite(p) or p < -1e-12:
                raise ValueError(f"p_per_user[{k}] must be nonnegative, got {p}")
        object.__setattr__(
            self,
            "p_per_user",
            tuple(max(0.0, float(p)) for p in self.p_per_user),
        )

    @property
    def total(self) -> float:
        return sum(self.p_per_user)


@dataclass(frozen=True)
class CovariancePair:
    """Rank-one downlink transmit covariance matrices for two users."""

    sigma1: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self) -> None:
        for name, mat in (("sigma1", self.sigma1), ("sigma2", self.sigma2)):
            arr = np.asarray(mat, dtype=np.complex128)
            if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
                raise ValueError(f"{name} must be a square matrix")
            if not np.allclose(arr, arr.conj().T, atol=1e-12 * (1 + np.abs(arr).max())):
                raise ValueError(f"{name} must be Hermitian")
            object.__setattr__(self, name, arr)

    @property
    def total_power(self) -> float:
        return float(np.trace(self.sigma1).real + np.trace(self.sigma2).real)


class ConvergenceError(RuntimeError):
    """Raised when the iterative solver fails to converge.

    Carries the best iterate found so the caller can still inspect or
    reuse it: ``best_bits`` is the highest objective reached and
    ``best_allocation`` the corresponding power split.
    """

    def __init__(self, message: str, best_bits: float, best_allocation: PowerAllocation):
        super().__init__(message)
        self.best_bits = best_bits
        self.best_allocation = best_allocation


def _check_two_user_inputs(
    g1: float, g2: float, rho: float, cfg: BcConfig
) -> tuple[float, float, float, float, float, float]:
    for name, val in (("g1", g1), ("g2", g2)):
        if not math.isfinite(val) or val < 0.0:
            raise ValueError(f"{name} must be finite and nonnegative, got {val}")
    if not (-1e-12 <= rho <= 1.0 + 1e-12):
        raise ValueError(f"correlation rho must lie in [0, 1], got {rho}")
    if cfg.num_users != 2:
        raise ValueError(
            f"two-user routine needs 2 noise variances, got {cfg.num_users}"
        )
    s1, s2 = cfg.noise_var_per_user
    return float(g1), float(g2), min(max(rho, 0.0), 1.0), cfg.total_power_P, s1, s2


def _kappas(
    a: float, b: float, rho: float, power: float
) -> tuple[float, float]:
    one_minus = 1.0 - rho
    k1 = (power * a * b * one_minus - a + b) / (2.0 * a * one_minus)
    k2 = (power * a * b * one_minus + a - b) / (2.0 * b * one_minus)
    return k1, k2


def bc_power_allocation_two_user(
    g1: float, g2: float, rho: float, cfg: BcConfig
) -> PowerAllocation:
    """Optimal dual-uplink power split for the two-user downlink.

    With a = g1/var1 and b = g2/var2, the split is governed by

        kappa1 = (P a b (1 - rho) - a + b) / (2 a (1 - rho))
        kappa2 = (P a b (1 - rho) + a - b) / (2 b (1 - rho))

    kappa1 <= 0 puts all power on user 1, kappa2 <= 0 all on user 2,
    and otherwise the split is (kappa2 / a, kappa1 / b), which always
    sums to P. Fully correlated channels (1 - rho below 1e-9) degenerate
    to a scalar channel; all power then goes to the user with the larger
    noise-weighted gain and the fallback is recorded in ``note``.
    """
    g1, g2, rho, power, s1, s2 = _check_two_user_inputs(g1, g2, rho, cfg)
    a = g1 / s1
    b = g2 / s2
    if a <= 0.0 and b <= 0.0:
        return PowerAllocation((0.0, 0.0), note="both channels vanish")
    if b <= 0.0:
        return PowerAllocation((power, 0.0), note="user 2 channel vanishes")
    if a <= 0.0:
        return PowerAllocation((0.0, power), note="user 1 channel vanishes")
    if 1.0 - rho < 1e-9:
        if a >= b:
            return PowerAllocation(
                (power, 0.0), note="fully correlated channels, single-user fallback"
            )
        return PowerAllocation(
            (0.0, power), note="fully correlated channels, single-user fallback"
        )
    k1, k2 = _kappas(a, b, rho, power)
    if k1 <= 0.0:
        return PowerAllocation((power, 0.0))
    if k2 <= 0.0:
        return PowerAllocation((0.0, power))
    return PowerAllocation((k2 / a, k1 / b))


def bc_capacity_two_user(g1: float, g2: float, rho: float, cfg: BcConfig) -> float:
    """Two-user downlink sum capacity in bits per channel use.

    Piecewise closed form matching the optimal power split: the
    boundary branches give single-user capacities log2(1 + P g_k /
    var_k), the interior branch gives

        C = log2(1 + kappa1 + kappa2 + kappa1 kappa2 (1 - rho)).
    """
    g1, g2, rho, power, s1, s2 = _check_two_user_inputs(g1, g2, rho, cfg)
    a = g1 / s1
    b = g2 / s2
    if a <= 0.0 and b <= 0.0:
        return 0.0
    if b <= 0.0:
        return math.log2(1.0 + power * a)
    if a <= 0.0:
        return math.log2(1.0 + power * b)
    if 1.0 - rho < 1e-9:
        return math.log2(1.0 + power * max(a, b))
    k1, k2 = _kappas(a, b, rho, power)
    if k1 <= 0.0:
        return math.log2(1.0 + power * a)
    if k2 <= 0.0:
        return math.log2(1.0 + power * b)
    return math.log2(1.0 + k1 + k2 + k1 * k2 * (1.0 - rho))


def _as_vector(ch: ChannelVector | np.ndarray, name: str) -> np.ndarray:
    vec = np.asarray(ch.entries if isinstance(ch, ChannelVector) else ch)
    vec = vec.astype(np.complex128).ravel()
    if vec.size == 0:
        raise ValueError(f"{name} must not be empty")
    return vec


def bc_covariance_recovery(
    h1: ChannelVector | np.ndarray,
    h2: ChannelVector | np.ndarray,
    alloc: PowerAllocation,
    cfg: BcConfig,
) -> CovariancePair:
    """Downlink covariance matrices achieving the dual-uplink rates.

    Channels are noise-normalized first. With user 2 encoded without
    knowledge of user 1's signal,

        Lambda  = I - p2 hb2 hb2^H / (1 + p2 g2n)
        Sigma1  = p1 Lambda hb1 hb1^H Lambda / (hb1^H Lambda hb1)
        Sigma2  = p2 (1 + hb2^H Sigma1 hb2) / g2n * hb2 hb2^H / g2n

    where hb_k = h_k / sigma_k and g_kn = ||hb_k||^2. The pair is rank
    one each, uses exactly p1 + p2 total power, and reproduces the
    dual-uplink rate pair in which user 2 is decoded free of
    interference.
    """
    if len(alloc.p_per_user) != 2 or cfg.num_users != 2:
        raise ValueError("covariance recovery is defined for exactly two users")
    v1 = _as_vector(h1, "h1")
    v2 = _as_vector(h2, "h2")
    if v1.size != v2.size:
        raise ValueError(f"channel sizes differ: {v1.size} vs {v2.size}")
    m = v1.size
    p1, p2 = alloc.p_per_user
    if p1 <= 0.0 and p2 <= 0.0:
        zero = np.zeros((m, m), dtype=np.complex128)
        return CovariancePair(zero, zero.copy())
    s1, s2 = cfg.noise_var_per_user
    hb1 = v1 / math.sqrt(s1)
    hb2 = v2 / math.sqrt(s2)
    g1n = float(np.vdot(hb1, hb1).real)
    g2n = float(np.vdot(hb2, hb2).real)
    if (p1 > 0.0 and g1n <= 0.0) or (p2 > 0.0 and g2n <= 0.0):
        raise ValueError("cannot allocate power to a zero channel")

    if p1 > 0.0:
        lam_h1 = hb1.copy()
        if p2 > 0.0:
            lam_h1 -= hb2 * (p2 * np.vdot(hb2, hb1) / (1.0 + p2 * g2n))
        quad = float(np.vdot(hb1, lam_h1).real)
        sigma1 = p1 * np.outer(lam_h1, lam_h1.conj()) / quad
    else:
        sigma1 = np.zeros((m, m), dtype=np.complex128)

    if p2 > 0.0:
        seen = float(np.vdot(hb2, sigma1 @ hb2).real)
        sigma2 = (p2 * (1.0 + seen) / g2n) * np.outer(hb2, hb2.conj())
    else:
        sigma2 = np.zeros((m, m), dtype=np.complex128)
    return CovariancePair(sigma1, sigma2)


def bc_region_two_user(
    h1: ChannelVector | np.ndarray,
    h2: ChannelVector | np.ndarray,
    cfg: BcConfig,
    power_splits: int = 101,
) -> RateRegion:
    """Downlink rate region sampled through the dual uplink.

    Sweeps p1 over a uniform grid with p2 = P - p1, collects both
    successive-decoding corner points of each dual uplink, and returns
    the convex hull of all sampled pairs walked from the r1 axis to the
    r2 axis. ``kind`` is "hull".
    """
    if power_splits < 2:
        raise ValueError(f"power_splits must be at least 2, got {power_splits}")
    if cfg.num_users != 2:
        raise ValueError("region construction needs exactly two noise variances")
    v1 = _as_vector(h1, "h1")
    v2 = _as_vector(h2, "h2")
    s1, s2 = cfg.noise_var_per_user
    g1 = float(np.vdot(v1, v1).real)
    g2 = float(np.vdot(v2, v2).real)
    ip = complex(np.vdot(v1, v2))
    rho = 0.0 if g1 <= 0.0 or g2 <= 0.0 else min(abs(ip) ** 2 / (g1 * g2), 1.0)
    power = cfg.total_power_P

    points: list[tuple[float, float]] = [(0.0, 0.0)]
    for i in range(power_splits):
        p1 = power * i / (power_splits - 1)
        p2 = power - p1
        gamma1 = p1 / s1
        gamma2 = p2 / s2
        for order in ("u1_first", "u2_first"):
            corner = sic_rates_two_user(g1, g2, rho, gamma1, gamma2, order)
            points.append(corner.as_tuple())
    points.append((math.log2(1.0 + power * g1 / s1), 0.0))
    points.append((0.0, math.log2(1.0 + power * g2 / s2)))

    hull = _upper_right_hull(points)
    vertices = [RatePoint(0.0, 0.0)]
    vertices.extend(RatePoint(x, y) for x, y in hull)
    if vertices[-1].r1 > 1e-15:
        vertices.append(RatePoint(0.0, vertices[-1].r2))
    return RateRegion(tuple(vertices), "hull")


def _upper_right_hull(points: Sequence[tuple[float, float]]) -> list[tuple[float, float]]:
    """Pareto-dominant convex boundary, walked from the r1 axis upward.

    Returns hull vertices ordered by decreasing first coordinate,
    starting at (max r1, 0) and ending at the point with the largest r2.
    Collinear and dominated points are dropped.
    """
    best_x = max(p[0] for p in points)
    best_y = max(p[1] for p in points)
    pool = list(points) + [(best_x, 0.0), (0.0, best_y)]
    # Upper convex hull in left-to-right order via the monotone chain.
    pool.sort(key=lambda p: (p[0], p[1]))
    upper: list[tuple[float, float]] = []
    for p in pool:
        while len(upper) >= 2:
            (x0, y0), (x1, y1) = upper[-2], upper[-1]
            cross = (x1 - x0) * (p[1] - y0) - (y1 - y0) * (p[0] - x0)
            if cross >= -1e-15:
                upper.pop()
            else:
                break
        if upper and abs(p[0] - upper[-1][0]) <= 1e-15 and abs(p[1] - upper[-1][1]) <= 1e-15:
            continue
        upper.append(p)
    # The monotone chain keeps the lower-left start; trim any leading
    # points dominated by the first true boundary vertex.
    while len(upper) >= 2 and upper[0][1] <= upper[1][1] and upper[0][0] <= upper[1][0]:
        upper.pop(0)
    upper.reverse()
    if upper and upper[0][1] > 1e-15:
        upper.insert(0, (upper[0][0], 0.0))
    return upper


def _waterfill(levels: np.ndarray, budget: float) -> np.ndarray:
    """Solve max sum log(1 + p_k e_k) s.t. sum p = budget, p >= 0.

    ``levels`` holds the effective gains e_k. The optimum is
    p_k = max(0, mu - 1/e_k) with the water level mu fixed by the
    budget over the active set.
    """
    inv = np.where(levels > 0.0, 1.0 / np.maximum(levels, 1e-300), np.inf)
    order = np.argsort(inv)
    sorted_inv = inv[order]
    k = levels.size
    mu = 0.0
    active = 0
    for m in range(k, 0, -1):
        head = sorted_inv[:m]
        if not np.all(np.isfinite(head)):
            continue
        candidate = (budget + float(head.sum())) / m
        if candidate > head[-1]:
            mu = candidate
            active = m
            break
    powers = np.zeros(k)
    if active > 0:
        idx = order[:active]
        powers[idx] = mu - inv[idx]
    return np.maximum(powers, 0.0)


def bc_capacity_general(
    channels: Sequence[ChannelVector | np.ndarray],
    cfg: BcConfig,
    tol: float = 1e-10,
    max_iter: int = 500,
) -> tuple[float, PowerAllocation]:
    """Downlink sum capacity for K users by iterative water-filling.

    Maximizes log2 det(I + sum_k (p_k / var_k) h_k h_k^H) over
    nonnegative powers with sum p_k = P. Each round computes every
    user's effective gain against the interference of the others,

        e_k = hb_k^H (I + sum_{j != k} p_j hb_j hb_j^H)^{-1} hb_k,

    water-fills on those gains, and damps the update by averaging with
    K - 1 copies of the previous iterate, which makes the sum-power
    iteration provably convergent. All linear algebra runs on the K x K
    Gram matrix of the noise-normalized channels, so the cost does not
    grow with the array size. Stops when the objective changes by less
    than ``tol`` bits; raises :class:`ConvergenceError` carrying the
    best iterate otherwise.
    """
    if len(channels) == 0:
        raise ValueError("channels must not be empty")
    if cfg.num_users != len(channels):
        raise ValueError(
            f"got {len(channels)} channels but {cfg.num_users} noise variances"
        )
    vecs = [_as_vector(ch, f"channels[{k}]") for k, ch in enumerate(channels)]
    size = vecs[0].size
    if any(v.size != size for v in vecs):
        raise ValueError("all channels must have the same number of entries")
    k_users = len(vecs)
    power = cfg.total_power_P
    mat = np.stack(
        [v / math.sqrt(s) for v, s in zip(vecs, cfg.noise_var_per_user)], axis=1
    )
    gram = mat.conj().T @ mat

    def objective(p: np.ndarray) -> float:
        scaled = gram * np.sqrt(p)[:, None] * np.sqrt(p)[None, :]
        chol = np.linalg.cholesky(
            np.eye(k_users, dtype=np.complex128) + (scaled + scaled.conj().T) / 2.0
        )
        return float(2.0 * np.sum(np.log(np.abs(np.diag(chol)))) / _LOG2)

    if k_users == 1:
        p = np.array([power])
        return objective(p), PowerAllocation((power,))

    p = np.full(k_users, power / k_users)
    best_bits = objective(p)
    best_p = p.copy()
    prev = best_bits
    for _ in range(max_iter):
        levels = np.empty(k_users)
        for k in range(k_users):
            others = [j for j in range(k_users) if j != k and p[j] > 0.0]
            own = float(gram[k, k].real)
            if not others:
                levels[k] = own
                continue
            idx = np.asarray(others, dtype=np.intp)
            # Woodbury identity on the K x K blocks: e_k = g_kk -
            # c^H (diag(1/p) + G_oo)^{-1} c with c = G_ok.
            cross = gram[np.ix_(idx, [k])]
            core = np.diag(1.0 / p[idx]) + gram[np.ix_(idx, idx)]
            solved = np.linalg.solve(core, cross)
            levels[k] = own - float((cross.conj().T @ solved)[0, 0].real)
        fresh = _waterfill(levels, power)
        p = (fresh + (k_users - 1) * p) / k_users
        total = p.sum()
        if total > 0.0:
            p *= power / total
        bits = objective(p)
        if bits > best_bits:
            best_bits = bits
            best_p = p.copy()
        if abs(bits - prev) < tol:
            return bits, PowerAllocation(tuple(p))
        prev = bits
    raise ConvergenceError(
        f"no convergence within {max_iter} iterations",
        best_bits,
        PowerAllocation(tuple(best_p)),
    )


def linear_precoder_sum_rate(
    scheme: str,
    g1: float,
    g2: float,
    rho: float,
    per_user_snr_hat: Sequence[float],
) -> float:
    """Achievable downlink sum rate with linear transmit precoding.

    Under matched ("mrt") or zero-forcing ("zf") beams and per-user
    transmit SNRs gamma_hat_k, each user's rate is
    log2(1 + gamma_hat_k g_k (1 - f)) where the loss f evaluates at
    x = gamma_hat_other * g_k (own gain, other user's power) and z = rho:

        "mrt": f = x z / (1 + x z)
        "zf":  f = z

    Both schemes meet the interference-free sum at rho = 0, and zero
    forcing collapses to zero rate at rho = 1.
    """
    key = scheme.lower()
    if key not in ("mrt", "zf"):
        raise ValueError(f"scheme must be 'mrt' or 'zf', got {scheme!r}")
    for name, val in (("g1", g1), ("g2", g2)):
        if not math.isfinite(val) or val < 0.0:
            raise ValueError(f"{name} must be finite and nonnegative, got {val}")
    if not (-1e-12 <= rho <= 1.0 + 1e-12):
        raise ValueError(f"correlation rho must lie in [0, 1], got {rho}")
    z = min(max(rho, 0.0), 1.0)
    snrs = tuple(float(s) for s in per_user_snr_hat)
    if len(snrs) != 2:
        raise ValueError(f"per_user_snr_hat must have 2 entries, got {len(snrs)}")
    if any(s < 0.0 for s in snrs):
        raise ValueError("per_user_snr_hat entries must be nonnegative")

    def loss(x: float) -> float:
        if key == "mrt":
            return x * z / (1.0 + x * z)
        return z

    total = 0.0
    for own_gain, own_snr, other_snr in ((g1, snrs[0], snrs[1]), (g2, snrs[1], snrs[0])):
        x = other_snr * own_gain
        total += math.log2(1.0 + own_snr * own_gain * (1.0 - loss(x)))
    return total


def bc_asymptotics(
    variant: str,
    *,
    xi: float | None = None,
    cfg: BcConfig | None = None,
    geom: ArrayGeometry | None = None,
    users: Sequence[UserLocation] | None = None,
    m_total: int | None = None,
) -> float | FfAsymptote:
    """Large-array downlink capacity limits.

    variant "nf_upa": planar-array gains saturate at xi/2 and the users
    decorrelate; the limit is the two-user capacity evaluated at those
    gains with rho = 0. Requires ``xi`` and ``cfg``.

    variant "nf_ula": same with the direction-dependent linear-array
    limit gains. Requires ``geom``, ``users``, and ``cfg``.

    variant "ff": the far-field gains keep growing with the element
    count, so capacity grows like log M. Returns an
    :class:`~nfcap.mac.FfAsymptote` whose ``static`` entry is the
    co-directional expression log2(M P A / (4 pi) * max_k proj_k /
    (r_k^2 var_k)) and whose ``dynamic`` entry is the distinct-direction
    expression; the gap is positive. Requires ``geom``, ``users``
    (exactly two), ``cfg``, and ``m_total``.
    """
    key = variant.lower()
    if key == "nf_upa":
        if xi is None or cfg is None:
            raise ValueError("variant 'nf_upa' requires xi and cfg")
        limit_gain = asymptotic_nf_gain(xi)
        return bc_capacity_two_user(limit_gain, limit_gain, 0.0, cfg)
    if key == "nf_ula":
        if geom is None or users is None or cfg is None:
            raise ValueError("variant 'nf_ula' requires geom, users, and cfg")
        if len(users) != 2:
            raise ValueError("variant 'nf_ula' is defined for exactly two users")
        lim1 = asymptotic_ula_gain(geom, users[0])
        lim2 = asymptotic_ula_gain(geom, users[1])
        return bc_capacity_two_user(lim1, lim2, 0.0, cfg)
    if key == "ff":
        if geom is None or users is None or cfg is None or m_total is None:
            raise ValueError("variant 'ff' requires geom, users, cfg, and m_total")
        if len(users) != 2 or cfg.num_users != 2:
            raise ValueError("variant 'ff' is defined for exactly two users")
        if m_total <= 0:
            raise ValueError(f"m_total must be positive, got {m_total}")
        q = m_total * cfg.total_power_P * geom.element_area / (4.0 * math.pi)
        betas = [
            u.range_r**2 * var / u.dir_y
            for u, var in zip(users, cfg.noise_var_per_user)
        ]
        b1, b2 = betas
        static = math.log2(q / min(b1, b2))
        dynamic = math.log2((q + b1 + b2) ** 2 / (4.0 * b1 * b2) - 1.0)
        return FfAsymptote(static=static, dynamic=dynamic)
    raise ValueError(
        f"variant must be 'nf_upa', 'nf_ula', or 'ff', got {variant!r}"
    )
