"""Hot numeric loops with optional numba acceleration.

Every kernel exists twice: a vectorized/loop numpy reference and a numba
@njit twin. The active flavor is chosen once at import from the
``NFCAP_BACKEND`` environment variable:

* ``auto`` (default): numba when importable, numpy otherwise
* ``numba``: require numba, raise if missing
* ``numpy``: force the pure-numpy path even when numba is installed

Public dispatchers: :func:`element_distances`, :func:`nf_entries`,
:func:`ccf_quadrature_sum`, :func:`mc_grid_best`. ``active_backend()``
reports which flavor won.
"""

import os
import warnings

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        def decorator(func):
            return func

        if args and callable(args[0]):
            return args[0]
        return decorator


_REQUESTED = os.environ.get("NFCAP_BACKEND", "auto").lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(
        f"NFCAP_BACKEND must be auto, numba or numpy, got {_REQUESTED!r}")
if _REQUESTED == "numba" and not HAVE_NUMBA:
    raise ImportError("NFCAP_BACKEND=numba but numba is not installed")
if _REQUESTED == "auto" and not HAVE_NUMBA:
    warnings.warn("numba not installed, falling back to pure numpy kernels",
                  stacklevel=2)

_USE_NUMBA = HAVE_NUMBA and _REQUESTED != "numpy"


def active_backend() -> str:
    "Name of the kernel flavor selected at import time."
    return "numba" if _USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# element distances and NF channel entries
#
# Index layout everywhere: row-major with the z index fastest, i.e. entry
# i = ax * m_z + az for ax in [0, m_x) and az in [0, m_z), where the signed
# element offsets are ix = ax - (m_x-1)/2 and iz = az - (m_z-1)/2.


def _distances_np(m_x, m_z, r, eps, dir_x, dir_z):
    ix = np.arange(m_x) - (m_x - 1) // 2
    iz = np.arange(m_z) - (m_z - 1) // 2
    X, Z = np.meshgrid(ix, iz, indexing="ij")
    q = (X * X + Z * Z) * eps * eps - 2 * X * eps * dir_x - 2 * Z * eps * dir_z + 1.0
    return (r * np.sqrt(q)).ravel()


@njit(cache=True)
def _distances_nb(m_x, m_z, r, eps, dir_x, dir_z):  # pragma: no cover - jitted
    out = np.empty(m_x * m_z)
    half_x = (m_x - 1) // 2
    half_z = (m_z - 1) // 2
    i = 0
    for ax in range(m_x):
        ix = ax - half_x
        for az in range(m_z):
            iz = az - half_z
            q = (ix * ix + iz * iz) * eps * eps \
                - 2.0 * ix * eps * dir_x - 2.0 * iz * eps * dir_z + 1.0
            out[i] = r * np.sqrt(q)
            i += 1
    return out


def _nf_entries_np(dists, amp_num, wavelength):
    amp = np.sqrt(amp_num / dists**3)
    return amp * np.exp(-2j * np.pi * dists / wavelength)


@njit(cache=True)
def _nf_entries_nb(dists, amp_num, wavelength):  # pragma: no cover - jitted
    out = np.empty(dists.shape[0], dtype=np.complex128)
    for i in range(dists.shape[0]):
        amp = np.sqrt(amp_num / dists[i] ** 3)
        phase = -2.0 * np.pi * dists[i] / wavelength
        out[i] = amp * (np.cos(phase) + 1j * np.sin(phase))
    return out


def element_distances(m_x: int, m_z: int, r: float, eps: float,
                      dir_x: float, dir_z: float) -> np.ndarray:
    "Exact element-to-user distances for the whole array, flattened."
    if _USE_NUMBA:
        return _distances_nb(m_x, m_z, r, eps, dir_x, dir_z)
    return _distances_np(m_x, m_z, r, eps, dir_x, dir_z)


def nf_entries(dists: np.ndarray, amp_num: float, wavelength: float) -> np.ndarray:
    """Spherical-wave channel entries from per-element distances.

    ``amp_num`` is the distance-free part of the squared amplitude,
    A*r*Psi/(4*pi); each entry is sqrt(amp_num/d^3) * exp(-j*2*pi*d/lambda).
    """
    if _USE_NUMBA:
        return _nf_entries_nb(dists, amp_num, wavelength)
    return _nf_entries_np(dists, amp_num, wavelength)


# ---------------------------------------------------------------------------
# CCF quadrature double sum
#
# S = sum_t sum_t' w_t w_t' f1(x_t, z_t') f2(x_t, z_t') over Chebyshev nodes,
# with f1 = exp(+j*k0*r1*sqrt(Q1))/Q1^{3/4}, f2 = exp(-j*k0*r2*sqrt(Q2))/Q2^{3/4}.


def _quad_sum_np(x, z, w, ups, r1, r2, k0, px1, oz1, px2, oz2):
    X, Z = np.meshgrid(x, z, indexing="ij")
    W = np.outer(w, w)
    q1 = X * X + Z * Z - 2 * px1 * X - 2 * oz1 * Z + 1.0
    q2 = ups * ups * (X * X + Z * Z) - 2 * ups * px2 * X - 2 * ups * oz2 * Z + 1.0
    f1 = np.exp(1j * k0 * r1 * np.sqrt(q1)) / q1**0.75
    f2 = np.exp(-1j * k0 * r2 * np.sqrt(q2)) / q2**0.75
    return complex(np.sum(W * f1 * f2))


@njit(cache=True)
def _quad_sum_nb(x, z, w, ups, r1, r2, k0, px1, oz1, px2, oz2):  # pragma: no cover
    total = 0.0 + 0.0j
    n = x.shape[0]
    for i in range(n):
        xi = x[i]
        for j in range(n):
            zj = z[j]
            q1 = xi * xi + zj * zj - 2.0 * px1 * xi - 2.0 * oz1 * zj + 1.0
            q2 = ups * ups * (xi * xi + zj * zj) \
                - 2.0 * ups * px2 * xi - 2.0 * ups * oz2 * zj + 1.0
            ph1 = k0 * r1 * np.sqrt(q1)
            ph2 = -k0 * r2 * np.sqrt(q2)
            amp = 1.0 / (q1**0.75 * q2**0.75)
            ph = ph1 + ph2
            total += w[i] * w[j] * amp * (np.cos(ph) + 1j * np.sin(ph))
    return total


def ccf_quadrature_sum(x, z, w, ups, r1, r2, k0, px1, oz1, px2, oz2) -> complex:
    "Weighted double sum of the two oscillatory CCF kernels."
    if _USE_NUMBA:
        return _quad_sum_nb(x, z, w, ups, r1, r2, k0, px1, oz1, px2, oz2)
    return _quad_sum_np(x, z, w, ups, r1, r2, k0, px1, oz1, px2, oz2)


# ---------------------------------------------------------------------------
# multicast beam grid scan
#
# Beams live in span{h1/s1, h2/s2}; with g1 = |hb1|^2, g2 = |hb2|^2 and
# ip = hb1^H hb2, the per-user SNR numerators of w = a*hb1 + b*e^{j psi}*hb2
# reduce to scalars, so the scan never touches the length-M vectors.


def _mc_grid_np(g1, g2, ip_re, ip_im, n_a, n_b, n_psi):
    a = np.linspace(0.0, 1.0, n_a)
    b = np.linspace(0.0, 1.0, n_b)
    A2, B2 = np.meshgrid(a, b, indexing="ij")
    ip = ip_re + 1j * ip_im
    best = 0.0
    arg = (1.0, 0.0, 0.0)
    for psi in 2.0 * np.pi * np.arange(n_psi) / n_psi:
        e = np.exp(1j * psi)
        norm2 = A2 * A2 * g1 + B2 * B2 * g2 + 2 * A2 * B2 * (e * ip).real
        v1 = A2 * g1 + B2 * e * ip
        v2 = A2 * np.conj(ip) + B2 * e * g2
        with np.errstate(divide="ignore", invalid="ignore"):
            m = np.minimum(np.abs(v1) ** 2, np.abs(v2) ** 2) / norm2
        m = np.where(norm2 > 1e-300, m, 0.0)
        flat = int(np.argmax(m))
        cand = float(m.flat[flat])
        if cand > best:
            best = cand
            ia, ib = divmod(flat, n_b)
            arg = (float(a[ia]), float(b[ib]), float(psi))
    return best, arg[0], arg[1], arg[2]


@njit(cache=True)
def _mc_grid_nb(g1, g2, ip_re, ip_im, n_a, n_b, n_psi):  # pragma: no cover
    best = 0.0
    best_a = 1.0
    best_b = 0.0
    best_psi = 0.0
    for ipsi in range(n_psi):
        psi = 2.0 * np.pi * ipsi / n_psi
        c = np.cos(psi)
        s = np.sin(psi)
        # components of e*ip: the norm cross term is 2ab*Re(e*ip)
        v1b_re = c * ip_re - s * ip_im
        v1b_im = s * ip_re + c * ip_im
        for ia in range(n_a):
            a = ia / (n_a - 1.0)
            for ib in range(n_b):
                b = ib / (n_b - 1.0)
                norm2 = a * a * g1 + b * b * g2 + 2.0 * a * b * v1b_re
                if norm2 <= 1e-300:
                    continue
                r1 = (a * g1 + b * v1b_re) ** 2 + (b * v1b_im) ** 2
                r2 = (a * ip_re + b * (c * g2)) ** 2 + (-a * ip_im + b * (s * g2)) ** 2
                m = min(r1, r2) / norm2
                if m > best:
                    best = m
                    best_a = a
                    best_b = b
                    best_psi = psi
    return best, best_a, best_b, best_psi


def mc_grid_best(g1: float, g2: float, ip: complex,
                 n_a: int, n_b: int, n_psi: int
                 ) -> tuple[float, float, float, float]:
    """Best min_k |h_k^H w|^2 over the renormalized span grid.

    Returns (best value, a, b, psi) for the winning cell of
    w = (a h1 + b e^{j psi} h2) / norm.
    """
    if _USE_NUMBA:
        return _mc_grid_nb(g1, g2, ip.real, ip.imag, n_a, n_b, n_psi)
    return _mc_grid_np(g1, g2, ip.real, ip.imag, n_a, n_b, n_psi)
