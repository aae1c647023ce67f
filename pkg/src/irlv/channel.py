"""Wireless channel model: path loss, correlated shadowing, attenuation vectors.

Attenuation in dB between a transmitter and base station n is

    a(n) = a_pl(n) + a_s(n)

where a_pl is a deterministic path-loss term (free-space for LOS links, the
standard macro-cell model for NLOS links) and a_s is zero-mean Gaussian
shadowing with exponential spatial covariance

    cov(a_s at p, a_s at q) = sigma_s^2 * exp(-|p - q| / d_c).

Shadowing is realized as one spatially correlated map per base station,
sampled on a regular grid and interpolated bilinearly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft

from .scenario import distance

SPEED_OF_LIGHT = 299792458.0

# Grids at or below this node count use exact dense covariance factorization;
# larger grids use FFT synthesis on a circulant embedding.
_DENSE_NODE_LIMIT = 2500


@dataclass(frozen=True)
class ChannelParams:
    """Channel constants: carrier, shadowing statistics, BS antenna elevation."""

    f0_hz: float = 2.12e9
    sigma_s_db: float = 8.0
    d_c_m: float = 75.0
    h_ap_m: float = 15.0
    c_m_s: float = SPEED_OF_LIGHT
    grid_spacing_m: float = 5.0

    def __post_init__(self):
        if self.f0_hz <= 0 or self.d_c_m <= 0 or self.h_ap_m <= 0 or self.c_m_s <= 0:
            raise ValueError("channel constants must be strictly positive")
        if self.sigma_s_db < 0:
            raise ValueError("sigma_s_db must be non-negative")
        if self.grid_spacing_m <= 0:
            raise ValueError("grid_spacing_m must be strictly positive")


def path_loss_los_db(d, params: ChannelParams):
    """Free-space path loss 20*log10(4*pi*f0*d/c) in dB; d in meters (> 0)."""
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("nonpositive distance")
    out = 20.0 * np.log10(params.f0_hz * 4.0 * math.pi * d / params.c_m_s)
    return float(out) if out.ndim == 0 else out


def path_loss_nlos_db(d, params: ChannelParams):
    """Macro-cell NLOS path loss in dB for BS antenna elevation h_ap.

    40*(1 - 4e-3*h_ap)*log10(d/1km) - 18*log10(h_ap) + 21*log10(f0 in MHz) + 80
    """
    d = np.asarray(d, dtype=float)
    if np.any(d <= 0):
        raise ValueError("nonpositive distance")
    h = params.h_ap_m
    f0_mhz = params.f0_hz / 1e6
    out = (
        40.0 * (1.0 - 4e-3 * h) * np.log10(d / 1e3)
        - 18.0 * math.log10(h)
        + 21.0 * math.log10(f0_mhz)
        + 80.0
    )
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class ShadowingField:
    """Correlated shadowing map in dB on a regular grid.

    values[j, i] is the shadowing at (origin_x + i*spacing, origin_y + j*spacing).
    """

    origin_x: float
    origin_y: float
    spacing: float
    values: np.ndarray
    sigma_s_db: float
    d_c_m: float
    seed: int

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        return (
            self.origin_x,
            self.origin_y,
            self.origin_x + (self.nx - 1) * self.spacing,
            self.origin_y + (self.ny - 1) * self.spacing,
        )

    def at(self, x, y):
        """Bilinear interpolation of the grid at (x, y); scalars or arrays."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        gx = (x - self.origin_x) / self.spacing
        gy = (y - self.origin_y) / self.spacing
        if np.any(gx < 0) or np.any(gx > self.nx - 1) or np.any(gy < 0) or np.any(gy > self.ny - 1):
            raise ValueError("position outside shadowing field extent")
        i0 = np.minimum(gx.astype(np.int64), self.nx - 2)
        j0 = np.minimum(gy.astype(np.int64), self.ny - 2)
        tx = gx - i0
        ty = gy - j0
        v = self.values
        out = (
            v[j0, i0] * (1 - tx) * (1 - ty)
            + v[j0, i0 + 1] * tx * (1 - ty)
            + v[j0 + 1, i0] * (1 - tx) * ty
            + v[j0 + 1, i0 + 1] * tx * ty
        )
        return float(out) if out.ndim == 0 else out


def shadowing_at(field: ShadowingField, pos):
    """Shadowing in dB at a single position."""
    return field.at(pos[0], pos[1])


def _grid_axis(lo: float, hi: float, spacing: float) -> int:
    """Number of nodes so the grid spans at least [lo, hi]."""
    return int(math.ceil((hi - lo) / spacing - 1e-9)) + 1


def _exponential_cov_dense(nx, ny, spacing, sigma, d_c, rng):
    xs = np.arange(nx) * spacing
    ys = np.arange(ny) * spacing
    gx, gy = np.meshgrid(xs, ys)
    pts = np.column_stack([gx.ravel(), gy.ravel()])
    diff = pts[:, None, :] - pts[None, :, :]
    dist = np.sqrt((diff**2).sum(axis=2))
    cov = sigma**2 * np.exp(-dist / d_c)
    cov[np.diag_indices_from(cov)] += 1e-10 * sigma**2
    chol = np.linalg.cholesky(cov)
    z = chol @ rng.standard_normal(nx * ny)
    return z.reshape(ny, nx)


def _circulant_eigenvalues(mx, my, spacing, sigma, d_c):
    ux = np.minimum(np.arange(mx), mx - np.arange(mx)) * spacing
    uy = np.minimum(np.arange(my), my - np.arange(my)) * spacing
    dist = np.sqrt(uy[:, None] ** 2 + ux[None, :] ** 2)
    cov = sigma**2 * np.exp(-dist / d_c)
    lam = scipy.fft.fft2(cov).real
    return lam


def _exponential_cov_fft(nx, ny, spacing, sigma, d_c, rng):
    """Stationary Gaussian field via circulant embedding and FFT synthesis.

    The embedded torus covariance is exact for all in-grid lags; residual
    negative eigenvalues of the embedding are clipped after padding (their
    mass is checked to be negligible).
    """
    mx = scipy.fft.next_fast_len(2 * nx)
    my = scipy.fft.next_fast_len(2 * ny)
    for _ in range(3):
        lam = _circulant_eigenvalues(mx, my, spacing, sigma, d_c)
        neg = -lam[lam < 0].sum()
        if neg <= 1e-6 * lam[lam > 0].sum():
            break
        mx = scipy.fft.next_fast_len(2 * mx)
        my = scipy.fft.next_fast_len(2 * my)
    lam = np.clip(lam, 0.0, None)
    m_total = mx * my
    xi = rng.standard_normal((my, mx)) + 1j * rng.standard_normal((my, mx))
    w = scipy.fft.fft2(np.sqrt(lam / m_total) * xi)
    return w.real[:ny, :nx]


def generate_shadowing_field(scenario, params: ChannelParams, seed: int) -> ShadowingField:
    """One shadowing map for one base station, deterministic given the seed.

    The grid covers the scenario bounding box.  Grid spacing must resolve
    the decorrelation distance (spacing <= d_c/5).
    """
    spacing = params.grid_spacing_m
    if spacing > params.d_c_m / 5.0:
        raise ValueError("grid too coarse for d_c")
    xmin, ymin, xmax, ymax = scenario.bounds
    nx = _grid_axis(xmin, xmax, spacing)
    ny = _grid_axis(ymin, ymax, spacing)
    sigma = params.sigma_s_db
    if sigma == 0.0:
        values = np.zeros((ny, nx))
    else:
        rng = np.random.default_rng(seed)
        if nx * ny <= _DENSE_NODE_LIMIT:
            values = _exponential_cov_dense(nx, ny, spacing, sigma, params.d_c_m, rng)
        else:
            values = _exponential_cov_fft(nx, ny, spacing, sigma, params.d_c_m, rng)
    return ShadowingField(
        origin_x=xmin,
        origin_y=ymin,
        spacing=spacing,
        values=values,
        sigma_s_db=sigma,
        d_c_m=params.d_c_m,
        seed=int(seed),
    )


def field_seed(base_seed: int, bs_index: int) -> int:
    """Stable per-base-station seed derived from a run-level field seed."""
    return int(np.random.SeedSequence([int(base_seed), int(bs_index)]).generate_state(1, np.uint64)[0])


def generate_fields(scenario, params: ChannelParams, base_seed: int) -> list[ShadowingField]:
    """One independent shadowing map per base station."""
    return [
        generate_shadowing_field(scenario, params, field_seed(base_seed, n))
        for n in range(scenario.n_bs)
    ]


def attenuation_matrix(scenario, fields, params: ChannelParams, xy: np.ndarray) -> np.ndarray:
    """Attenuation vectors in dB for (n, 2) positions; shape (n, n_bs).

    fields may be None for a shadowing-free channel.
    """
    xy = np.asarray(xy, dtype=float)
    if fields is not None and len(fields) != scenario.n_bs:
        raise ValueError("need one shadowing field per base station")
    out = np.empty((xy.shape[0], scenario.n_bs))
    for n, bs in enumerate(scenario.bs_positions):
        d = np.hypot(xy[:, 0] - bs.x, xy[:, 1] - bs.y)
        los = scenario.los_mask(xy, n)
        pl = np.where(los, path_loss_los_db(d, params), path_loss_nlos_db(d, params))
        if fields is not None:
            pl = pl + fields[n].at(xy[:, 0], xy[:, 1])
        out[:, n] = pl
    return out


def attenuation_vector(scenario, fields, params: ChannelParams, ue) -> np.ndarray:
    """Attenuation in dB from one position to every base station."""
    return attenuation_matrix(scenario, fields, params, np.asarray(ue, dtype=float).reshape(1, 2))[0]


_FIELD_MAGIC = "shadowing-field-v1"


def save_field(field: ShadowingField, path) -> None:
    """CSV grid export with a header carrying origin, spacing, and dims.

    Values are written with 17 significant digits so the import is
    bit-exact.
    """
    with open(path, "w") as f:
        f.write(f"# {_FIELD_MAGIC}\n")
        f.write(
            "# origin_x={:.17g} origin_y={:.17g} spacing={:.17g} nx={} ny={} "
            "sigma_s_db={:.17g} d_c_m={:.17g} seed={}\n".format(
                field.origin_x,
                field.origin_y,
                field.spacing,
                field.nx,
                field.ny,
                field.sigma_s_db,
                field.d_c_m,
                field.seed,
            )
        )
        for row in field.values:
            f.write(",".join(format(v, ".17g") for v in row))
            f.write("\n")


def load_field(path) -> ShadowingField:
    with open(path) as f:
        magic = f.readline().strip()
        if magic != f"# {_FIELD_MAGIC}":
            raise ValueError(f"not a shadowing field file: {path}")
        header = dict(
            item.split("=", 1) for item in f.readline().lstrip("# ").strip().split()
        )
        nx, ny = int(header["nx"]), int(header["ny"])
        values = np.array(
            [[float(v) for v in f.readline().split(",")] for _ in range(ny)]
        )
    if values.shape != (ny, nx):
        raise ValueError("field grid does not match its header dimensions")
    return ShadowingField(
        origin_x=float(header["origin_x"]),
        origin_y=float(header["origin_y"]),
        spacing=float(header["spacing"]),
        values=values,
        sigma_s_db=float(header["sigma_s_db"]),
        d_c_m=float(header["d_c_m"]),
        seed=int(header["seed"]),
    )
