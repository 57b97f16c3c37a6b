"""Region diagrams: per-pixel orbit classification in the q or v plane.

White pixels send the marked orbit to 0, blue ones to infinity, black ones
do neither (an attracting cycle or no decision within the budget).  Rows
are classified by a compiled kernel that releases the GIL, so a plain
thread pool spreads the work; each worker owns a disjoint block of rows
and results never depend on the number of threads.
"""

from __future__ import annotations

import enum
import math
import os
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numba
import numpy as np

from .numeric import DomainError
from .rgdyn import (
    _OVERFLOW,
    RENDER_OPTIONS,
    ClassifierOptions,
    Kind,
    OrbitClassification,
    classify_c128,
    classify_orbit,
    classify_retry,
)

__all__ = [
    "PRESET_WINDOWS",
    "Plane",
    "GridSpec",
    "ClassificationGrid",
    "Palette",
    "DEFAULT_PALETTE",
    "render_q_plane",
    "render_v_plane",
    "image_bytes",
    "write_image",
    "write_raw",
    "read_raw",
    "color_classes",
    "extract_real_axis_crossings",
    "boundary_coherence",
]

RAW_MAGIC = b"DHLGRID1"

# standard windows (re_min, re_max, im_min, im_max) keyed by "plane:parameter"
PRESET_WINDOWS = {
    "q:-1": (-1.0, 3.5, -2.5, 2.5),
    "q:-1:zoom": (1.9, 2.15, 1.55, 1.75),
    "q:-4/5": (-0.8, 2.8, -2.0, 2.0),
    "q:-1/2": (-0.5, 1.7, -1.2, 1.2),
    "q:-1/5": (-1 / 3, 2 / 3, -0.6, 0.6),
    "q:1": (-3.0, 1.0, -3.0, 3.0),
    "q:2": (-6.0, 3.0, -6.0, 6.0),
    "q:4": (-14.0, 7.0, -13.0, 13.0),
    "q:99": (-1200.0, 1000.0, -1100.0, 1100.0),
    "y:100": (-20.0, 30.0, -30.0, 30.0),
    "y:-100": (-35.0, 25.0, -30.0, 30.0),
    "y:1000": (-130.0, 130.0, -130.0, 130.0),
}
_PIXEL_DTYPE = np.dtype([("label", "<u1"), ("period", "<u2"), ("iters", "<u4")])


class Plane(enum.IntEnum):
    """Which variable the pixels carry; the tag doubles as the raw-file code."""

    Q = 0
    V = 1
    Y = 2


@dataclass(frozen=True)
class GridSpec:
    re_min: float
    re_max: float
    im_min: float
    im_max: float
    width: int
    height: int

    def __post_init__(self):
        if not (self.re_min < self.re_max and self.im_min < self.im_max):
            raise DomainError("window must satisfy re_min < re_max and im_min < im_max")
        if self.width < 1 or self.height < 1:
            raise DomainError("width and height must be positive")

    @property
    def dx(self) -> float:
        return (self.re_max - self.re_min) / self.width

    @property
    def dy(self) -> float:
        return (self.im_max - self.im_min) / self.height

    def re(self, i):
        """Real part at the center of column ``i``."""
        return self.re_min + (np.asarray(i) + 0.5) * self.dx

    @property
    def im_mid(self) -> float:
        return (self.im_max + self.im_min) / 2

    def im(self, j):
        """Imaginary part at the center of row ``j``; row 0 is the top.

        Measured from the window midpoint so that mirror rows of a window
        symmetric about the real axis are exact negatives of each other.
        """
        return self.im_mid + ((self.height - 1) / 2 - np.asarray(j)) * self.dy

    def pixel_of(self, z: complex) -> tuple[float, float]:
        """Fractional (column, row) coordinates of ``z``."""
        return (z.real - self.re_min) / self.dx - 0.5, (self.im_max - z.imag) / self.dy - 0.5


@dataclass
class ClassificationGrid:
    spec: GridSpec | None
    plane: Plane
    parameter: complex
    kind: np.ndarray
    period: np.ndarray
    iters: np.ndarray
    opts: ClassifierOptions = field(default=RENDER_OPTIONS)

    @property
    def shape(self) -> tuple[int, int]:
        return self.kind.shape

    def label(self, i: int, j: int) -> OrbitClassification:
        k = Kind(int(self.kind[j, i]))
        period = int(self.period[j, i]) if k is Kind.CYCLE else None
        return OrbitClassification(k, int(self.iters[j, i]), period)


@numba.njit(cache=True, nogil=True)
def _classify_pixel(mode, param, z, max_iter, escape, zero_r, zero_hits, tol, p_max):
    if mode == 0:
        if z == 0:
            return 3, 0, 0
        q, v = z, param
    elif mode == 1:
        q, v = param, z
    else:
        q, v = param, z - 1.0
    kind, period, iters, _ = classify_c128(q, v, max_iter, escape, zero_r, zero_hits, tol, p_max)
    return kind, period, iters


@numba.njit(cache=True, nogil=True)
def _render_rows(
    mode, param, re0, dx, im_mid, dy, width, height, row0, row1, aa,
    max_iter, escape, zero_r, zero_hits, tol, p_max,
    kind_out, period_out, iters_out,
):
    counts = np.zeros(5, dtype=np.int64)
    first_period = np.zeros(5, dtype=np.int64)
    first_iters = np.zeros(5, dtype=np.int64)
    for j in range(row0, row1):
        for i in range(width):
            if aa == 1:
                z = complex(re0 + (i + 0.5) * dx, im_mid + ((height - 1) / 2 - j) * dy)
                k, p, it = _classify_pixel(mode, param, z, max_iter, escape, zero_r, zero_hits, tol, p_max)
                kind_out[j, i] = k
                period_out[j, i] = p
                iters_out[j, i] = it
                continue
            counts[:] = 0
            for sj in range(aa):
                for si in range(aa):
                    z = complex(
                        re0 + (i + (si + 0.5) / aa) * dx,
                        im_mid + ((height - 1) / 2 - j - ((sj + 0.5) / aa - 0.5)) * dy,
                    )
                    k, p, it = _classify_pixel(mode, param, z, max_iter, escape, zero_r, zero_hits, tol, p_max)
                    if counts[k] == 0:
                        first_period[k] = p
                        first_iters[k] = it
                    counts[k] += 1
            # majority label; ties go to the lower kind code
            best = 0
            for k in range(1, 5):
                if counts[k] > counts[best]:
                    best = k
            kind_out[j, i] = best
            period_out[j, i] = first_period[best]
            iters_out[j, i] = first_iters[best]


def _default_threads() -> int:
    return os.cpu_count() or 1


def _render(mode: int, param: complex, spec: GridSpec, opts: ClassifierOptions, threads, aa: int):
    if aa not in (1, 2):
        raise DomainError(f"antialiasing factor must be 1 or 2, got {aa}")
    h, w = spec.height, spec.width
    kind = np.zeros((h, w), dtype=np.uint8)
    period = np.zeros((h, w), dtype=np.uint16)
    iters = np.zeros((h, w), dtype=np.uint32)
    threads = max(1, threads or _default_threads())
    if opts.prec == 53:
        args = (
            mode, complex(param), spec.re_min, spec.dx, spec.im_mid, spec.dy, w, h,
        )
        tail = (
            aa, opts.max_iter, opts.escape_radius, opts.zero_radius, opts.zero_hits,
            opts.cycle_tol, opts.max_period, kind, period, iters,
        )
        block = max(1, math.ceil(h / (4 * threads)))
        ranges = [(r, min(h, r + block)) for r in range(0, h, block)]
        if threads == 1:
            for r0, r1 in ranges:
                _render_rows(*args, r0, r1, *tail)
        else:
            with ThreadPoolExecutor(max_workers=threads) as pool:
                list(pool.map(lambda r: _render_rows(*args, r[0], r[1], *tail), ranges))
        # overflowed double-precision orbits are redone in multiprecision
        for j, i in zip(*np.nonzero(kind == _OVERFLOW)):
            z = complex(spec.re(i), spec.im(j))
            res = classify_retry(*_qv(mode, param, z), opts)
            _store(kind, period, iters, j, i, res)
    else:
        def row_job(j):
            for i in range(w):
                z = complex(spec.re(i), spec.im(j))
                if mode == 0 and z == 0:
                    res = OrbitClassification(Kind.UNDECIDED, 0)
                else:
                    res = classify_orbit(*_qv(mode, param, z), opts)
                _store(kind, period, iters, j, i, res)

        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(row_job, range(h)))
    return kind, period, iters


def _qv(mode, param, z):
    if mode == 0:
        return z, param
    if mode == 1:
        return param, z
    return param, z - 1


def _store(kind, period, iters, j, i, res: OrbitClassification):
    kind[j, i] = int(res.kind)
    period[j, i] = res.period or 0
    iters[j, i] = res.iterations_used


def render_q_plane(v0, spec: GridSpec, opts: ClassifierOptions = RENDER_OPTIONS, threads: int | None = None,
                   aa: int = 1) -> ClassificationGrid:
    """Classify the orbit of the fixed marked point v0 under F_q at every pixel q.

    The pixel q = 0 (where F_q degenerates) is labelled UNDECIDED.
    """
    v0 = complex(v0)
    if v0 == 0:
        raise DomainError("v0 = 0 is a fixed point for every q")
    kind, period, iters = _render(0, v0, spec, opts, threads, aa)
    return ClassificationGrid(spec, Plane.Q, v0, kind, period, iters, opts)


def render_v_plane(q0, spec: GridSpec, opts: ClassifierOptions = RENDER_OPTIONS, threads: int | None = None,
                   aa: int = 1, coords: str = "v") -> ClassificationGrid:
    """Classify the orbit of each pixel under the fixed map F_{q0}.

    ``coords="y"`` reads pixel values as y = v + 1.
    """
    q0 = complex(q0)
    if q0 == 0:
        raise DomainError("q0 must be nonzero")
    if coords not in ("v", "y"):
        raise DomainError(f"coords must be 'v' or 'y', got {coords!r}")
    mode = 1 if coords == "v" else 2
    kind, period, iters = _render(mode, q0, spec, opts, threads, aa)
    return ClassificationGrid(spec, Plane.V if mode == 1 else Plane.Y, q0, kind, period, iters, opts)


# ---------------------------------------------------------------------------
# images


@dataclass(frozen=True)
class Palette:
    to_zero: tuple[int, int, int] = (255, 255, 255)
    to_infinity: tuple[int, int, int] = (0, 0, 255)
    cycle: tuple[int, int, int] = (0, 0, 0)
    undecided: tuple[int, int, int] = (0, 0, 0)

    def table(self) -> np.ndarray:
        return np.array([self.to_zero, self.to_infinity, self.cycle, self.undecided, self.undecided], dtype=np.uint8)


DEFAULT_PALETTE = Palette()


def _pixels(grid: ClassificationGrid, palette: Palette, shade: bool) -> np.ndarray:
    rgb = palette.table()[grid.kind]
    if shade:
        # darker where the orbit needed longer to decide
        frac = np.log1p(grid.iters.astype(np.float64)) / math.log1p(max(grid.opts.max_iter, 1))
        factor = 1.0 - 0.6 * np.clip(frac, 0.0, 1.0)
        rgb = np.rint(rgb * factor[..., None]).astype(np.uint8)
    return rgb


def image_bytes(grid: ClassificationGrid, palette: Palette = DEFAULT_PALETTE, shade: bool = False) -> bytes:
    """Binary PPM (P6) image, top row (largest imaginary part) first."""
    h, w = grid.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + _pixels(grid, palette, shade).tobytes()


def write_image(grid: ClassificationGrid, path, palette: Palette = DEFAULT_PALETTE, shade: bool = False) -> None:
    """Write a PPM, or a PNG when ``path`` ends in .png (needs Pillow)."""
    path = os.fspath(path)
    if path.lower().endswith(".png"):
        try:
            from PIL import Image
        except ImportError as exc:
            raise RuntimeError("PNG output needs Pillow; install the 'png' extra") from exc
        Image.fromarray(_pixels(grid, palette, shade), "RGB").save(path)
        return
    with open(path, "wb") as fh:
        fh.write(image_bytes(grid, palette, shade))


# ---------------------------------------------------------------------------
# raw grids


def write_raw(grid: ClassificationGrid, path) -> None:
    h, w = grid.shape
    p = complex(grid.parameter)
    header = RAW_MAGIC + struct.pack("<IIBdd", w, h, int(grid.plane), p.real, p.imag)
    body = np.empty(h * w, dtype=_PIXEL_DTYPE)
    body["label"] = grid.kind.ravel()
    body["period"] = grid.period.ravel()
    body["iters"] = grid.iters.ravel()
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body.tobytes())


def read_raw(path, spec: GridSpec | None = None, opts: ClassifierOptions = RENDER_OPTIONS) -> ClassificationGrid:
    """Load a raw grid; the window is not stored, so pass ``spec`` to restore it."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:8] != RAW_MAGIC:
        raise DomainError("not a DHLGRID1 file")
    w, h, tag, pre, pim = struct.unpack_from("<IIBdd", data, 8)
    offset = 8 + struct.calcsize("<IIBdd")
    body = np.frombuffer(data, dtype=_PIXEL_DTYPE, count=w * h, offset=offset)
    if spec is not None and (spec.width, spec.height) != (w, h):
        raise DomainError("grid spec does not match the stored dimensions")
    return ClassificationGrid(
        spec,
        Plane(tag),
        complex(pre, pim),
        body["label"].reshape(h, w).copy(),
        body["period"].reshape(h, w).copy(),
        body["iters"].reshape(h, w).copy(),
        opts,
    )


# ---------------------------------------------------------------------------
# analysis


def color_classes(grid: ClassificationGrid) -> np.ndarray:
    """0 white, 1 blue, 2 black."""
    return np.minimum(grid.kind, 2).astype(np.uint8)


def extract_real_axis_crossings(grid: ClassificationGrid) -> list[tuple[float, float]]:
    """Brackets [re_i, re_(i+1)] where the color changes along the real axis.

    Uses the pixel row whose center is nearest Im = 0, which must lie within
    half a pixel of the axis.
    """
    spec = grid.spec
    if spec is None:
        raise DomainError("grid has no window attached")
    centers = spec.im(np.arange(spec.height))
    j = int(np.argmin(np.abs(centers)))
    if abs(centers[j]) > spec.dy / 2 + 1e-12 * spec.dy:
        raise DomainError("no pixel row within half a pixel of the real axis")
    row = color_classes(grid)[j]
    xs = spec.re(np.arange(spec.width))
    return [(float(xs[i]), float(xs[i + 1])) for i in np.nonzero(row[1:] != row[:-1])[0]]


def boundary_coherence(grid: ClassificationGrid, points, radius: float = 2.0) -> float:
    """Fraction of ``points`` that sit on black pixels or within ``radius``
    pixels of a color boundary.  Points outside the window count as misses.
    """
    spec = grid.spec
    classes = color_classes(grid)
    h, w = classes.shape
    edge = np.zeros_like(classes, dtype=bool)
    edge[:, 1:] |= classes[:, 1:] != classes[:, :-1]
    edge[:, :-1] |= classes[:, 1:] != classes[:, :-1]
    edge[1:, :] |= classes[1:, :] != classes[:-1, :]
    edge[:-1, :] |= classes[1:, :] != classes[:-1, :]
    r = int(math.ceil(radius))
    pts = list(points)
    if not pts:
        return 1.0
    hits = 0
    for z in pts:
        x, y = spec.pixel_of(complex(z))
        ci, cj = int(round(x)), int(round(y))
        if not (0 <= ci < w and 0 <= cj < h):
            continue
        if classes[cj, ci] == 2:
            hits += 1
            continue
        found = False
        for dj in range(-r, r + 1):
            for di in range(-r, r + 1):
                jj, ii = cj + dj, ci + di
                if 0 <= jj < h and 0 <= ii < w and edge[jj, ii] and math.hypot(ii - x, jj - y) <= radius + 0.5:
                    found = True
                    break
            if found:
                break
        hits += found
    return hits / len(pts)
