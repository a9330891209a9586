"""Dense scalar maps (disparity / depth), PFM I/O and the disparity->depth transform."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, PfmFormatError


class MapKind(enum.Enum):
    DISPARITY = "disparity"
    DEPTH = "depth"


@dataclass(frozen=True)
class DepthRange:
    """Metric depth interval the disparity range [0, 1] maps onto."""

    min_depth: float = 0.1
    max_depth: float = 100.0

    def __post_init__(self):
        object.__setattr__(self, "min_depth", float(self.min_depth))
        object.__setattr__(self, "max_depth", float(self.max_depth))
        if not (0.0 < self.min_depth < self.max_depth):
            raise DataError(
                f"depth range must satisfy 0 < min < max, got "
                f"({self.min_depth}, {self.max_depth})"
            )


@dataclass(frozen=True)
class ScalarMap:
    """Immutable 2-D grid of scalar values, row-major, top row first.

    Disparity maps are dimensionless in [0, 1]; depth maps are in meters.
    """

    width: int
    height: int
    kind: MapKind
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise DataError(f"map dimensions must be positive, got {self.width}x{self.height}")
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (self.height, self.width):
            vals = vals.reshape(self.height, self.width)
        vals = np.ascontiguousarray(vals)
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if not np.isfinite(vals).all():
            raise DataError("map contains non-finite values")
        if self.kind is MapKind.DISPARITY:
            if vals.min() < 0.0 or vals.max() > 1.0:
                raise DataError(
                    f"disparity values outside [0, 1]: min={vals.min()}, max={vals.max()}"
                )


def read_pfm(data: bytes, kind: MapKind = MapKind.DISPARITY) -> ScalarMap:
    """Decode a grayscale PFM byte stream.

    The file stores rows bottom-first; the returned map is top-first.
    Color (``PF``) streams are rejected.
    """
    try:
        magic_end = data.index(b"\n")
        dims_end = data.index(b"\n", magic_end + 1)
        scale_end = data.index(b"\n", dims_end + 1)
    except ValueError:
        raise PfmFormatError("truncated PFM header") from None

    magic = data[:magic_end]
    if magic == b"PF":
        raise PfmFormatError("color PFM (PF) not supported, expected grayscale Pf")
    if magic != b"Pf":
        raise PfmFormatError(f"bad PFM magic {magic!r}")

    dims = data[magic_end + 1 : dims_end].split()
    if len(dims) != 2:
        raise PfmFormatError("malformed PFM dimension line")
    try:
        width, height = int(dims[0]), int(dims[1])
        scale = float(data[dims_end + 1 : scale_end])
    except ValueError:
        raise PfmFormatError("malformed PFM header fields") from None
    if width <= 0 or height <= 0:
        raise PfmFormatError(f"non-positive PFM dimensions {width}x{height}")
    if scale == 0.0:
        raise PfmFormatError("PFM scale must be non-zero")

    payload = data[scale_end + 1 :]
    expected = width * height * 4
    if len(payload) != expected:
        raise PfmFormatError(f"PFM payload is {len(payload)} bytes, expected {expected}")

    dtype = "<f4" if scale < 0 else ">f4"
    vals = np.frombuffer(payload, dtype=dtype).reshape(height, width)
    # PFM stores the bottom row first
    vals = vals[::-1].astype(np.float64)
    if not np.isfinite(vals).all():
        raise PfmFormatError("PFM payload contains non-finite values")
    return ScalarMap(width=width, height=height, kind=kind, values=vals)


def write_pfm(m: ScalarMap) -> bytes:
    """Encode a map as little-endian grayscale PFM (scale -1.0), inverse of read_pfm."""
    header = f"Pf\n{m.width} {m.height}\n-1.0\n".encode("ascii")
    payload = m.values[::-1].astype("<f4").tobytes()
    return header + payload


def disparity_to_depth(m: ScalarMap, depth_range: DepthRange) -> ScalarMap:
    """Convert normalized disparity to metric depth via scaled inverse disparity.

    Per pixel v: depth = 1 / (1/max + (1/min - 1/max) * v), so v=0 gives
    max_depth and v=1 gives min_depth.
    """
    if m.kind is not MapKind.DISPARITY:
        raise DataError(f"expected a disparity map, got {m.kind.value}")
    min_disp = 1.0 / depth_range.max_depth
    max_disp = 1.0 / depth_range.min_depth
    scaled = min_disp + (max_disp - min_disp) * m.values
    depth = 1.0 / scaled
    # guard float round-off at the interval endpoints
    depth = np.clip(depth, depth_range.min_depth, depth_range.max_depth)
    return ScalarMap(width=m.width, height=m.height, kind=MapKind.DEPTH, values=depth)


def depth_to_disparity_value(depth_m: float, depth_range: DepthRange) -> float:
    """Exact algebraic inverse of disparity_to_depth for a single value."""
    min_disp = 1.0 / depth_range.max_depth
    max_disp = 1.0 / depth_range.min_depth
    return (1.0 / depth_m - min_disp) / (max_disp - min_disp)
