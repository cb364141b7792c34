"""Dense tensor container contract, PTNS disk format, and softmax.

Tensors are numpy arrays of dtype float32/float64, rank 1..4, row-major. The
PTNS container is little-endian throughout: 4 magic bytes "PTNS", then an
8-byte fixed header (u8 version=1, u8 dtype code 0x01=f32/0x02=f64, u8 rank,
5 reserved zero bytes), then rank u64 extents, then the raw row-major payload.
"""

import struct
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, LayoutError, ShapeError, TruncationError

MAGIC = b"PTNS"
VERSION = 1
MAX_RANK = 4

_DTYPE_TO_CODE = {"float32": 1, "float64": 2}
_CODE_TO_DTYPE = {1: np.dtype("<f4"), 2: np.dtype("<f8")}


def check_tensor(t):
    """Validate the tensor contract; returns the array untouched."""
    arr = np.asarray(t)
    if arr.dtype.name not in _DTYPE_TO_CODE:
        raise FormatError(f"unsupported dtype {arr.dtype}; expected float32 or float64")
    if not 1 <= arr.ndim <= MAX_RANK:
        raise ShapeError(f"rank {arr.ndim} outside [1, {MAX_RANK}]")
    if any(e < 1 for e in arr.shape):
        raise ShapeError(f"zero extent in shape {arr.shape}")
    return arr


def write_tensor(t, path):
    """Write a tensor to `path` in the PTNS container."""
    arr = check_tensor(t)
    code = _DTYPE_TO_CODE[arr.dtype.name]
    # force little-endian row-major bytes regardless of host layout
    payload = np.ascontiguousarray(arr).astype(_CODE_TO_DTYPE[code], copy=False)
    header = MAGIC + bytes([VERSION, code, arr.ndim]) + b"\x00" * 5
    header += struct.pack("<%dQ" % arr.ndim, *arr.shape)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload.tobytes(order="C"))


def read_tensor(path):
    """Read a PTNS file; bit-exact inverse of write_tensor."""
    with open(path, "rb") as fh:
        buf = fh.read()
    if len(buf) < 12:
        raise FormatError(f"{path}: file shorter than the fixed header")
    if buf[:4] != MAGIC:
        raise FormatError(f"{path}: bad magic {buf[:4]!r}")
    version, code, rank = buf[4], buf[5], buf[6]
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    if code not in _CODE_TO_DTYPE:
        raise FormatError(f"{path}: unknown dtype code {code:#04x}")
    if not 1 <= rank <= MAX_RANK:
        raise FormatError(f"{path}: rank {rank} outside [1, {MAX_RANK}]")
    if buf[7:12] != b"\x00" * 5:
        raise FormatError(f"{path}: reserved bytes not zero")
    end = 12 + 8 * rank
    if len(buf) < end:
        raise FormatError(f"{path}: truncated extent table")
    shape = struct.unpack("<%dQ" % rank, buf[12:end])
    if any(e < 1 for e in shape):
        raise FormatError(f"{path}: zero extent in declared shape {shape}")
    dtype = _CODE_TO_DTYPE[code]
    count = 1
    for e in shape:
        count *= e
    expected = count * dtype.itemsize
    got = len(buf) - end
    if got != expected:
        raise TruncationError(
            f"{path}: payload holds {got} bytes, shape {shape} needs {expected}"
        )
    arr = np.frombuffer(buf, dtype=dtype, count=count, offset=end)
    return arr.reshape(shape).copy()


def softmax(t, axis):
    """Normalized exponentials along `axis`, computed in f64 with max-subtraction."""
    arr = np.asarray(t, dtype=np.float64)
    if not -arr.ndim <= axis < arr.ndim:
        raise ShapeError(f"axis {axis} out of range for rank {arr.ndim}")
    shifted = arr - arr.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=axis, keepdims=True)


@dataclass(frozen=True)
class AxisRole:
    """Names which axes of a tensor are class/channel, depth, height, width.

    Spatial transforms only ever touch the named spatial axes; the class axis
    is never reordered. Unused roles stay None.
    """

    class_axis: int | None = None
    depth: int | None = None
    height: int | None = None
    width: int | None = None

    def named(self):
        out = {}
        for name in ("class_axis", "depth", "height", "width"):
            v = getattr(self, name)
            if v is not None:
                out[name] = v
        return out

    def validate(self, rank):
        seen = {}
        for name, ax in self.named().items():
            if not 0 <= ax < rank:
                raise LayoutError(f"{name}={ax} out of range for rank {rank}")
            if ax in seen:
                raise LayoutError(f"axes {seen[ax]} and {name} both map to {ax}")
            seen[ax] = name

    def axis_for(self, role_name):
        if role_name not in ("depth", "height", "width"):
            raise LayoutError(f"unknown spatial role {role_name!r}")
        return getattr(self, role_name)


def prediction_roles(task):
    """Canonical axis layout of prediction tensors: class axis first."""
    if task == "classification":
        return AxisRole(class_axis=0)
    if task == "segmentation-2d":
        return AxisRole(class_axis=0, height=1, width=2)
    if task == "segmentation-3d":
        return AxisRole(class_axis=0, depth=1, height=2, width=3)
    raise ValueError(f"unknown task kind {task!r}")


def image_roles(rank):
    """Axis layout of raw inputs: (H, W) or (D, H, W)."""
    if rank == 2:
        return AxisRole(height=0, width=1)
    if rank == 3:
        return AxisRole(depth=0, height=1, width=2)
    raise ShapeError(f"no default image layout for rank {rank}")
