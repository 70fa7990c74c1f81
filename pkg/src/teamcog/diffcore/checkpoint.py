"""Parameter checkpoint container.

Layout (all integers little-endian):

    magic   4 bytes  b"TCG1"
    version u32      currently 1
    count   u32      number of arrays
    per array:
        name_len u16, name utf-8 bytes
        ndim     u8,  dims u32 * ndim
        payload  float32, C order

Arrays are written in dict order so a round trip preserves ordering.
"""

import struct
from collections import OrderedDict

import numpy as np

MAGIC = b"TCG1"
VERSION = 1


def save_arrays(path, arrays):
    """arrays: ordered mapping name -> numpy array (stored as float32)."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", VERSION, len(arrays)))
        for name, arr in arrays.items():
            raw = name.encode("utf-8")
            a = np.ascontiguousarray(arr, dtype="<f4")
            fh.write(struct.pack("<H", len(raw)))
            fh.write(raw)
            fh.write(struct.pack("<B", a.ndim))
            fh.write(struct.pack(f"<{a.ndim}I", *a.shape))
            fh.write(a.tobytes())


def load_arrays(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != MAGIC:
            raise ValueError(f"not a checkpoint file: bad magic {magic!r}")
        version, count = struct.unpack("<II", fh.read(8))
        if version != VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        out = OrderedDict()
        for _ in range(count):
            (name_len,) = struct.unpack("<H", fh.read(2))
            name = fh.read(name_len).decode("utf-8")
            (ndim,) = struct.unpack("<B", fh.read(1))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim)) if ndim else ()
            n = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(4 * n), dtype="<f4").reshape(shape)
            out[name] = data.copy()
    return out


def save_params(path, params):
    """params: mapping name -> Tensor."""
    save_arrays(path, OrderedDict((k, p.data) for k, p in params.items()))


def load_params(path, params):
    """Load arrays into an existing parameter dict, validating names/shapes."""
    arrays = load_arrays(path)
    missing = set(params) - set(arrays)
    extra = set(arrays) - set(params)
    if missing or extra:
        raise ValueError(f"checkpoint mismatch: missing={sorted(missing)} extra={sorted(extra)}")
    for name, p in params.items():
        arr = arrays[name]
        if tuple(arr.shape) != tuple(p.data.shape):
            raise ValueError(f"shape mismatch for '{name}': {arr.shape} vs {p.data.shape}")
        p.data = arr.astype(p.data.dtype)
