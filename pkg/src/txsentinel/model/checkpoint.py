"""Binary model checkpoints.

Byte layout (little-endian throughout):

* bytes 0-3:   magic ``CGNN``
* bytes 4-7:   format version, u32 (currently 1)
* bytes 8-31:  dimension table, six u32: struct_in, struct_out, embed_dim,
               fused_dim, hidden_dim, n_layers
* then, row-major float64 arrays in declared order:
  structural weight (struct_out x struct_in), structural bias (struct_out),
  fusion weight (fused_dim x (struct_out + embed_dim)), fusion bias
  (fused_dim), convolution weights layer 1..L (layer 1 hidden_dim x
  fused_dim, later layers hidden_dim x hidden_dim), classifier weight
  (hidden_dim), classifier bias (1)

Round-trips are bit-exact.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .network import FusionLayer, GcnModel, ModelBundle, ModelDims, StructuralEncoder

MAGIC = b"CGNN"
VERSION = 1
_HEADER = struct.Struct("<4sI6I")


def _array_order(dims: ModelDims) -> list[tuple[str, tuple[int, ...]]]:
    order = [
        ("struct_weight", (dims.struct_out, dims.struct_in)),
        ("struct_bias", (dims.struct_out,)),
        ("fusion_weight", (dims.fused_dim, dims.struct_out + dims.embed_dim)),
        ("fusion_bias", (dims.fused_dim,)),
        ("conv_0", (dims.hidden_dim, dims.fused_dim)),
    ]
    for layer in range(1, dims.n_layers):
        order.append((f"conv_{layer}", (dims.hidden_dim, dims.hidden_dim)))
    order.append(("cls_weight", (dims.hidden_dim,)))
    order.append(("cls_bias", (1,)))
    return order


def save_checkpoint(bundle: ModelBundle, path: str | Path) -> None:
    dims = bundle.dims
    params = bundle.parameters()
    with open(path, "wb") as fh:
        fh.write(
            _HEADER.pack(
                MAGIC,
                VERSION,
                dims.struct_in,
                dims.struct_out,
                dims.embed_dim,
                dims.fused_dim,
                dims.hidden_dim,
                dims.n_layers,
            )
        )
        for name, shape in _array_order(dims):
            array = params[name]
            if array.shape != shape:
                raise CheckpointError(f"{name} has shape {array.shape}, expected {shape}")
            fh.write(np.ascontiguousarray(array, dtype="<f8").tobytes())


def load_checkpoint(path: str | Path) -> ModelBundle:
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise CheckpointError("truncated checkpoint: header incomplete")
    magic, version, s_in, s_out, e_dim, f_dim, h_dim, n_layers = _HEADER.unpack_from(blob)
    if magic != MAGIC:
        raise CheckpointError("bad checkpoint magic")
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}, expected {VERSION}")
    if min(s_in, s_out, e_dim, f_dim, h_dim, n_layers) <= 0:
        raise CheckpointError("dimension table contains non-positive entries")
    dims = ModelDims(
        struct_in=s_in,
        struct_out=s_out,
        embed_dim=e_dim,
        fused_dim=f_dim,
        hidden_dim=h_dim,
        n_layers=n_layers,
    )

    arrays: dict[str, np.ndarray] = {}
    offset = _HEADER.size
    for name, shape in _array_order(dims):
        count = int(np.prod(shape))
        nbytes = count * 8
        if offset + nbytes > len(blob):
            raise CheckpointError(f"truncated checkpoint: {name} incomplete")
        arrays[name] = (
            np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
            .astype(np.float64)
            .reshape(shape)
        )
        offset += nbytes
    if offset != len(blob):
        raise CheckpointError(f"checkpoint has {len(blob) - offset} trailing bytes")

    return ModelBundle(
        dims=dims,
        encoder=StructuralEncoder(weight=arrays["struct_weight"], bias=arrays["struct_bias"]),
        fusion=FusionLayer(weight=arrays["fusion_weight"], bias=arrays["fusion_bias"]),
        gcn=GcnModel(
            conv_weights=[arrays[f"conv_{i}"] for i in range(dims.n_layers)],
            cls_weight=arrays["cls_weight"],
            cls_bias=arrays["cls_bias"],
        ),
    )
