"""File formats: PNG images, SMAP float maps, region sets and attribution results.

SMAP layout (all little-endian)::

    offset 0   4 bytes  magic b"SMAP"
    offset 4   u16      version (1)
    offset 6   u16      reserved, must be 0
    offset 8   u32      width
    offset 12  u32      height
    offset 16  float32  width*height values, row-major
"""

import json
import struct

import numpy as np
from PIL import Image as PILImage, UnidentifiedImageError

from . import __version__
from .exceptions import FormatError
from .geometry import PatchGrid, RegionSet
from .scores import ScoreBreakdown
from .search import AttributionResult
from .validation import check_image

SMAP_MAGIC = b"SMAP"
SMAP_VERSION = 1
_SMAP_HEADER = struct.Struct("<4sHHII")


def read_image(path):
    """Load an 8-bit grayscale or RGB PNG as float32 ``(H, W, C)`` in [0, 1]."""
    try:
        with PILImage.open(path) as im:
            if im.format != "PNG":
                raise FormatError(f"{path}: not a PNG file")
            if im.mode not in ("L", "RGB"):
                raise FormatError(f"{path}: unsupported PNG mode {im.mode!r}; need 8-bit L or RGB")
            data = np.asarray(im, dtype=np.uint8)
    except (OSError, UnidentifiedImageError) as exc:
        raise FormatError(f"{path}: cannot read image: {exc}") from exc
    if data.ndim == 2:
        data = data[:, :, None]
    return data.astype(np.float32) / np.float32(255.0)


def image_to_uint8(image):
    img = check_image(image)
    return np.rint(img.astype(np.float64) * 255.0).astype(np.uint8)


def write_image(image, path):
    data = image_to_uint8(image)
    mode = "L" if data.shape[2] == 1 else "RGB"
    PILImage.fromarray(data[:, :, 0] if mode == "L" else data, mode=mode).save(path, format="PNG")


def encode_float_map(values):
    arr = np.asarray(values)
    if arr.ndim != 2:
        raise FormatError(f"float map must be 2-D, got shape {arr.shape}")
    h, w = arr.shape
    payload = np.ascontiguousarray(arr, dtype="<f4").tobytes()
    return _SMAP_HEADER.pack(SMAP_MAGIC, SMAP_VERSION, 0, w, h) + payload


def decode_float_map(raw, source="<bytes>"):
    if len(raw) < _SMAP_HEADER.size:
        raise FormatError(f"{source}: truncated SMAP header")
    magic, version, reserved, w, h = _SMAP_HEADER.unpack_from(raw)
    if magic != SMAP_MAGIC:
        raise FormatError(f"{source}: bad magic {magic!r}")
    if version != SMAP_VERSION or reserved != 0:
        raise FormatError(f"{source}: unsupported SMAP version {version}")
    expected = _SMAP_HEADER.size + 4 * w * h
    if len(raw) != expected:
        raise FormatError(f"{source}: payload is {len(raw) - _SMAP_HEADER.size} bytes, expected {4 * w * h}")
    return np.frombuffer(raw, dtype="<f4", offset=_SMAP_HEADER.size).reshape(h, w).astype(np.float32)


def write_float_map(values, path):
    with open(path, "wb") as fh:
        fh.write(encode_float_map(values))


def read_float_map(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    return decode_float_map(raw, str(path))


def read_csv_map(path):
    """Parse a plain-text map: a ``w,h`` line followed by ``h`` rows of ``w`` values."""
    try:
        with open(path) as fh:
            lines = [ln.strip() for ln in fh if ln.strip()]
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    try:
        w, h = (int(v) for v in lines[0].split(","))
        rows = [[float(v) for v in ln.split(",")] for ln in lines[1:]]
    except (ValueError, IndexError) as exc:
        raise FormatError(f"{path}: malformed CSV map: {exc}") from exc
    if len(rows) != h or any(len(r) != w for r in rows):
        raise FormatError(f"{path}: expected {h} rows of {w} values")
    return np.array(rows, dtype=np.float32)


def csv_to_float_map(csv_path, smap_path):
    write_float_map(read_csv_map(csv_path), smap_path)


def read_saliency(path):
    """Read a saliency map from SMAP, or from CSV when the name ends in ``.csv``."""
    if str(path).lower().endswith(".csv"):
        return read_csv_map(path)
    return read_float_map(path)


def _dump(doc, path):
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def _load(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise FormatError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: invalid JSON: {exc}") from exc


def regions_to_dict(regions):
    g = regions.grid
    return {"n": g.n, "m": regions.m, "d": regions.d, "patch_h": g.patch_h, "patch_w": g.patch_w,
            "elements": [list(e) for e in regions.elements]}


def regions_from_dict(doc, source="<dict>"):
    try:
        grid = PatchGrid(int(doc["n"]), int(doc["patch_h"]), int(doc["patch_w"]))
        regions = RegionSet(grid, tuple(tuple(e) for e in doc["elements"]))
        if regions.m != int(doc["m"]) or regions.d != int(doc["d"]):
            raise ValueError("m/d fields disagree with elements")
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{source}: invalid region set: {exc}") from exc
    return regions


def write_regions(regions, path):
    _dump(regions_to_dict(regions), path)


def read_regions(path):
    return regions_from_dict(_load(path), str(path))


_BREAKDOWN_KEYS = ("conf", "eff", "cons", "colla", "total")


def result_to_dict(result, config=None, include_timing=True):
    doc = {
        "tool_version": __version__,
        "config": config or {},
        "mode": result.mode,
        "order": [int(i) for i in result.order],
        "gains": [float(g) for g in result.gains],
        "values": [float(v) for v in result.values],
        "base_value": float(result.base_value),
        "breakdowns": [b.as_dict() for b in result.breakdowns],
    }
    if result.base_breakdown is not None:
        doc["base_breakdown"] = result.base_breakdown.as_dict()
    if include_timing:
        doc["timing_ms"] = [float(t) for t in result.timing_ms]
    return doc


def _breakdown(d):
    return ScoreBreakdown(*(float(d[k]) for k in _BREAKDOWN_KEYS))


def result_from_dict(doc, source="<dict>"):
    if not isinstance(doc, dict):
        raise FormatError(f"{source}: result document must be a JSON object")
    missing = [k for k in ("order", "gains", "values", "breakdowns", "base_value") if k not in doc]
    if missing:
        raise FormatError(f"{source}: result document lacks {', '.join(missing)}")
    try:
        result = AttributionResult(
            order=[int(i) for i in doc["order"]],
            gains=[float(g) for g in doc["gains"]],
            values=[float(v) for v in doc["values"]],
            breakdowns=[_breakdown(b) for b in doc["breakdowns"]],
            timing_ms=[float(t) for t in doc.get("timing_ms", [])],
            base_value=float(doc["base_value"]),
            base_breakdown=_breakdown(doc["base_breakdown"]) if "base_breakdown" in doc else None,
            mode=str(doc.get("mode", "greedy")),
        )
        result.check()
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"{source}: invalid attribution result: {exc}") from exc
    return result


def write_result(result, path, config=None, include_timing=True):
    _dump(result_to_dict(result, config, include_timing), path)


def read_result(path):
    return result_from_dict(_load(path), str(path))


def read_result_document(path):
    """Raw JSON of a result file (config echo included)."""
    return _load(path)
