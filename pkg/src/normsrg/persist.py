"""Cloud CSV files and JSON run configs.

Cloud file layout::

    # format: normsrg-cloud/1
    # spec: l1
    # side: left
    # meta: {"n_samples": 5000, "sampler": "mixed", "seed": 42}
    re,im,gain,phase_rad,is_infinity
    1,0,1,0,0
    inf,inf,inf,0,1

Floats are written with 17 significant digits so every double round-trips.
Only ``gain``, ``phase_rad`` and ``is_infinity`` are read back; ``re`` and
``im`` are derived columns for external tools.
"""
from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .pairings import PairingSpec
from .srg import SrgCloud

__all__ = [
    "FORMAT_VERSION",
    "COLUMNS",
    "CloudFormatError",
    "format_float",
    "cloud_to_csv",
    "cloud_from_csv",
    "write_cloud",
    "read_cloud",
    "dump_json",
    "write_json",
    "read_json",
]

FORMAT_VERSION = "normsrg-cloud/1"
COLUMNS = "re,im,gain,phase_rad,is_infinity"


class CloudFormatError(ValueError):
    pass


def format_float(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return "%.17g" % x


def cloud_to_csv(cloud: SrgCloud) -> str:
    lines = [
        f"# format: {FORMAT_VERSION}",
        f"# spec: {cloud.spec.value}",
        f"# side: {cloud.side}",
        f"# meta: {json.dumps(_clean(cloud.meta), sort_keys=True)}",
        COLUMNS,
    ]
    re, im = cloud.re, cloud.im
    for k in range(len(cloud)):
        if cloud.is_infinity[k]:
            lines.append("inf,inf,inf,0,1")
        else:
            lines.append(",".join((format_float(re[k]), format_float(im[k]),
                                   format_float(cloud.gain[k]),
                                   format_float(cloud.phase[k]), "0")))
    return "\n".join(lines) + "\n"


def cloud_from_csv(text: str) -> SrgCloud:
    header = {}
    gains, phases = [], []
    seen_columns = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            key, sep, value = line[1:].partition(":")
            if not sep:
                raise CloudFormatError(f"line {lineno}: malformed header {raw!r}")
            header[key.strip()] = value.strip()
            continue
        if not seen_columns:
            if line != COLUMNS:
                raise CloudFormatError(f"line {lineno}: expected column header {COLUMNS!r}")
            seen_columns = True
            continue
        fields = line.split(",")
        if len(fields) != 5:
            raise CloudFormatError(f"line {lineno}: expected 5 fields, got {len(fields)}")
        try:
            gain, phase = float(fields[2]), float(fields[3])
            flag = int(fields[4])
        except ValueError as exc:
            raise CloudFormatError(f"line {lineno}: {exc}") from None
        if flag not in (0, 1) or (flag == 1) != math.isinf(gain) or math.isnan(gain):
            raise CloudFormatError(f"line {lineno}: inconsistent infinity flag")
        gains.append(gain)
        phases.append(phase)

    version = header.get("format")
    if version != FORMAT_VERSION:
        raise CloudFormatError(f"unsupported format version {version!r}")
    if not seen_columns:
        raise CloudFormatError("missing column header")
    try:
        spec = PairingSpec.parse(header["spec"])
        meta = json.loads(header.get("meta", "{}"))
    except (KeyError, ValueError) as exc:
        raise CloudFormatError(f"bad header: {exc}") from None
    return SrgCloud(np.array(gains), np.array(phases), spec,
                    header.get("side", "left"), meta)


def write_cloud(path, cloud: SrgCloud) -> Path:
    path = Path(path)
    path.write_text(cloud_to_csv(cloud), encoding="utf-8")
    return path


def read_cloud(path) -> SrgCloud:
    return cloud_from_csv(Path(path).read_text(encoding="utf-8"))


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, np.generic):
        obj = obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        # Strict JSON has no inf/nan.
        return None if math.isnan(obj) else format_float(obj)
    return obj


def dump_json(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dump_json(obj), encoding="utf-8")
    return path


def read_json(path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))
