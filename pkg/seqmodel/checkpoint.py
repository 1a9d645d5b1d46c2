# seqmodel/checkpoint.py
"""
Plain-text parameter checkpoints.

Format (UTF-8, one record per line):

    # fps-lab checkpoint v1
    group <group name>
    arch <architecture as compact JSON>
    param <name> <comma-separated shape>
    <row-major values, space separated, %.17g>
    param ...
    group ...

%.17g round-trips every float64 exactly, so a saved and re-loaded ParamSet
is bit-identical to the original.
"""

from pathlib import Path
from typing import Dict, Mapping

import numpy as np
import orjson

from fps_lab.errors import DataError, MissingFileError
from seqmodel.params import Architecture, ParamSet

HEADER = "# fps-lab checkpoint v1"


def save_checkpoint(path: Path, groups: Mapping[str, ParamSet]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [HEADER]
    for group, params in groups.items():
        lines.append(f"group {group}")
        lines.append("arch " + orjson.dumps(params.arch.describe(), option=orjson.OPT_SORT_KEYS).decode())
        for name, value in params.values.items():
            lines.append(f"param {name} {','.join(str(n) for n in value.shape)}")
            lines.append(" ".join("%.17g" % v for v in value.reshape(-1)))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def load_checkpoint(path: Path) -> Dict[str, ParamSet]:
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"checkpoint not found: {path}")
    lines = path.read_text(encoding="utf-8").splitlines()
    if not lines or lines[0] != HEADER:
        raise DataError(f"{path} is not an fps-lab checkpoint")

    groups: Dict[str, ParamSet] = {}
    group, arch, values = None, None, {}
    i = 1

    def flush():
        if group is not None:
            groups[group] = ParamSet(arch, values)

    while i < len(lines):
        line = lines[i]
        if line.startswith("group "):
            flush()
            group, arch, values = line.split(" ", 1)[1], None, {}
        elif line.startswith("arch "):
            arch = Architecture(**orjson.loads(line[5:]))
        elif line.startswith("param "):
            _, name, shape_text = line.split(" ")
            shape = tuple(int(n) for n in shape_text.split(",") if n)
            raw = lines[i + 1].split() if i + 1 < len(lines) else []
            values[name] = np.array([float(v) for v in raw], dtype=np.float64).reshape(shape)
            i += 1
        elif line.strip():
            raise DataError(f"unexpected line {i + 1} in {path}")
        i += 1
    flush()
    return groups
