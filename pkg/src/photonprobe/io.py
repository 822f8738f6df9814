"""
Output files: comma-separated tables at full precision, JSON documents and
the run manifest.  Every file is written to a temporary name in the target
directory and renamed into place.
"""
import json
import os
import tempfile
import time
from dataclasses import dataclass, field

import numpy as np


def atomic_write(path, data):
    """Write ``data`` (str or bytes) to ``path`` via a temporary file and rename."""
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=d, prefix="." + os.path.basename(path) + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"encoding": "utf-8", "newline": "\n"})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def _fmt_column(col):
    col = np.asarray(col)
    if col.dtype.kind in "iub":
        return [str(int(v)) for v in col]
    return [format(float(v), ".17g") for v in col]


def table_text(names, columns):
    """Header row plus one LF-terminated row per sample, floats to 17 significant digits."""
    if len(names) != len(columns):
        raise ValueError("one name per column required")
    n = {len(c) for c in columns}
    if len(n) > 1:
        raise ValueError("columns differ in length")
    cols = [_fmt_column(c) for c in columns]
    rows = [",".join(names)] + [",".join(r) for r in zip(*cols)]
    return "\n".join(rows) + "\n"


def write_table(path, names, columns):
    return atomic_write(path, table_text(names, columns))


def read_table(path):
    """Inverse of :func:`write_table`: (names, 2-D float array)."""
    with open(path, encoding="utf-8") as fh:
        names = fh.readline().strip().split(",")
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return names, data


def _jsonable(o):
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    raise TypeError(f"not JSON serializable: {type(o).__name__}")


def json_text(obj):
    return json.dumps(obj, indent=2, sort_keys=True, default=_jsonable) + "\n"


def write_json(path, obj):
    return atomic_write(path, json_text(obj))


@dataclass
class RunManifest:
    """
    Record of one command run.  ``outputs`` lists files relative to
    ``out_dir``; the manifest itself is not listed.
    """

    command: str
    config: dict
    version: str
    seeds: dict
    out_dir: str
    outputs: list = field(default_factory=list)
    status: str = "running"
    exit_code: int = None
    error: str = None
    started: float = field(default_factory=time.perf_counter, repr=False)
    wall_time_s: float = None

    def add(self, path):
        rel = os.path.relpath(path, self.out_dir)
        if rel not in self.outputs:
            self.outputs.append(rel)
        return path

    def table(self, name, names, columns):
        return self.add(write_table(os.path.join(self.out_dir, name), names, columns))

    def json(self, name, obj):
        return self.add(write_json(os.path.join(self.out_dir, name), obj))

    def text(self, name, text):
        return self.add(atomic_write(os.path.join(self.out_dir, name), text))

    def as_dict(self):
        return {"command": self.command, "config": self.config, "version": self.version,
                "seeds": self.seeds, "outputs": list(self.outputs), "status": self.status,
                "exit_code": self.exit_code, "error": self.error, "wall_time_s": self.wall_time_s}

    def finish(self, status, exit_code, error=None, name="manifest.json"):
        self.status, self.exit_code, self.error = status, exit_code, error
        self.wall_time_s = time.perf_counter() - self.started
        # only files that exist at exit are listed
        self.outputs = [p for p in self.outputs if os.path.exists(os.path.join(self.out_dir, p))]
        return write_json(os.path.join(self.out_dir, name), self.as_dict())
