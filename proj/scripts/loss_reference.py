"""Writes the loss fixture pair and its reference values.

The tensors are drawn from a fixed seed. The reference loss is composed by
hand from the committed HDMT tables: gather along the curve, keep every
factor-th teacher slot, L2-normalise both codes, sum the absolute
differences. Run from the repository root.
"""

import json
import struct
from pathlib import Path

import numpy as np

FIX = Path("tests/fixtures")


def write_hdtn(path, array):
    a = np.ascontiguousarray(array, dtype="<f8")
    head = b"HDTN" + struct.pack("<BBB", 1, 1, a.ndim) + struct.pack(f"<{a.ndim}I", *a.shape)
    path.write_bytes(head + a.tobytes())


def read_hdmt(path):
    raw = path.read_bytes()
    assert raw[:4] == b"HDMT" and raw[4] == 1
    n, _p, layout = raw[5], raw[6], raw[7]
    assert layout in (0, 1)
    extents = struct.unpack_from(f"<{n}I", raw, 8)
    off = 8 + 4 * n
    record = struct.Struct(f"<{n}HI")
    order = {}
    while off < len(raw):
        *cell, index = record.unpack_from(raw, off)
        off += record.size
        order[index] = tuple(cell)
    # Compacted tables number the region cells 0..count-1.
    assert sorted(order) == list(range(int(np.prod(extents))))
    return tuple(extents), [order[v] for v in range(len(order))]


def hd_loss(eta_t, cells_t, eta_s, cells_s, offset=0):
    code_t = np.array([eta_t[c] for c in cells_t])
    code_s = np.array([eta_s[c] for c in cells_s])
    factor = len(code_t) // len(code_s)
    assert factor * len(code_s) == len(code_t)
    code_t = code_t[offset::factor][: len(code_s)]
    return float(np.abs(code_t / np.linalg.norm(code_t) - code_s / np.linalg.norm(code_s)).sum())


def main():
    rng = np.random.default_rng(20240611)
    ext_t, cells_t = read_hdmt(FIX / "teacher_map.hdmt")
    ext_s, cells_s = read_hdmt(FIX / "student_map.hdmt")
    eta_t = rng.normal(size=ext_t)
    eta_s = rng.normal(size=ext_s)
    am_t = rng.normal(size=ext_t)
    am_s = rng.normal(size=ext_s)
    write_hdtn(FIX / "teacher.hdtn", eta_t)
    write_hdtn(FIX / "student.hdtn", eta_s)
    write_hdtn(FIX / "teacher_am.hdtn", am_t)
    write_hdtn(FIX / "student_am.hdtn", am_s)
    factor = len(cells_t) // len(cells_s)
    ref = {
        "hd_left": hd_loss(eta_t, cells_t, eta_s, cells_s),
        "hd_center": hd_loss(eta_t, cells_t, eta_s, cells_s, offset=factor // 2),
        "vhd_left": hd_loss(eta_t * am_t, cells_t, eta_s * am_s, cells_s),
    }
    (FIX / "loss_reference.json").write_text(json.dumps(ref, indent=2) + "\n")
    print(json.dumps(ref))


if __name__ == "__main__":
    main()
