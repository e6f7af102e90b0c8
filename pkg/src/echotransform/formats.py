"""Versioned line-oriented text formats.

``ECHO-SCHED v1`` holds a compiled schedule, ``ECHO-USD v1`` a discrimination
design. Floats are written with 17 significant digits so that every file
parses back to identical values. Plain matrix files hold one row per line of
Python complex literals (``0.5+0.5j``); ``#`` starts a comment.
"""
from __future__ import annotations

import numpy as np

from .compiler import Schedule
from .core import ModeVector, Pulse, PulseTrain, UnitaryMatrix
from .errors import ParseError
from .usd import DiscriminationDesign

SCHED_HEADER = "ECHO-SCHED v1"
USD_HEADER = "ECHO-USD v1"


def g(x) -> str:
    return format(float(x), ".17g")


def _cplx(z) -> str:
    z = complex(z)
    return f"{g(z.real)} {g(z.imag)}"


def _matrix_lines(m):
    return [" ".join(_cplx(z) for z in row) for row in np.asarray(m)]


class _Lines:
    """Line cursor that remembers line numbers and byte offsets."""

    def __init__(self, text: str):
        self.items = []
        offset = 0
        for n, raw in enumerate(text.splitlines(keepends=True), 1):
            line = raw.split("#", 1)[0].strip()
            if line:
                self.items.append((n, offset, line))
            offset += len(raw.encode())
        self.pos = 0

    def next(self, what="record"):
        if self.pos >= len(self.items):
            raise ParseError(f"unexpected end of file, expected {what}")
        item = self.items[self.pos]
        self.pos += 1
        return item

    def error(self, msg, item):
        return ParseError(msg, line=item[0], offset=item[1])


def _floats(lines, item, tokens, count=None):
    try:
        vals = [float(t) for t in tokens]
    except ValueError as exc:
        raise lines.error(f"bad number: {exc}", item) from None
    if count is not None and len(vals) != count:
        raise lines.error(f"expected {count} numbers, got {len(vals)}", item)
    return vals


def _complex_row(lines, item, tokens, n):
    vals = _floats(lines, item, tokens, 2 * n)
    return [complex(vals[2 * k], vals[2 * k + 1]) for k in range(n)]


def _read_matrix(lines, item, rows, cols):
    out = []
    for _ in range(rows):
        it = lines.next("matrix row")
        out.append(_complex_row(lines, it, it[2].split(), cols))
    return np.array(out, dtype=complex).reshape(rows, cols)


def _expect_header(lines, header):
    item = lines.next("header")
    if item[2] != header:
        raise lines.error(f"expected header {header!r}, got {item[2]!r}", item)


# -- schedule ---------------------------------------------------------------

def dump_schedule(s: Schedule) -> str:
    out = [SCHED_HEADER,
           f"mode_spacing_ns {g(s.mode_spacing)}",
           f"cluster_guard_ns {g(s.cluster_guard)}",
           f"write_factor {_cplx(s.write_factor)}",
           "cluster_bases_ns " + " ".join(g(b) for b in s.cluster_bases)]
    cells = iter(s.read_cells)
    for p in s.train:
        rec = f"pulse {p.role.value} {g(p.center_time)} {g(p.duration)} {g(p.amplitude)} {g(p.phase)} {p.shape.value}"
        if p.role.value == "read":
            i, j = next(cells)
            rec += f" {i} {j}"
        out.append(rec)
    out += [f"input {lab} {g(t)}" for lab, t in s.input_bindings]
    out += [f"output {lab} {g(t)}" for lab, t in s.output_bindings]
    out += [f"aux {g(t)}" for t in s.aux_times]
    rows, cols = s.target.shape
    out.append(f"target {rows} {cols}")
    out += _matrix_lines(s.target)
    out.append("end")
    return "\n".join(out) + "\n"


def load_schedule(text: str) -> Schedule:
    lines = _Lines(text)
    _expect_header(lines, SCHED_HEADER)
    fields = {"pulses": [], "cells": [], "inputs": [], "outputs": [], "aux": [], "bases": ()}
    while True:
        item = lines.next("record or 'end'")
        key, *tok = item[2].split()
        if key == "end":
            break
        if key in ("mode_spacing_ns", "cluster_guard_ns"):
            fields[key] = _floats(lines, item, tok, 1)[0]
        elif key == "write_factor":
            fields[key] = _complex_row(lines, item, tok, 1)[0]
        elif key == "cluster_bases_ns":
            fields["bases"] = tuple(_floats(lines, item, tok))
        elif key == "pulse":
            if len(tok) not in (6, 8):
                raise lines.error("pulse record needs role, time, duration, amplitude, phase, shape", item)
            role, shape = tok[0], tok[5]
            t, dur, amp, ph = _floats(lines, item, tok[1:5])
            try:
                fields["pulses"].append(Pulse(t, role, amp, ph, dur, shape))
            except ValueError as exc:
                raise lines.error(str(exc), item) from None
            if role == "read":
                if len(tok) != 8:
                    raise lines.error("read pulse needs its (row, col) cell", item)
                fields["cells"].append((int(tok[6]), int(tok[7])))
        elif key in ("input", "output"):
            if len(tok) != 2:
                raise lines.error(f"{key} record needs label and time", item)
            fields[key + "s"].append((tok[0], _floats(lines, item, tok[1:], 1)[0]))
        elif key == "aux":
            fields["aux"].append(_floats(lines, item, tok, 1)[0])
        elif key == "target":
            rows, cols = (int(x) for x in _floats(lines, item, tok, 2))
            fields["target"] = _read_matrix(lines, item, rows, cols)
        else:
            raise lines.error(f"unknown record {key!r}", item)
    for need in ("mode_spacing_ns", "cluster_guard_ns", "write_factor", "target"):
        if need not in fields:
            raise ParseError(f"missing {need!r} record")
    try:
        train = PulseTrain(tuple(fields["pulses"]))
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return Schedule(
        train=train,
        input_bindings=tuple(fields["inputs"]),
        output_bindings=tuple(fields["outputs"]),
        aux_times=tuple(fields["aux"]),
        target=fields["target"],
        read_cells=tuple(fields["cells"]),
        mode_spacing=fields["mode_spacing_ns"],
        cluster_guard=fields["cluster_guard_ns"],
        write_factor=fields["write_factor"],
        cluster_bases=fields["bases"],
    )


# -- design -----------------------------------------------------------------

def dump_design(d: DiscriminationDesign) -> str:
    out = [USD_HEADER, f"n_states {d.n_states}", f"dim {d.dim}",
           f"optimal {int(d.optimal)}",
           "labels " + " ".join(d.inputs[0].labels),
           "priors " + " ".join(g(p) for p in d.priors)]
    out += [f"input {i} " + " ".join(_cplx(z) for z in v.amplitudes) for i, v in enumerate(d.inputs)]
    out += [f"output {i} " + " ".join(_cplx(z) for z in v.amplitudes) for i, v in enumerate(d.outputs)]
    out.append(f"embedding {d.dim}")
    out += _matrix_lines(d.embedding.entries)
    out.append("p_inconclusive " + " ".join(g(q) for q in d.p_inconclusive))
    out.append(f"p_inconclusive_avg {g(d.p_inconclusive_avg)}")
    out.append("p_error_helstrom " + ("none" if d.p_error_helstrom is None else g(d.p_error_helstrom)))
    for k, (role, idx) in enumerate(d.mode_roles):
        out.append(f"mode_role {k} {role}" + ("" if idx is None else f" {idx}"))
    out.append("end")
    return "\n".join(out) + "\n"


def load_design(text: str) -> DiscriminationDesign:
    lines = _Lines(text)
    _expect_header(lines, USD_HEADER)
    f = {"inputs": {}, "outputs": {}, "roles": {}}
    while True:
        item = lines.next("record or 'end'")
        key, *tok = item[2].split()
        if key == "end":
            break
        if key in ("n_states", "dim", "optimal"):
            f[key] = int(_floats(lines, item, tok, 1)[0])
        elif key == "labels":
            f["labels"] = tuple(tok)
        elif key == "priors":
            f["priors"] = np.array(_floats(lines, item, tok))
        elif key in ("input", "output"):
            if "dim" not in f:
                raise lines.error("'dim' must precede state records", item)
            f[key + "s"][int(tok[0])] = _complex_row(lines, item, tok[1:], f["dim"])
        elif key == "embedding":
            n = int(_floats(lines, item, tok, 1)[0])
            f["embedding"] = _read_matrix(lines, item, n, n)
        elif key == "p_inconclusive":
            f["q"] = np.array(_floats(lines, item, tok))
        elif key == "p_inconclusive_avg":
            _floats(lines, item, tok, 1)  # derived, recomputed on load
        elif key == "p_error_helstrom":
            f["helstrom"] = None if tok == ["none"] else _floats(lines, item, tok, 1)[0]
        elif key == "mode_role":
            if len(tok) < 2 or tok[1] not in ("conclusive", "inconclusive"):
                raise lines.error("mode_role needs index and conclusive|inconclusive", item)
            f["roles"][int(tok[0])] = (tok[1], int(tok[2]) if tok[1] == "conclusive" else None)
        else:
            raise lines.error(f"unknown record {key!r}", item)
    for need in ("n_states", "dim", "labels", "priors", "embedding", "q", "helstrom"):
        if need not in f:
            raise ParseError(f"missing {need!r} record")
    n = f["n_states"]
    try:
        return DiscriminationDesign(
            inputs=tuple(ModeVector(f["inputs"][i], f["labels"]) for i in range(n)),
            priors=f["priors"],
            outputs=tuple(ModeVector(f["outputs"][i]) for i in range(n)),
            embedding=UnitaryMatrix(f["embedding"]),
            p_inconclusive=f["q"],
            p_error_helstrom=f["helstrom"],
            mode_roles=tuple(f["roles"][k] for k in range(f["dim"])),
            optimal=bool(f.get("optimal", 1)),
        )
    except (KeyError, ValueError) as exc:
        raise ParseError(f"inconsistent design file: {exc}") from None


# -- plain matrices -----------------------------------------------------------

def load_matrix(text: str) -> np.ndarray:
    lines = _Lines(text)
    rows = []
    for item in lines.items:
        try:
            rows.append([complex(tok) for tok in item[2].replace(",", " ").split()])
        except ValueError:
            raise lines.error("not a complex number", item) from None
        if rows and len(rows[-1]) != len(rows[0]):
            raise lines.error("ragged matrix row", item)
    if not rows:
        raise ParseError("empty matrix file")
    return np.array(rows, dtype=complex)


def dump_matrix(m) -> str:
    return "\n".join(" ".join(repr(complex(z)) for z in row) for row in np.asarray(m)) + "\n"
