"""SDPA sparse (``.dat-s``) export and import.

SDPA solves ``min c @ x`` subject to ``sum_k x_k F_k - F_0 >= 0``.  An
:class:`SdpProblem` maximizes ``b @ y + offset`` over ``Gamma(y) =
C + sum_k y_k E_k >= 0``, so the file holds ``c = -b``, ``F_0 = -C`` and
``F_k = E_k``.  The offset, the sign flip and the basis labels travel in
``*`` comment lines ahead of the data.
"""
from __future__ import annotations

import re
from typing import IO, List, Union

import numpy as np

from npa_sampling.sdp.problem import SdpProblem

HEADER = "* npa-sampling SDPA export"


def _num(v: float) -> str:
    v = float(v)
    if v == int(v) and abs(v) < 1e15:
        return str(int(v))
    return f"{v:.17g}"


def format_sdpa(problem: SdpProblem) -> str:
    n, nvars = problem.size, problem.num_vars
    lines = [
        HEADER,
        "* form: Gamma(y) = -F0 + sum_k y_k F_k >= 0",
        "* objective: maximize sum_k b_k y_k + offset; the c line stores -b (sign flipped)",
        f"* offset {_num(problem.offset)}",
    ]
    lines += [f"* label {i} {lab}" for i, lab in enumerate(problem.labels)]
    lines += [str(nvars), "1", str(n)]
    lines.append(" ".join(_num(-b) if b else "0" for b in problem.objective) or "")
    iu, ju = np.triu_indices(n)
    for i, j in zip(iu, ju):
        if problem.var_of[i, j] < 0 and problem.constant[i, j] != 0:
            lines.append(f"0 1 {i + 1} {j + 1} {_num(-problem.constant[i, j])}")
    entries = sorted((int(problem.var_of[i, j]), i, j)
                     for i, j in zip(iu, ju) if problem.var_of[i, j] >= 0)
    lines += [f"{k + 1} 1 {i + 1} {j + 1} 1" for k, i, j in entries]
    return "\n".join(lines) + "\n"


def export_sdpa(problem: SdpProblem, destination: Union[str, IO]) -> None:
    """Write ``problem`` to a path or an open text stream.

    Raises
    ------
    OSError
        If the destination cannot be written.
    """
    text = format_sdpa(problem)
    if hasattr(destination, "write"):
        destination.write(text)
    else:
        with open(destination, "w") as fh:
            fh.write(text)


_SPLIT = re.compile(r"[\s,{}()]+")


def parse_sdpa(text: str) -> SdpProblem:
    """Read a single-block SDPA sparse file written by :func:`export_sdpa`.

    Files from other writers are accepted as long as every matrix entry is
    either a constant or a single variable with coefficient 1.
    """
    offset = 0.0
    labels: List[str] = []
    data: List[str] = []
    for raw in text.splitlines():
        line = raw.strip()
        if not data and (not line or line[0] in '*"'):
            body = line[1:].strip()
            if body.startswith("offset "):
                offset = float(body.split()[1])
            elif body.startswith("label "):
                labels.append(body.split(None, 2)[2] if body.count(" ") >= 2 else "")
            continue
        if line:
            data.append(line)
    try:
        nvars = int(_SPLIT.split(data[0])[0])
        nblocks = int(_SPLIT.split(data[1])[0])
        n = abs(int([t for t in _SPLIT.split(data[2]) if t][0]))
    except (IndexError, ValueError) as exc:
        raise ValueError("malformed SDPA header") from exc
    if nblocks != 1:
        raise ValueError(f"only single-block problems are supported, got {nblocks}")
    rest = data[3:]
    coeffs: List[float] = []
    while len(coeffs) < nvars and rest:
        coeffs += [float(t) for t in _SPLIT.split(rest.pop(0)) if t]
    if len(coeffs) != nvars:
        raise ValueError("objective vector does not match mDIM")
    c = np.array(coeffs)
    var_of = np.full((n, n), -1, dtype=np.int64)
    constant = np.zeros((n, n))
    for line in rest:
        parts = [t for t in _SPLIT.split(line) if t]
        if len(parts) != 5:
            raise ValueError(f"bad SDPA entry line {line!r}")
        k, blk, i, j = (int(t) for t in parts[:4])
        val = float(parts[4])
        i, j = i - 1, j - 1
        if k == 0:
            constant[i, j] = constant[j, i] = -val
        else:
            if val != 1.0 or var_of[i, j] >= 0:
                raise ValueError(f"entry ({i + 1},{j + 1}) is not a single unit-coefficient variable")
            var_of[i, j] = var_of[j, i] = k - 1
    constant[var_of >= 0] = 0.0
    return SdpProblem(var_of, constant, -c + 0.0, offset, tuple(labels))


def import_sdpa(source: Union[str, IO]) -> SdpProblem:
    if hasattr(source, "read"):
        return parse_sdpa(source.read())
    with open(source) as fh:
        return parse_sdpa(fh.read())
