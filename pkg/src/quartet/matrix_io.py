"""Distance-matrix file formats: CSV, PHYLIP square, and Nexus DISTANCES.

Readers are whitespace-tolerant; writers emit 17-significant-digit values so
matrices round-trip exactly through any of the three formats.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .cost import DistanceMatrix

__all__ = [
    "FORMATS",
    "MatrixParseError",
    "detect_format",
    "format_matrix",
    "parse_matrix",
    "read_distance_matrix",
    "write_distance_matrix",
]

FORMATS = ("csv", "phylip", "nexus")


class MatrixParseError(ValueError):
    """Malformed matrix input, with 1-based line (and column when known)."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        loc = ""
        if line is not None:
            loc = f"line {line}" + (f", column {col}" if col is not None else "") + ": "
        super().__init__(loc + message)
        self.line = line
        self.col = col


def _fmt_value(x: float) -> str:
    return format(float(x), ".17g")


def _parse_float(token: str, line: int, col: int | None = None) -> float:
    try:
        return float(token)
    except ValueError:
        raise MatrixParseError(f"expected a number, got {token!r}", line, col) from None


def _build(values: np.ndarray, names, line_hint: int | None = None) -> DistanceMatrix:
    try:
        return DistanceMatrix(values, names)
    except ValueError as exc:
        raise MatrixParseError(str(exc), line_hint) from exc


# ---------------------------------------------------------------------- #
# CSV (square grid, optional header row with names)
# ---------------------------------------------------------------------- #


def _parse_csv(text: str) -> DistanceMatrix:
    rows = []
    names = None
    lineno = 0
    first_data_line = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        if not rows and names is None:
            try:
                [float(c) for c in cells]
            except ValueError:
                names = cells
                continue
        if first_data_line is None:
            first_data_line = lineno
        rows.append([_parse_float(c, lineno, i + 1) for i, c in enumerate(cells)])
    if not rows:
        raise MatrixParseError("no matrix rows found", lineno or None)
    n = len(rows)
    for i, row in enumerate(rows):
        if len(row) != n:
            raise MatrixParseError(
                f"row has {len(row)} values but the matrix has {n} rows",
                (first_data_line or 1) + i,
            )
    if names is not None and len(names) != n:
        raise MatrixParseError(f"header names {len(names)} != matrix size {n}", 1)
    return _build(np.array(rows, dtype=np.float64), names, first_data_line)


def _format_csv(dm: DistanceMatrix) -> str:
    lines = []
    if dm.names is not None:
        bad = [nm for nm in dm.names if "," in nm or "\n" in nm]
        if bad:
            raise ValueError(f"CSV cannot hold names containing commas: {bad[:3]}")
        numeric = True
        for nm in dm.names:
            try:
                float(nm)
            except ValueError:
                numeric = False
                break
        if numeric:
            raise ValueError(
                "CSV cannot hold all-numeric item names (the header would parse "
                "as a matrix row); use the phylip or nexus format"
            )
        lines.append(",".join(dm.names))
    for i in range(dm.n):
        lines.append(",".join(_fmt_value(x) for x in dm.d[i]))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- #
# PHYLIP square (relaxed: whitespace-separated, name first per row)
# ---------------------------------------------------------------------- #


def _parse_phylip(text: str) -> DistanceMatrix:
    tokens: list[tuple[str, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        for tok in raw.split():
            tokens.append((tok, lineno))
    if not tokens:
        raise MatrixParseError("empty input")
    pos = 0
    head, head_line = tokens[pos]
    pos += 1
    try:
        n = int(head)
    except ValueError:
        raise MatrixParseError(f"expected item count, got {head!r}", head_line) from None
    if n < 1:
        raise MatrixParseError(f"bad item count {n}", head_line)
    names = []
    values = np.empty((n, n), dtype=np.float64)
    for i in range(n):
        if pos >= len(tokens):
            raise MatrixParseError(f"truncated input: expected {n} rows, got {i}", tokens[-1][1])
        name, line = tokens[pos]
        pos += 1
        names.append(name)
        for j in range(n):
            if pos >= len(tokens):
                raise MatrixParseError(
                    f"row {name!r} is truncated: expected {n} values, got {j}", tokens[-1][1]
                )
            tok, line = tokens[pos]
            pos += 1
            values[i, j] = _parse_float(tok, line)
    if pos != len(tokens):
        raise MatrixParseError(f"unexpected trailing token {tokens[pos][0]!r}", tokens[pos][1])
    return _build(values, names)


def _format_phylip(dm: DistanceMatrix) -> str:
    # PHYLIP tokens are whitespace-delimited; spaces in names become '_'
    names = ["_".join(str(nm).split()) for nm in (dm.names or map(str, range(dm.n)))]
    width = max(10, max(len(nm) for nm in names) + 1)
    lines = [f"{dm.n:5d}"]
    for i in range(dm.n):
        row = " ".join(_fmt_value(x) for x in dm.d[i])
        lines.append(f"{names[i]:<{width}s} {row}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- #
# Nexus DISTANCES block
# ---------------------------------------------------------------------- #


def _nexus_tokens(text: str):
    """Tokens with line numbers; quoted labels kept whole, comments dropped."""
    out = []
    lineno = 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            lineno += 1
            i += 1
        elif ch.isspace():
            i += 1
        elif ch == "[":  # nexus comment
            depth = 1
            i += 1
            while i < len(text) and depth:
                if text[i] == "[":
                    depth += 1
                elif text[i] == "]":
                    depth -= 1
                elif text[i] == "\n":
                    lineno += 1
                i += 1
        elif ch == "'":
            j = i + 1
            buf = []
            while j < len(text):
                if text[j] == "'":
                    if j + 1 < len(text) and text[j + 1] == "'":
                        buf.append("'")
                        j += 2
                        continue
                    break
                if text[j] == "\n":
                    lineno += 1
                buf.append(text[j])
                j += 1
            else:
                raise MatrixParseError("unterminated quoted label", lineno)
            out.append(("".join(buf), lineno, True))
            i = j + 1
        elif ch in ";=":
            out.append((ch, lineno, False))
            i += 1
        else:
            j = i
            while j < len(text) and not text[j].isspace() and text[j] not in "[';=":
                j += 1
            out.append((text[i:j], lineno, False))
            i = j
    return out


def _parse_nexus(text: str) -> DistanceMatrix:
    if not text.lstrip().upper().startswith("#NEXUS"):
        raise MatrixParseError("missing #NEXUS header", 1)
    toks = _nexus_tokens(text)
    upper = [t[0].upper() if not t[2] else None for t in toks]

    def find_block(name):
        for idx in range(len(toks) - 1):
            if upper[idx] == "BEGIN" and upper[idx + 1] == name:
                return idx + 2
        return None

    start = find_block("DISTANCES")
    if start is None:
        raise MatrixParseError("no DISTANCES block found", 1)

    ntax = None
    triangle = "BOTH"
    diagonal = True
    labels = True
    i = start
    while i < len(toks) and upper[i] != "MATRIX":
        word = upper[i]
        if word == "NTAX":
            if i + 2 < len(toks) and toks[i + 1][0] == "=":
                ntax = int(toks[i + 2][0])
                i += 3
                continue
        if word == "TRIANGLE" and i + 2 < len(toks) and toks[i + 1][0] == "=":
            triangle = toks[i + 2][0].upper()
            i += 3
            continue
        if word == "DIAGONAL":
            diagonal = True
        elif word == "NODIAGONAL":
            diagonal = False
        elif word == "NOLABELS":
            labels = False
        elif word == "END":
            raise MatrixParseError("DISTANCES block has no MATRIX command", toks[i][1])
        i += 1
    if i >= len(toks):
        raise MatrixParseError("DISTANCES block has no MATRIX command")
    if triangle not in ("BOTH", "LOWER", "UPPER"):
        raise MatrixParseError(f"unsupported TRIANGLE={triangle}", toks[i][1])
    if not labels:
        raise MatrixParseError("NOLABELS distance matrices are not supported", toks[i][1])
    i += 1  # past MATRIX

    rows: list[tuple[str, list[float], int]] = []
    cur_name = None
    cur_vals: list[float] = []
    cur_line = None
    while i < len(toks):
        tok, line, quoted = toks[i]
        if tok == ";" and not quoted:
            break
        is_number = True
        try:
            float(tok)
        except ValueError:
            is_number = False
        if quoted or not is_number:
            if cur_name is not None:
                rows.append((cur_name, cur_vals, cur_line))
            cur_name, cur_vals, cur_line = tok, [], line
        else:
            if cur_name is None:
                raise MatrixParseError("matrix value before any taxon label", line)
            cur_vals.append(_parse_float(tok, line))
        i += 1
    else:
        raise MatrixParseError("MATRIX command not terminated by ';'")
    if cur_name is not None:
        rows.append((cur_name, cur_vals, cur_line))

    n = ntax if ntax is not None else len(rows)
    if len(rows) != n:
        raise MatrixParseError(f"expected {n} matrix rows, found {len(rows)}")
    names = [r[0] for r in rows]
    values = np.zeros((n, n), dtype=np.float64)
    for idx, (name, vals, line) in enumerate(rows):
        if triangle == "BOTH":
            want = n
        elif triangle == "LOWER":
            want = idx + (1 if diagonal else 0)
        else:  # UPPER
            want = n - idx - (0 if diagonal else 1)
        if len(vals) != want:
            raise MatrixParseError(
                f"row {name!r}: expected {want} values for TRIANGLE={triangle}"
                f"{'' if diagonal else ' NODIAGONAL'}, got {len(vals)}",
                line,
            )
        if triangle == "BOTH":
            values[idx, :] = vals
        elif triangle == "LOWER":
            j0 = 0
            values[idx, j0 : j0 + len(vals)] = vals
        else:
            j0 = idx + (0 if diagonal else 1)
            values[idx, j0 : j0 + len(vals)] = vals
    if triangle != "BOTH":
        values = values + values.T
        if diagonal:
            values[np.diag_indices(n)] /= 2.0
    return _build(values, names)


def _format_nexus(dm: DistanceMatrix) -> str:
    names = dm.names or [str(i) for i in range(dm.n)]

    def q(name: str) -> str:
        numeric = True
        try:
            float(name)
        except ValueError:
            numeric = False
        if name and not numeric and all(ch.isalnum() or ch in "._-" for ch in name):
            return name
        return "'" + name.replace("'", "''") + "'"

    lines = [
        "#NEXUS",
        "BEGIN TAXA;",
        f"  DIMENSIONS NTAX={dm.n};",
        "  TAXLABELS " + " ".join(q(nm) for nm in names) + ";",
        "END;",
        "BEGIN DISTANCES;",
        f"  DIMENSIONS NTAX={dm.n};",
        "  FORMAT TRIANGLE=BOTH DIAGONAL LABELS;",
        "  MATRIX",
    ]
    width = max(len(q(nm)) for nm in names)
    for i in range(dm.n):
        row = " ".join(_fmt_value(x) for x in dm.d[i])
        lines.append(f"    {q(names[i]):<{width}s} {row}")
    lines += ["  ;", "END;"]
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------- #
# Entry points
# ---------------------------------------------------------------------- #

_PARSERS = {"csv": _parse_csv, "phylip": _parse_phylip, "nexus": _parse_nexus}
_FORMATTERS = {"csv": _format_csv, "phylip": _format_phylip, "nexus": _format_nexus}

_EXT_FORMATS = {
    ".csv": "csv",
    ".phy": "phylip",
    ".phylip": "phylip",
    ".dist": "phylip",
    ".nex": "nexus",
    ".nexus": "nexus",
    ".nxs": "nexus",
}


def detect_format(path: str | Path | None = None, text: str | None = None) -> str:
    """Guess the matrix format from file extension, falling back to content
    (#NEXUS header, a lone leading integer for PHYLIP, else CSV)."""
    if path is not None:
        fmt = _EXT_FORMATS.get(Path(path).suffix.lower())
        if fmt:
            return fmt
    if text is not None:
        stripped = text.lstrip()
        if stripped.upper().startswith("#NEXUS"):
            return "nexus"
        first = stripped.splitlines()[0].split() if stripped else []
        if len(first) == 1:
            try:
                int(first[0])
                return "phylip"
            except ValueError:
                pass
    return "csv"


def parse_matrix(text: str, fmt: str) -> DistanceMatrix:
    if fmt not in _PARSERS:
        raise ValueError(f"unknown matrix format {fmt!r}; choose from {FORMATS}")
    return _PARSERS[fmt](text)


def format_matrix(dm: DistanceMatrix, fmt: str) -> str:
    if fmt not in _FORMATTERS:
        raise ValueError(f"unknown matrix format {fmt!r}; choose from {FORMATS}")
    return _FORMATTERS[fmt](dm)


def read_distance_matrix(path: str | Path, fmt: str | None = None) -> DistanceMatrix:
    text = Path(path).read_text(encoding="utf-8")
    return parse_matrix(text, fmt or detect_format(path, text))


def write_distance_matrix(dm: DistanceMatrix, path: str | Path, fmt: str | None = None) -> None:
    fmt = fmt or detect_format(path, None)
    Path(path).write_text(format_matrix(dm, fmt), encoding="utf-8")
