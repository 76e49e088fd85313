"""Text export/import for models: an LP dialect and classic fixed MPS.

Both writers are canonical: numbers are formatted with %.12g, every printed
variable sequence is sorted by variable name, and rows keep model order, so
export -> parse -> export is a byte-level fixpoint regardless of internal
variable numbering.

LP dialect (long names allowed, the practical format for full design models)::

    Minimize
     obj: 0.4 Co[0,1] + 2.4 z[0,1,0,1,0] + 7.4
    Subject To
     cap[0,1,0]: 1 z[0,1,0,1,0] - 10 y[1,0] <= 0
    Bounds
     0 <= z[0,1,0,1,0] <= 5
    Generals
     z[0,1,0,1,0]
    Binaries
     y[1,0]
    End

Every variable gets a Bounds line (binaries excepted: their kind implies
[0, 1]), so variables that appear in no row survive a round trip. A bare
number in an expression is a constant term (objective offset).

Fixed MPS uses 8-character name fields at the classic column positions, one
(row, value) pair per COLUMNS line, INTORG/INTEND markers for integers and
BV bounds for binaries; names longer than 8 are truncated and a resulting
collision is an error. The objective constant is carried as an RHS entry on
the objective row with flipped sign.
"""

from __future__ import annotations

from .milp import BINARY, CONTINUOUS, INF, INTEGER, MilpModel, ModelError


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


def _fmt(x: float) -> str:
    if x == 0:
        return "0"
    return f"{x:.12g}"


# ---------------------------------------------------------------------------
# LP text
# ---------------------------------------------------------------------------

def _lp_expr(named_terms: list[tuple[str, float]], constant: float = 0.0) -> str:
    parts: list[str] = []
    for name, coef in sorted(named_terms):
        sign = "-" if coef < 0 else "+"
        if not parts and sign == "+":
            parts.append(f"{_fmt(abs(coef))} {name}")
        else:
            parts.append(f"{sign} {_fmt(abs(coef))} {name}" if parts else f"- {_fmt(abs(coef))} {name}")
    if constant != 0.0:
        sign = "-" if constant < 0 else "+"
        parts.append(f"{sign} {_fmt(abs(constant))}" if parts else ("- " if sign == "-" else "") + _fmt(abs(constant)))
    if not parts:
        return "0"
    return " ".join(parts)


def write_lp(model: MilpModel) -> str:
    names = {v.id: v.name for v in model.variables}
    lines = ["Minimize"]
    obj = [(names[vid], coef) for vid, coef in model.objective_terms]
    lines.append(f" obj: {_lp_expr(obj, model.objective_constant)}")
    lines.append("Subject To")
    for con in model.constraints:
        expr = _lp_expr([(names[vid], coef) for vid, coef in con.terms])
        lines.append(f" {con.name}: {expr} {con.sense} {_fmt(con.rhs)}")
    lines.append("Bounds")
    for v in sorted(model.variables, key=lambda v: v.name):
        if v.kind == BINARY:
            continue
        lo = "-inf" if v.lo == -INF else _fmt(v.lo)
        hi = "+inf" if v.hi == INF else _fmt(v.hi)
        lines.append(f" {lo} <= {v.name} <= {hi}")
    generals = sorted(v.name for v in model.variables if v.kind == INTEGER)
    if generals:
        lines.append("Generals")
        lines.extend(f" {n}" for n in generals)
    binaries = sorted(v.name for v in model.variables if v.kind == BINARY)
    if binaries:
        lines.append("Binaries")
        lines.extend(f" {n}" for n in binaries)
    lines.append("End")
    return "\n".join(lines) + "\n"


def _parse_number(tok: str) -> float | None:
    try:
        return float(tok)
    except ValueError:
        return None


def _parse_lp_expr(tokens: list[str], lineno: int):
    """Yield (name or None, coefficient) pairs from sign/number/name tokens."""
    out = []
    sign = 1.0
    coef = None
    i = 0
    while i < len(tokens):
        tok = tokens[i]
        if tok in ("+", "-"):
            if coef is not None:
                out.append((None, sign * coef))
                coef = None
            sign = 1.0 if tok == "+" else -1.0
            i += 1
            continue
        num = _parse_number(tok)
        if num is not None:
            if coef is not None:
                out.append((None, sign * coef))
                sign = 1.0
            coef = num
            i += 1
            continue
        out.append((tok, sign * (1.0 if coef is None else coef)))
        sign, coef = 1.0, None
        i += 1
    if coef is not None:
        out.append((None, sign * coef))
    return out


def parse_lp(text: str) -> MilpModel:
    model = MilpModel()
    ids: dict[str, int] = {}

    def vid(name: str) -> int:
        if name not in ids:
            ids[name] = model.add_variable(name, CONTINUOUS, 0.0, INF)
        return ids[name]

    section = None
    obj_parts: list[str] = []
    obj_lineno = 0
    rows: list[tuple[int, str, str]] = []  # lineno, name, body
    bounds: list[tuple[int, str]] = []
    generals: list[str] = []
    binaries: list[str] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("\\")[0].rstrip()
        if not line.strip():
            continue
        head = line.strip().lower()
        if head in ("minimize", "subject to", "bounds", "generals", "binaries", "end"):
            section = head
            continue
        body = line.strip()
        if section == "minimize":
            if ":" in body:
                body = body.split(":", 1)[1].strip()
            obj_parts.append(body)
            obj_lineno = lineno
        elif section == "subject to":
            if ":" not in body:
                raise ParseError(lineno, "constraint line needs 'name:'")
            name, _, rest = body.partition(":")
            rows.append((lineno, name.strip(), rest.strip()))
        elif section == "bounds":
            bounds.append((lineno, body))
        elif section == "generals":
            generals.extend(body.split())
        elif section == "binaries":
            binaries.extend(body.split())
        elif section is None:
            raise ParseError(lineno, "content before Minimize header")

    if obj_parts:
        constant = 0.0
        terms = []
        for name, coef in _parse_lp_expr(" ".join(obj_parts).split(), obj_lineno):
            if name is None:
                constant += coef
            else:
                terms.append((vid(name), coef))
        model.set_objective(terms, constant)
    for lineno, name, rest in rows:
        toks = rest.split()
        sense_pos = [i for i, t in enumerate(toks) if t in ("<=", "=", ">=")]
        if len(sense_pos) != 1:
            raise ParseError(lineno, "constraint needs exactly one of <=, =, >=")
        pos = sense_pos[0]
        rhs_toks = toks[pos + 1 :]
        if len(rhs_toks) != 1 or _parse_number(rhs_toks[0]) is None:
            raise ParseError(lineno, "right-hand side must be a single number")
        terms = []
        for nm, coef in _parse_lp_expr(toks[:pos], lineno):
            if nm is None:
                if coef != 0.0:
                    raise ParseError(lineno, "constant terms belong on the right-hand side")
                continue
            terms.append((vid(nm), coef))
        model.add_constraint(name, terms, toks[pos], float(rhs_toks[0]))
    # bounds/kind sections may mention variables not seen in any row
    kind_overrides: dict[str, str] = {}
    for nm in generals:
        kind_overrides[nm] = INTEGER
    for nm in binaries:
        kind_overrides[nm] = BINARY
    bound_overrides: dict[str, tuple[float, float]] = {}
    for lineno, body in bounds:
        toks = body.split()
        if len(toks) == 2 and toks[1].lower() == "free":
            bound_overrides[toks[0]] = (-INF, INF)
            vid(toks[0])
            continue
        if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
            lo = -INF if toks[0].lower() in ("-inf", "-infinity") else float(toks[0])
            hi = INF if toks[4].lower() in ("+inf", "inf", "+infinity") else float(toks[4])
            bound_overrides[toks[2]] = (lo, hi)
            vid(toks[2])
            continue
        raise ParseError(lineno, "expected 'lo <= name <= hi' or 'name free'")
    for nm in kind_overrides:
        vid(nm)
    # rebuild variables with final kinds/bounds, preserving ids
    final = []
    for v in model.variables:
        kind = kind_overrides.get(v.name, CONTINUOUS)
        if kind == BINARY:
            lo, hi = 0.0, 1.0
        else:
            lo, hi = bound_overrides.get(v.name, (0.0, INF))
        final.append((v.name, kind, lo, hi))
    rebuilt = MilpModel(model.name)
    for name, kind, lo, hi in final:
        rebuilt.add_variable(name, kind, lo, hi)
    for con in model.constraints:
        rebuilt.add_constraint(con.name, con.terms, con.sense, con.rhs)
    rebuilt.set_objective(model.objective_terms, model.objective_constant)
    return rebuilt


# ---------------------------------------------------------------------------
# fixed MPS
# ---------------------------------------------------------------------------

_OBJ_ROW = "COST"


def _mps_name(name: str, seen: dict[str, str]) -> str:
    short = name[:8]
    if short in seen and seen[short] != name:
        raise ModelError(f"MPS name collision after truncation: {name!r} and {seen[short]!r} both map to {short!r}")
    seen[short] = name
    return short


def write_mps(model: MilpModel) -> str:
    seen_rows: dict[str, str] = {_OBJ_ROW: _OBJ_ROW}
    seen_cols: dict[str, str] = {}
    row_names = {con.id: _mps_name(con.name, seen_rows) for con in model.constraints}
    col_names = {v.id: _mps_name(v.name, seen_cols) for v in model.variables}

    lines = [f"NAME          {model.name[:8]}"]
    lines.append("ROWS")
    lines.append(f" N  {_OBJ_ROW}")
    sense_tag = {"<=": "L", ">=": "G", "=": "E"}
    for con in model.constraints:
        lines.append(f" {sense_tag[con.sense]}  {row_names[con.id]}")
    obj = {vid: coef for vid, coef in model.objective_terms}
    by_var: dict[int, list[tuple[str, float]]] = {v.id: [] for v in model.variables}
    for con in model.constraints:
        for vid, coef in con.terms:
            by_var[vid].append((row_names[con.id], coef))
    lines.append("COLUMNS")
    in_int = False
    marker = 0
    for v in sorted(model.variables, key=lambda v: v.name):
        want_int = v.kind in (BINARY, INTEGER)
        if want_int != in_int:
            tag = "'INTORG'" if want_int else "'INTEND'"
            lines.append(f"    MARKER{marker:02d}  'MARKER'                 {tag}")
            marker += 1
            in_int = want_int
        entries = [(_OBJ_ROW, obj.get(v.id, 0.0))] + by_var[v.id]
        for row, coef in entries:
            lines.append(f"    {col_names[v.id]:<8}  {row:<8}  {_fmt(coef)}")
    if in_int:
        lines.append(f"    MARKER{marker:02d}  'MARKER'                 'INTEND'")
    lines.append("RHS")
    if model.objective_constant != 0.0:
        lines.append(f"    RHS       {_OBJ_ROW:<8}  {_fmt(-model.objective_constant)}")
    for con in model.constraints:
        lines.append(f"    RHS       {row_names[con.id]:<8}  {_fmt(con.rhs)}")
    lines.append("BOUNDS")
    for v in sorted(model.variables, key=lambda v: v.name):
        nm = col_names[v.id]
        if v.kind == BINARY:
            lines.append(f" BV BND       {nm}")
            continue
        if v.lo == -INF:
            lines.append(f" MI BND       {nm}")
        else:
            lines.append(f" LO BND       {nm:<8}  {_fmt(v.lo)}")
        if v.hi == INF:
            lines.append(f" PL BND       {nm}")
        else:
            lines.append(f" UP BND       {nm:<8}  {_fmt(v.hi)}")
    lines.append("ENDATA")
    return "\n".join(lines) + "\n"


def parse_mps(text: str) -> MilpModel:
    model = MilpModel()
    section = None
    row_sense: dict[str, str] = {}
    obj_row = None
    row_order: list[str] = []
    col_kind: dict[str, str] = {}
    col_entries: dict[str, list[tuple[str, float]]] = {}
    col_order: list[str] = []
    rhs: dict[str, float] = {}
    bounds: dict[str, dict[str, float | None]] = {}
    in_int = False
    tag_by_sense = {"L": "<=", "G": ">=", "E": "="}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("*"):
            continue
        if not raw.startswith(" "):
            head = raw.split()
            section = head[0].upper()
            if section == "NAME" and len(head) > 1:
                model.name = head[1]
            if section == "ENDATA":
                break
            continue
        toks = raw.split()
        if section == "ROWS":
            if len(toks) != 2 or toks[0] not in ("N", "L", "G", "E"):
                raise ParseError(lineno, "ROWS line must be '<type> <name>'")
            if toks[0] == "N":
                if obj_row is None:
                    obj_row = toks[1]
            else:
                row_sense[toks[1]] = tag_by_sense[toks[0]]
                row_order.append(toks[1])
        elif section == "COLUMNS":
            if len(toks) >= 3 and toks[1] == "'MARKER'":
                in_int = toks[2] == "'INTORG'"
                continue
            if len(toks) not in (3, 5):
                raise ParseError(lineno, "COLUMNS line must be 'col row value [row value]'")
            col = toks[0]
            if col not in col_entries:
                col_entries[col] = []
                col_order.append(col)
                col_kind[col] = INTEGER if in_int else CONTINUOUS
            for off in range(1, len(toks), 2):
                row, val = toks[off], _parse_number(toks[off + 1])
                if val is None:
                    raise ParseError(lineno, f"bad number {toks[off + 1]!r}")
                col_entries[col].append((row, val))
        elif section == "RHS":
            for off in range(1, len(toks), 2):
                val = _parse_number(toks[off + 1])
                if val is None:
                    raise ParseError(lineno, f"bad number {toks[off + 1]!r}")
                rhs[toks[off]] = val
        elif section == "BOUNDS":
            tag = toks[0].upper()
            if tag in ("BV", "MI", "PL", "FR"):
                name = toks[2]
                val = None
            elif tag in ("UP", "LO", "FX"):
                if len(toks) != 4:
                    raise ParseError(lineno, f"{tag} bound needs a value")
                name = toks[2]
                val = _parse_number(toks[3])
                if val is None:
                    raise ParseError(lineno, f"bad number {toks[3]!r}")
            else:
                raise ParseError(lineno, f"unsupported bound tag {tag!r}")
            spot = bounds.setdefault(name, {})
            spot[tag] = val
            if name not in col_entries:
                col_entries[name] = []
                col_order.append(name)
                col_kind[name] = CONTINUOUS
        elif section in ("RANGES",):
            raise ParseError(lineno, "RANGES not supported")
    if obj_row is None:
        raise ParseError(0, "no objective (N) row")

    for col in col_order:
        spot = bounds.get(col, {})
        if "BV" in spot:
            model.add_variable(col, BINARY)
            continue
        lo, hi = 0.0, INF
        if "MI" in spot:
            lo = -INF
        if "LO" in spot:
            lo = spot["LO"]
        if "FX" in spot:
            lo = hi = spot["FX"]
        if "UP" in spot:
            hi = spot["UP"]
        if "FR" in spot:
            lo, hi = -INF, INF
        model.add_variable(col, col_kind[col], lo, hi)
    terms_by_row: dict[str, list[tuple[int, float]]] = {r: [] for r in row_order}
    obj_terms: list[tuple[int, float]] = []
    for col in col_order:
        cid = model.var_id(col)
        for row, val in col_entries[col]:
            if row == obj_row:
                if val != 0.0:
                    obj_terms.append((cid, val))
            elif row in terms_by_row:
                terms_by_row[row].append((cid, val))
            else:
                raise ParseError(0, f"COLUMNS references undeclared row {row!r}")
    for row in row_order:
        model.add_constraint(row, terms_by_row[row], row_sense[row], rhs.get(row, 0.0))
    model.set_objective(obj_terms, -rhs.get(obj_row, 0.0))
    return model


# ---------------------------------------------------------------------------
# front door
# ---------------------------------------------------------------------------

FORMATS = ("lp-text", "mps-fixed")


def export_model(model: MilpModel, fmt: str) -> str:
    if fmt == "lp-text":
        return write_lp(model)
    if fmt == "mps-fixed":
        return write_mps(model)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def parse_model(text: str, fmt: str) -> MilpModel:
    if fmt == "lp-text":
        return parse_lp(text)
    if fmt == "mps-fixed":
        return parse_mps(text)
    raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def models_equal(a: MilpModel, b: MilpModel) -> bool:
    """Structural equality by variable name: kinds, bounds, rows, objective."""

    def vars_view(m: MilpModel):
        return sorted((v.name, v.kind, v.lo, v.hi) for v in m.variables)

    def rows_view(m: MilpModel):
        names = {v.id: v.name for v in m.variables}
        return [
            (c.name, c.sense, c.rhs, tuple(sorted((names[vid], coef) for vid, coef in c.terms)))
            for c in m.constraints
        ]

    def obj_view(m: MilpModel):
        names = {v.id: v.name for v in m.variables}
        return (tuple(sorted((names[vid], coef) for vid, coef in m.objective_terms)), m.objective_constant)

    return vars_view(a) == vars_view(b) and rows_view(a) == rows_view(b) and obj_view(a) == obj_view(b)
