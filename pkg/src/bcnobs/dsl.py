"""Text formats: the ``.bcn`` model grammar and the ``.csv`` trace format.

Model grammar (line oriented, ``#`` starts a comment):

    states:  NAME ...          required header (any line order)
    inputs:  NAME ...          optional, default none
    outputs: NAME ...          optional, default none; names of states
    NAME <= EXPR               exactly one update per declared state

Expressions use ``!`` ``&`` ``^`` ``|`` with precedence NOT > AND > XOR >
OR, parentheses, and the literals ``0``/``1``. Identifiers match
``[A-Za-z_][A-Za-z0-9_]*``. Parsing reduces the model, so the result only
mentions essential arguments.

Traces are CSV with header ``k,u:NAME...,y:NAME...``. Row ``k`` carries the
input applied at time ``k`` and the output observed at time ``k``; the
final row may leave every ``u:`` cell empty, because a record of N inputs
supports N+1 observations. Writers emit the canonical form byte for byte;
readers tolerate surrounding whitespace and CRLF endings.
"""

from __future__ import annotations

import re

from .errors import ArityCapError, Diagnostic, ParseError, TraceError
from .model import (And, BcnModel, Bits, Const, Expr, InputRef, Not, Or,
                    StateRef, Xor, reduce_fictitious)

_HEADER_RE = re.compile(r"^(\s*)(states|inputs|outputs)\s*:(.*)$")
_TOKEN_RE = re.compile(
    r"[ \t]*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<bit>[01])"
    r"|(?P<arrow><=)|(?P<punct>[!&^|()])|(?P<bad>\S))"
)


def _tokenize(text: str, line_no: int, diagnostics: list[Diagnostic]):
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:  # only trailing whitespace left
            break
        col = match.start(match.lastgroup) + 1
        value = match.group(match.lastgroup)
        if match.lastgroup == "bad":
            diagnostics.append(Diagnostic(line_no, col, f"unexpected character {value!r}"))
            return None
        kind = value if match.lastgroup == "punct" else match.lastgroup
        tokens.append((kind, value, col))
        pos = match.end()
    tokens.append(("end", "", len(text) + 1))
    return tokens


class _ExprParser:
    """Recursive descent over one update's tokens; NOT > AND > XOR > OR."""

    def __init__(self, tokens, line_no, symbols, diagnostics):
        self.tokens = tokens
        self.i = 0
        self.line = line_no
        self.symbols = symbols
        self.diagnostics = diagnostics
        self.failed = False

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        if tok[0] != "end":
            self.i += 1
        return tok

    def fail(self, col, message):
        if not self.failed:
            self.diagnostics.append(Diagnostic(self.line, col, message))
            self.failed = True
        return Const(0)

    def expression(self) -> Expr:
        return self._chain("|", lambda: self._chain("^", lambda: self._chain("&", self._unary)), after=None)

    def _chain(self, op, sub, after=None):
        parts = [sub()]
        while self.peek()[0] == op:
            self.take()
            parts.append(sub())
        if len(parts) == 1:
            return parts[0]
        cls = {"|": Or, "^": Xor, "&": And}[op]
        return cls(tuple(parts))

    def _unary(self) -> Expr:
        kind, value, col = self.peek()
        if kind == "!":
            self.take()
            return Not(self._unary())
        if kind == "(":
            self.take()
            inner = self.expression()
            k2, _, c2 = self.peek()
            if k2 != ")":
                return self.fail(c2, "expected ')'")
            self.take()
            return inner
        if kind == "bit":
            self.take()
            return Const(int(value))
        if kind == "name":
            self.take()
            ref = self.symbols.get(value)
            if ref is None:
                return self.fail(col, f"undeclared identifier {value!r}")
            return ref
        return self.fail(col, "expected an expression")


def parse(text: str, *, arity_cap: int = 20) -> BcnModel:
    """Parse and reduce a model; raises :class:`ParseError` with diagnostics."""
    diagnostics: list[Diagnostic] = []
    headers: dict[str, tuple[int, list[tuple[str, int]]]] = {}
    update_lines: list[tuple[int, list]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].rstrip()
        if not line.strip():
            continue
        header = _HEADER_RE.match(line)
        if header:
            kind = header.group(2)
            if kind in headers:
                col = len(header.group(1)) + 1
                diagnostics.append(Diagnostic(line_no, col, f"duplicate '{kind}:' line"))
                continue
            names = []
            offset = header.end(3) - len(header.group(3))
            for m in re.finditer(r"\S+", header.group(3)):
                word, col = m.group(), offset + m.start()
                if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", word):
                    diagnostics.append(Diagnostic(line_no, col, f"bad identifier {word!r}"))
                else:
                    names.append((word, col))
            headers[kind] = (line_no, names)
            continue
        tokens = _tokenize(line, line_no, diagnostics)
        if tokens is not None:
            update_lines.append((line_no, tokens))

    if "states" not in headers:
        diagnostics.append(Diagnostic(1, 1, "missing 'states:' line"))
        raise ParseError(diagnostics)

    state_names = [n for n, _ in headers["states"][1]]
    input_names = [n for n, _ in headers.get("inputs", (0, []))[1]]

    symbols: dict[str, StateRef | InputRef] = {}
    line_of = {"states": headers["states"][0],
               "inputs": headers.get("inputs", (0, []))[0]}
    for kind, names in (("states", headers["states"][1]),
                        ("inputs", headers.get("inputs", (0, []))[1])):
        for idx, (name, col) in enumerate(names, start=1):
            if name in symbols:
                diagnostics.append(Diagnostic(line_of[kind], col, f"duplicate declaration of {name!r}"))
            else:
                symbols[name] = StateRef(idx) if kind == "states" else InputRef(idx)

    outputs: list[int] = []
    for name, col in headers.get("outputs", (0, []))[1]:
        out_line = headers["outputs"][0]
        ref = symbols.get(name)
        if not isinstance(ref, StateRef):
            diagnostics.append(Diagnostic(out_line, col, f"output {name!r} is not a declared state"))
        elif ref.index in outputs:
            diagnostics.append(Diagnostic(out_line, col, f"duplicate output {name!r}"))
        else:
            outputs.append(ref.index)

    updates: dict[int, Expr] = {}
    update_line_no: dict[int, int] = {}
    for line_no, tokens in update_lines:
        kind, value, col = tokens[0]
        if kind != "name":
            diagnostics.append(Diagnostic(line_no, col, "expected 'NAME <= EXPR'"))
            continue
        if tokens[1][0] != "arrow":
            diagnostics.append(Diagnostic(line_no, tokens[1][2], "expected '<=' after the state name"))
            continue
        target = symbols.get(value)
        if not isinstance(target, StateRef):
            diagnostics.append(Diagnostic(line_no, col, f"update target {value!r} is not a declared state"))
            continue
        if target.index in updates:
            diagnostics.append(Diagnostic(line_no, col, f"duplicate update for {value!r}"))
            continue
        parser = _ExprParser(tokens[2:], line_no, symbols, diagnostics)
        expr = parser.expression()
        kind, _, col = parser.peek()
        if kind != "end" and not parser.failed:
            diagnostics.append(Diagnostic(line_no, col, "unexpected trailing tokens"))
            continue
        if not parser.failed:
            updates[target.index] = expr
            update_line_no[target.index] = line_no

    for idx, name in enumerate(state_names, start=1):
        if idx not in updates and name in symbols and isinstance(symbols[name], StateRef):
            diagnostics.append(Diagnostic(headers["states"][0], 1, f"missing update for state {name!r}"))

    if diagnostics:
        raise ParseError(diagnostics)

    model = BcnModel.make([updates[i] for i in range(1, len(state_names) + 1)],
                          p=len(input_names), outputs=outputs,
                          state_names=state_names, input_names=input_names)
    try:
        return reduce_fictitious(model, arity_cap=arity_cap)
    except ArityCapError as exc:
        line = update_line_no.get(exc.update_index or 0, 1)
        raise ParseError([Diagnostic(line, 1, str(exc))]) from exc


_PRECEDENCE = {Or: 1, Xor: 2, And: 3, Not: 4}
_SYMBOL = {Or: " | ", Xor: " ^ ", And: " & "}


def _fmt(model: BcnModel, expr: Expr, parent_level: int) -> str:
    if isinstance(expr, Const):
        return str(expr.value)
    if isinstance(expr, StateRef):
        return model.state_names[expr.index - 1]
    if isinstance(expr, InputRef):
        return model.input_names[expr.index - 1]
    level = _PRECEDENCE[type(expr)]
    if isinstance(expr, Not):
        text = "!" + _fmt(model, expr.child, level)
    else:
        text = _SYMBOL[type(expr)].join(_fmt(model, c, level) for c in expr.children)
    return f"({text})" if level < parent_level else text


def serialize(model: BcnModel) -> str:
    """Canonical source text; reparsing yields a semantically equal model."""
    lines = ["states: " + " ".join(model.state_names) if model.state_names else "states:",
             "inputs: " + " ".join(model.input_names) if model.input_names else "inputs:",
             "outputs: " + " ".join(model.state_names[o - 1] for o in model.outputs)
             if model.outputs else "outputs:",
             ""]
    for name, update in zip(model.state_names, model.updates):
        lines.append(f"{name} <= {_fmt(model, update, 0)}")
    return "\n".join(lines) + "\n"


TraceRecord = tuple[Bits | None, Bits]


def write_trace(records: list[TraceRecord], model: BcnModel) -> str:
    """Canonical CSV for a list of (input, output) records.

    Only the final record may carry ``None`` as its input; it stands for the
    trailing output-only sample.
    """
    header = (["k"] + [f"u:{name}" for name in model.input_names]
              + [f"y:{model.state_names[o - 1]}" for o in model.outputs])
    lines = [",".join(header)]
    for k, (u, y) in enumerate(records):
        if u is None and k != len(records) - 1:
            raise TraceError("only the final record may omit the input")
        if u is not None and len(u) != model.p:
            raise TraceError(f"record {k} input width {len(u)}, expected {model.p}")
        if len(y) != model.m:
            raise TraceError(f"record {k} output width {len(y)}, expected {model.m}")
        u_cells = [""] * model.p if u is None else [str(b) for b in u]
        lines.append(",".join([str(k)] + u_cells + [str(b) for b in y]))
    return "\n".join(lines) + "\n"


def _parse_cell_bit(cell: str, line_no: int) -> int:
    if cell not in ("0", "1"):
        raise TraceError(f"non-bit value {cell!r}", line_no)
    return int(cell)


def read_trace(text: str, model: BcnModel) -> list[TraceRecord]:
    """Records from trace CSV, bound to the model by the header names.

    For models without inputs the final record's input is reported as
    ``None``, mirroring the written form.
    """
    rows = [(i, [c.strip() for c in line.split(",")])
            for i, line in enumerate(text.splitlines(), start=1) if line.strip()]
    if not rows:
        raise TraceError("empty trace: missing header")
    header_line, header = rows[0]
    if header[0] != "k":
        raise TraceError("first column must be 'k'", header_line)
    u_cols: dict[int, int] = {}
    y_cols: dict[int, int] = {}
    input_pos = {name: q for q, name in enumerate(model.input_names)}
    output_pos = {model.state_names[o - 1]: j for j, o in enumerate(model.outputs)}
    for col, cell in enumerate(header[1:], start=1):
        kind, _, name = cell.partition(":")
        if kind == "u" and name in input_pos:
            if input_pos[name] in u_cols.values():
                raise TraceError(f"duplicate column {cell!r}", header_line)
            u_cols[col] = input_pos[name]
        elif kind == "y" and name in output_pos:
            if output_pos[name] in y_cols.values():
                raise TraceError(f"duplicate column {cell!r}", header_line)
            y_cols[col] = output_pos[name]
        else:
            raise TraceError(f"unknown column {cell!r}", header_line)
    if len(u_cols) != model.p or len(y_cols) != model.m:
        raise TraceError("header does not cover every input and output", header_line)

    records: list[TraceRecord] = []
    for row_index, (line_no, cells) in enumerate(rows[1:]):
        if len(cells) != 1 + model.p + model.m:
            raise TraceError(f"expected {1 + model.p + model.m} cells, got {len(cells)}", line_no)
        try:
            k = int(cells[0])
        except ValueError:
            raise TraceError(f"bad time index {cells[0]!r}", line_no) from None
        if k != row_index:
            raise TraceError(f"time index {k} breaks the 0,1,2,... sequence", line_no)
        u_bits: list[int | None] = [None] * model.p
        for col, q in u_cols.items():
            u_bits[q] = None if cells[col] == "" else _parse_cell_bit(cells[col], line_no)
        y_bits = [0] * model.m
        for col, j in y_cols.items():
            y_bits[j] = _parse_cell_bit(cells[col], line_no)
        if any(b is None for b in u_bits):
            if not all(b is None for b in u_bits):
                raise TraceError("inputs must be all present or all empty", line_no)
            if row_index != len(rows) - 2:
                raise TraceError("only the final record may omit the input", line_no)
            u: Bits | None = None
        else:
            u = tuple(u_bits)  # type: ignore[arg-type]
        records.append((u, tuple(y_bits)))
    if model.p == 0 and records:
        records[-1] = (None, records[-1][1])
    return records
