"""OpenQASM 2.0 subset: tokenizer, recursive-descent parser, printable IR.

Supported statements: qreg, creg, the built-in gate set below, measure and
barrier (ignored).  ``include`` lines are accepted and skipped.  One
extension beyond OpenQASM 2.0: ``qram a, d;`` marks an oracle memory load
between two quantum registers; it lowers only when a memory file is supplied.
Parameter expressions cover pi, literals, parentheses, unary minus and
+ - * /.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional

from .errors import QasmSyntaxError, UndeclaredRegisterError, UnsupportedGateError

# name -> (parameter count, qubit operand count)
GATE_DEFS = {
    "x": (0, 1), "y": (0, 1), "z": (0, 1), "h": (0, 1),
    "s": (0, 1), "sdg": (0, 1), "t": (0, 1), "tdg": (0, 1),
    "rx": (1, 1), "ry": (1, 1), "rz": (1, 1),
    "u1": (1, 1), "u2": (2, 1), "u3": (3, 1),
    "cx": (0, 2), "cz": (0, 2), "ch": (0, 2), "swap": (0, 2),
    "ccx": (0, 3), "crz": (1, 2), "cu1": (1, 2),
    "qram": (0, 2),  # extension: whole-register oracle load
}

_TOKEN_RE = re.compile(r"""
      (?P<ws>[ \t\r]+)
    | (?P<comment>//[^\n]*)
    | (?P<newline>\n)
    | (?P<real>(\d+\.\d*|\.\d+)([eE][-+]?\d+)?|\d+[eE][-+]?\d+)
    | (?P<int>\d+)
    | (?P<id>[a-zA-Z_][a-zA-Z0-9_]*)
    | (?P<string>"[^"]*")
    | (?P<arrow>->)
    | (?P<sym>[\[\](){},;+\-*/])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    line: int
    col: int


def tokenize(text: str) -> list[Token]:
    tokens = []
    line, col = 1, 1
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QasmSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        tok = m.group()
        if kind == "newline":
            line += 1
            col = 1
        else:
            if kind not in ("ws", "comment"):
                tokens.append(Token(kind, tok, line, col))
            col += len(tok)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


@dataclass(frozen=True)
class QubitRef:
    """Operand reference: reg[index], or the whole register when index is None."""

    reg: str
    index: Optional[int] = None

    def __str__(self):
        return self.reg if self.index is None else f"{self.reg}[{self.index}]"


@dataclass(frozen=True)
class Instruction:
    name: str
    params: tuple[float, ...] = ()
    qubits: tuple[QubitRef, ...] = ()
    clbits: tuple[QubitRef, ...] = ()
    line: int = field(default=0, compare=False)
    col: int = field(default=0, compare=False)


@dataclass
class CircuitIR:
    """Parsed circuit: register declarations plus an ordered instruction list."""

    qregs: list[tuple[str, int]] = field(default_factory=list)
    cregs: list[tuple[str, int]] = field(default_factory=list)
    instructions: list[Instruction] = field(default_factory=list)

    @property
    def qubit_count(self) -> int:
        return sum(size for _, size in self.qregs)

    def __eq__(self, other):
        if not isinstance(other, CircuitIR):
            return NotImplemented
        return (self.qregs == other.qregs and self.cregs == other.cregs
                and self.instructions == other.instructions)

    def to_qasm(self) -> str:
        """Pretty-print back to OpenQASM 2.0 (parse(to_qasm(ir)) == ir)."""
        lines = ["OPENQASM 2.0;", 'include "qelib1.inc";']
        for name, size in self.qregs:
            lines.append(f"qreg {name}[{size}];")
        for name, size in self.cregs:
            lines.append(f"creg {name}[{size}];")
        for ins in self.instructions:
            if ins.name == "measure":
                for q, c in zip(ins.qubits, ins.clbits):
                    lines.append(f"measure {q} -> {c};")
                continue
            params = f"({','.join(repr(p) for p in ins.params)})" if ins.params else ""
            args = ",".join(str(q) for q in ins.qubits)
            lines.append(f"{ins.name}{params} {args};")
        return "\n".join(lines) + "\n"


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        if tok.kind != "eof":
            self.pos += 1
        return tok

    def expect(self, kind: str, text: Optional[str] = None) -> Token:
        tok = self.next()
        if tok.kind != kind or (text is not None and tok.text != text):
            want = text or kind
            raise QasmSyntaxError(f"expected {want!r}, found {tok.text!r}",
                                  tok.line, tok.col)
        return tok

    def accept(self, kind: str, text: Optional[str] = None) -> Optional[Token]:
        tok = self.peek()
        if tok.kind == kind and (text is None or tok.text == text):
            return self.next()
        return None

    # expression grammar: expr := term ((+|-) term)*, term := unary ((*|/) unary)*
    def parse_expr(self) -> float:
        value = self.parse_term()
        while True:
            if self.accept("sym", "+"):
                value += self.parse_term()
            elif self.accept("sym", "-"):
                value -= self.parse_term()
            else:
                return value

    def parse_term(self) -> float:
        value = self.parse_unary()
        while True:
            if self.accept("sym", "*"):
                value *= self.parse_unary()
            elif self.accept("sym", "/"):
                denom = self.parse_unary()
                if denom == 0:
                    tok = self.peek()
                    raise QasmSyntaxError("division by zero in parameter",
                                          tok.line, tok.col)
                value /= denom
            else:
                return value

    def parse_unary(self) -> float:
        if self.accept("sym", "-"):
            return -self.parse_unary()
        if self.accept("sym", "+"):
            return self.parse_unary()
        tok = self.next()
        if tok.kind in ("real", "int"):
            return float(tok.text)
        if tok.kind == "id" and tok.text == "pi":
            return math.pi
        if tok.kind == "sym" and tok.text == "(":
            value = self.parse_expr()
            self.expect("sym", ")")
            return value
        raise QasmSyntaxError(f"bad parameter expression near {tok.text!r}",
                              tok.line, tok.col)


def parse_qasm(text: str) -> CircuitIR:
    """Parse an OpenQASM 2.0 program into a CircuitIR."""
    p = _Parser(tokenize(text))
    head = p.expect("id", "OPENQASM")
    version = p.next()
    if version.text != "2.0":
        raise QasmSyntaxError(f"only OPENQASM 2.0 is supported, got {version.text!r}",
                              head.line, head.col)
    p.expect("sym", ";")

    ir = CircuitIR()
    qsizes: dict[str, int] = {}
    csizes: dict[str, int] = {}

    def parse_ref(sizes: dict[str, int], kind: str) -> QubitRef:
        name_tok = p.expect("id")
        if name_tok.text not in sizes:
            raise UndeclaredRegisterError(name_tok.text, name_tok.line, name_tok.col)
        if p.accept("sym", "["):
            idx_tok = p.expect("int")
            p.expect("sym", "]")
            idx = int(idx_tok.text)
            if idx >= sizes[name_tok.text]:
                raise QasmSyntaxError(
                    f"index {idx} out of range for {kind} '{name_tok.text}'",
                    idx_tok.line, idx_tok.col)
            return QubitRef(name_tok.text, idx)
        return QubitRef(name_tok.text)

    while True:
        tok = p.peek()
        if tok.kind == "eof":
            break
        if tok.kind != "id":
            raise QasmSyntaxError(f"unexpected {tok.text!r}", tok.line, tok.col)
        name = tok.text
        p.next()

        if name == "include":
            p.expect("string")
            p.expect("sym", ";")
            continue

        if name in ("qreg", "creg"):
            reg_tok = p.expect("id")
            p.expect("sym", "[")
            size_tok = p.expect("int")
            p.expect("sym", "]")
            p.expect("sym", ";")
            size = int(size_tok.text)
            if size < 1:
                raise QasmSyntaxError("register size must be >= 1",
                                      size_tok.line, size_tok.col)
            sizes = qsizes if name == "qreg" else csizes
            if reg_tok.text in qsizes or reg_tok.text in csizes:
                raise QasmSyntaxError(f"register '{reg_tok.text}' redeclared",
                                      reg_tok.line, reg_tok.col)
            sizes[reg_tok.text] = size
            (ir.qregs if name == "qreg" else ir.cregs).append((reg_tok.text, size))
            continue

        if name == "barrier":
            while not p.accept("sym", ";"):
                if p.peek().kind == "eof":
                    raise QasmSyntaxError("unterminated barrier", tok.line, tok.col)
                p.next()
            continue

        if name == "measure":
            q = parse_ref(qsizes, "qreg")
            p.expect("arrow")
            c = parse_ref(csizes, "creg")
            p.expect("sym", ";")
            if (q.index is None) != (c.index is None):
                raise QasmSyntaxError("measure operands must both be indexed "
                                      "or both whole registers", tok.line, tok.col)
            if q.index is None and qsizes[q.reg] != csizes[c.reg]:
                raise QasmSyntaxError("measure register sizes differ",
                                      tok.line, tok.col)
            ir.instructions.append(Instruction("measure", (), (q,), (c,),
                                               tok.line, tok.col))
            continue

        if name in ("gate", "opaque", "if", "reset"):
            raise UnsupportedGateError(name, tok.line, tok.col)

        if name not in GATE_DEFS:
            raise UnsupportedGateError(name, tok.line, tok.col)

        n_params, n_qubits = GATE_DEFS[name]
        params: list[float] = []
        if p.accept("sym", "("):
            if not p.accept("sym", ")"):
                params.append(p.parse_expr())
                while p.accept("sym", ","):
                    params.append(p.parse_expr())
                p.expect("sym", ")")
        if len(params) != n_params:
            raise QasmSyntaxError(
                f"gate '{name}' takes {n_params} parameter(s), got {len(params)}",
                tok.line, tok.col)
        qubits = [parse_ref(qsizes, "qreg")]
        while p.accept("sym", ","):
            qubits.append(parse_ref(qsizes, "qreg"))
        p.expect("sym", ";")
        if len(qubits) != n_qubits:
            raise QasmSyntaxError(
                f"gate '{name}' takes {n_qubits} operand(s), got {len(qubits)}",
                tok.line, tok.col)
        distinct = {(q.reg, q.index) for q in qubits if q.index is not None}
        if len(distinct) != sum(1 for q in qubits if q.index is not None):
            raise QasmSyntaxError(f"gate '{name}' operands must be distinct",
                                  tok.line, tok.col)
        ir.instructions.append(Instruction(name, tuple(params), tuple(qubits), (),
                                           tok.line, tok.col))

    return ir
