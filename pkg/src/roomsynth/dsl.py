"""Straight-line module programs: grammar, parser, typechecker, interpreter.

One statement per nonblank line:

    IDENT '=' MODULE '(' [IDENT '=' value {',' IDENT '=' value}] ')'

Values are single- or double-quoted strings with backslash escapes, decimal
numbers, bracketed number lists, or variable references.  '#' starts a
comment.  Variables are single-assignment and must be defined before use.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    code: str
    message: str

    def __str__(self):
        return f"{self.line}:{self.column}: {self.code}: {self.message}"


class ProgramError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(str(d) for d in self.diagnostics))


@dataclass(frozen=True)
class VarRef:
    name: str


Value = str | float | int | list | VarRef


@dataclass(frozen=True)
class Statement:
    target: str
    module: str
    args: tuple[tuple[str, Value], ...]
    line: int = 0

    @property
    def arg_dict(self) -> dict[str, Value]:
        return dict(self.args)


@dataclass(frozen=True)
class Program:
    statements: tuple[Statement, ...]
    source_text: str = ""


_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_NUMBER = re.compile(r"-?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?")


class _LineParser:
    def __init__(self, text: str, line: int):
        self.text = text
        self.line = line
        self.pos = 0

    def error(self, code, msg):
        raise ProgramError([Diagnostic(self.line, self.pos + 1, code, msg)])

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self):
        self.skip_ws()
        return self.pos >= len(self.text)

    def expect(self, ch):
        self.skip_ws()
        if self.pos >= len(self.text) or self.text[self.pos] != ch:
            self.error("syntax", f"expected {ch!r}")
        self.pos += 1

    def peek(self):
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def ident(self):
        self.skip_ws()
        m = _IDENT.match(self.text, self.pos)
        if not m:
            self.error("syntax", "expected identifier")
        self.pos = m.end()
        return m.group()

    def string(self):
        quote = self.text[self.pos]
        self.pos += 1
        out = []
        while True:
            if self.pos >= len(self.text):
                self.error("syntax", "unterminated string")
            ch = self.text[self.pos]
            self.pos += 1
            if ch == "\\":
                if self.pos >= len(self.text):
                    self.error("syntax", "dangling escape")
                esc = self.text[self.pos]
                self.pos += 1
                out.append({"n": "\n", "t": "\t", "\\": "\\", "'": "'",
                            '"': '"'}.get(esc, esc))
            elif ch == quote:
                return "".join(out)
            else:
                out.append(ch)

    def number(self):
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.error("syntax", "expected number")
        self.pos = m.end()
        text = m.group()
        return int(text) if re.fullmatch(r"-?\d+", text) else float(text)

    def value(self) -> Value:
        self.skip_ws()
        ch = self.peek()
        if ch and ch in "'\"":
            return self.string()
        if ch == "[":
            self.pos += 1
            items = []
            if self.peek() == "]":
                self.pos += 1
                return items
            while True:
                self.skip_ws()
                items.append(self.number())
                ch = self.peek()
                if ch == ",":
                    self.pos += 1
                elif ch == "]":
                    self.pos += 1
                    return items
                else:
                    self.error("syntax", "expected ',' or ']' in list")
        if ch and (ch.isdigit() or ch in "-."):
            return self.number()
        if ch and (ch.isalpha() or ch == "_"):
            return VarRef(self.ident())
        self.error("syntax", "expected a value")


def parse_program(text: str, predefined: set[str] | None = None) -> Program:
    """Parse program text; raises ProgramError carrying line/column
    diagnostics on the first syntax error, and collects scoping errors.

    `predefined` names an environment's pre-seeded variables, which count
    as assigned (at line 0) for scoping purposes.
    """
    statements = []
    diags: list[Diagnostic] = []
    assigned: dict[str, int] = {name: 0 for name in (predefined or ())}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = _strip_comment(raw)
        if not line.strip():
            continue
        p = _LineParser(line, lineno)
        target = p.ident()
        p.expect("=")
        module = p.ident()
        p.expect("(")
        args: list[tuple[str, Value]] = []
        seen = set()
        if p.peek() != ")":
            while True:
                name = p.ident()
                p.expect("=")
                val = p.value()
                if name in seen:
                    diags.append(Diagnostic(lineno, p.pos, "duplicate-argument",
                                            f"argument {name!r} repeated"))
                seen.add(name)
                args.append((name, val))
                if p.peek() == ",":
                    p.pos += 1
                else:
                    break
        p.expect(")")
        if not p.at_end():
            p.error("syntax", "trailing characters after statement")
        if target in assigned:
            diags.append(Diagnostic(lineno, 1, "duplicate-assignment",
                                    f"variable {target!r} already assigned at "
                                    f"line {assigned[target]}"))
        for name, val in args:
            if isinstance(val, VarRef) and val.name not in assigned:
                diags.append(Diagnostic(lineno, 1, "use-before-assignment",
                                        f"variable {val.name!r} used before "
                                        "assignment"))
        assigned.setdefault(target, lineno)
        statements.append(Statement(target=target, module=module,
                                    args=tuple(args), line=lineno))
    if not statements:
        diags.append(Diagnostic(1, 1, "empty-program", "program has no statements"))
    if diags:
        raise ProgramError(diags)
    return Program(statements=tuple(statements), source_text=text)


def _strip_comment(line: str) -> str:
    out = []
    quote = None
    i = 0
    while i < len(line):
        ch = line[i]
        if quote:
            if ch == "\\":
                out.append(line[i:i + 2])
                i += 2
                continue
            if ch == quote:
                quote = None
        elif ch in "'\"":
            quote = ch
        elif ch == "#":
            break
        out.append(ch)
        i += 1
    return "".join(out)


def _format_value(v: Value) -> str:
    if isinstance(v, VarRef):
        return v.name
    if isinstance(v, str):
        escaped = (v.replace("\\", "\\\\").replace("'", "\\'")
                   .replace("\n", "\\n").replace("\t", "\\t"))
        return f"'{escaped}'"
    if isinstance(v, list):
        return "[" + ", ".join(_format_number(x) for x in v) + "]"
    return _format_number(v)


def _format_number(x) -> str:
    if isinstance(x, int):
        return str(x)
    return repr(float(x))


def serialize_program(program: Program) -> str:
    """Canonical text form; parse(serialize(p)) is structurally equal to p."""
    lines = []
    for st in program.statements:
        args = ", ".join(f"{k}={_format_value(v)}" for k, v in st.args)
        lines.append(f"{st.target}={st.module}({args})")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Registry, typecheck, execute
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Param:
    name: str
    type: str
    required: bool = True


@dataclass(frozen=True)
class ModuleSignature:
    params: tuple[Param, ...]
    result: str


@dataclass
class ModuleRegistry:
    entries: dict[str, tuple[ModuleSignature, object]] = field(default_factory=dict)

    def register(self, name: str, signature: ModuleSignature, handler,
                 replace: bool = False) -> None:
        if name in self.entries and not replace:
            raise ValueError(f"module {name!r} already registered "
                             "(pass replace=True to swap the handler)")
        self.entries[name] = (signature, handler)

    def __contains__(self, name):
        return name in self.entries

    def signature(self, name: str) -> ModuleSignature:
        return self.entries[name][0]

    def handler(self, name: str):
        return self.entries[name][1]


class MultiBinding:
    """Handler result that merges extra named bindings into the environment
    in addition to the statement's own target (used by LoadRoom)."""

    def __init__(self, primary, primary_type: str, extra: dict):
        self.primary = primary
        self.primary_type = primary_type
        self.extra = dict(extra)  # name -> (typed value, semantic type)


@dataclass
class Binding:
    value: object
    type: str


@dataclass
class Environment:
    bindings: dict[str, Binding] = field(default_factory=dict)

    def bind(self, name: str, value, type_: str) -> None:
        if name in self.bindings:
            raise ExecutionError(
                f"variable {name!r} already bound in this environment", line=0)
        self.bindings[name] = Binding(value=value, type=type_)

    def types(self) -> dict[str, str]:
        return {k: b.type for k, b in self.bindings.items()}


def _literal_type(v: Value) -> str:
    if isinstance(v, str):
        return "text"
    if isinstance(v, list):
        return "number_list"
    return "number"


def typecheck(program: Program, registry: ModuleRegistry,
              env_types: dict[str, str] | None = None) -> list[Diagnostic]:
    """Static check against registry signatures; returns diagnostics, never
    raises."""
    diags: list[Diagnostic] = []
    var_types = dict(env_types or {})
    for st in program.statements:
        if st.module not in registry:
            diags.append(Diagnostic(st.line, 1, "unknown-module",
                                    f"module {st.module!r} is not registered"))
            var_types.setdefault(st.target, "unknown")
            continue
        sig = registry.signature(st.module)
        declared = {p.name: p for p in sig.params}
        given = st.arg_dict
        for p in sig.params:
            if p.required and p.name not in given:
                diags.append(Diagnostic(st.line, 1, "missing-argument",
                                        f"{st.module} requires argument "
                                        f"{p.name!r}"))
        for name, val in st.args:
            if name not in declared:
                diags.append(Diagnostic(st.line, 1, "unknown-argument",
                                        f"{st.module} has no argument {name!r}"))
                continue
            want = declared[name].type
            if isinstance(val, VarRef):
                got = var_types.get(val.name, "unknown")
            else:
                got = _literal_type(val)
            if got not in ("unknown", want):
                diags.append(Diagnostic(st.line, 1, "type-mismatch",
                                        f"argument {name!r} of {st.module} "
                                        f"expects {want}, got {got}"))
        var_types.setdefault(st.target, sig.result)
    return diags


class ExecutionError(RuntimeError):
    def __init__(self, message, line: int, env: Environment | None = None,
                 cause: Exception | None = None):
        super().__init__(f"line {line}: {message}" if line else message)
        self.line = line
        self.env = env
        self.cause = cause


def execute(program: Program, env: Environment, registry: ModuleRegistry
            ) -> Environment:
    """Run statements in order; on handler failure stops and raises
    ExecutionError carrying the failing line and the partial environment."""
    diags = typecheck(program, registry, env.types())
    if diags:
        raise ProgramError(diags)
    for st in program.statements:
        if st.target in env.bindings:
            raise ExecutionError(f"variable {st.target!r} collides with a "
                                 "pre-seeded binding", line=st.line, env=env)
        sig = registry.signature(st.module)
        handler = registry.handler(st.module)
        kwargs = {}
        for name, val in st.args:
            kwargs[name] = env.bindings[val.name].value if isinstance(val, VarRef) else val
        try:
            result = handler(**kwargs)
        except Exception as exc:  # noqa: BLE001 - reported with line context
            raise ExecutionError(f"{st.module} failed: {exc}", line=st.line,
                                 env=env, cause=exc) from exc
        if isinstance(result, MultiBinding):
            for name, (value, type_) in result.extra.items():
                if name not in env.bindings:
                    env.bind(name, value, type_)
            env.bind(st.target, result.primary, result.primary_type)
        else:
            env.bind(st.target, result, sig.result)
    return env
