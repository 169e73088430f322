"""First-order formulas over labelled graphs.

Syntax::

    true  false  x = y  x != y  E(x,y)  L.name(x)  R.name(x,y)
    !f  f & g  f | g  f -> g  ex x. f  all x. f  (f)

Precedence is ``!`` > ``&`` > ``|`` > ``->`` (the last right-associative);
a quantifier's scope extends as far right as possible.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import ContractError, FormulaSyntaxError
from .structure import LabeledStructure


class Formula:
    __slots__ = ()

    def __and__(self, other):
        return And(self, other)

    def __or__(self, other):
        return Or(self, other)

    def __invert__(self):
        return Not(self)

    def __str__(self):
        return render_formula(self)


@dataclass(frozen=True, repr=False)
class Top(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Bottom(Formula):
    pass


@dataclass(frozen=True, repr=False)
class Eq(Formula):
    a: str
    b: str


@dataclass(frozen=True, repr=False)
class Edge(Formula):
    a: str
    b: str


@dataclass(frozen=True, repr=False)
class Label(Formula):
    name: str
    var: str


@dataclass(frozen=True, repr=False)
class Rel(Formula):
    name: str
    a: str
    b: str


@dataclass(frozen=True, repr=False)
class Not(Formula):
    body: Formula


@dataclass(frozen=True, repr=False)
class And(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Or(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Implies(Formula):
    left: Formula
    right: Formula


@dataclass(frozen=True, repr=False)
class Exists(Formula):
    var: str
    body: Formula


@dataclass(frozen=True, repr=False)
class Forall(Formula):
    var: str
    body: Formula


TRUE = Top()
FALSE = Bottom()

for _cls in (Top, Bottom, Eq, Edge, Label, Rel, Not, And, Or, Implies, Exists, Forall):
    _cls.__repr__ = lambda self: f"<{type(self).__name__} {render_formula(self)}>"


def conj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return TRUE
    out = parts[0]
    for p in parts[1:]:
        out = And(out, p)
    return out


def disj(parts: Iterable[Formula]) -> Formula:
    parts = list(parts)
    if not parts:
        return FALSE
    out = parts[0]
    for p in parts[1:]:
        out = Or(out, p)
    return out


def neq(a: str, b: str) -> Formula:
    return Not(Eq(a, b))


# -- structural queries -----------------------------------------------------

_BINARY = (And, Or, Implies)
_QUANT = (Exists, Forall)


def _atom_vars(f):
    if isinstance(f, (Eq, Edge, Rel)):
        return (f.a, f.b)
    if isinstance(f, Label):
        return (f.var,)
    return ()


def free_variables(f: Formula) -> frozenset:
    if isinstance(f, _QUANT):
        return free_variables(f.body) - {f.var}
    if isinstance(f, Not):
        return free_variables(f.body)
    if isinstance(f, _BINARY):
        return free_variables(f.left) | free_variables(f.right)
    return frozenset(_atom_vars(f))


def all_variables(f: Formula) -> set:
    out: set = set()
    stack = [f]
    while stack:
        g = stack.pop()
        if isinstance(g, _QUANT):
            out.add(g.var)
            stack.append(g.body)
        elif isinstance(g, Not):
            stack.append(g.body)
        elif isinstance(g, _BINARY):
            stack += [g.left, g.right]
        else:
            out.update(_atom_vars(g))
    return out


def quantifier_rank(f: Formula) -> int:
    if isinstance(f, _QUANT):
        return 1 + quantifier_rank(f.body)
    if isinstance(f, Not):
        return quantifier_rank(f.body)
    if isinstance(f, _BINARY):
        return max(quantifier_rank(f.left), quantifier_rank(f.right))
    return 0


def formula_size(f: Formula) -> int:
    if isinstance(f, _QUANT) or isinstance(f, Not):
        return 1 + formula_size(f.body)
    if isinstance(f, _BINARY):
        return 1 + formula_size(f.left) + formula_size(f.right)
    return 1


def atoms(f: Formula):
    """Yield every atomic subformula, left to right."""
    if isinstance(f, (Exists, Forall, Not)):
        yield from atoms(f.body)
    elif isinstance(f, _BINARY):
        yield from atoms(f.left)
        yield from atoms(f.right)
    else:
        yield f


def relation_names(f: Formula) -> set:
    return {a.name for a in atoms(f) if isinstance(a, Rel)}


def label_names(f: Formula) -> set:
    return {a.name for a in atoms(f) if isinstance(a, Label)}


def disjuncts(f: Formula) -> list[Formula]:
    """Flatten a (possibly nested) disjunction into its operands."""
    if isinstance(f, Or):
        return disjuncts(f.left) + disjuncts(f.right)
    return [f]


def alpha_equivalent(f: Formula, g: Formula) -> bool:
    def eq(f, g, lf: dict, lg: dict, depth: int) -> bool:
        if type(f) is not type(g):
            return False
        if isinstance(f, _QUANT):
            return eq(f.body, g.body, {**lf, f.var: depth}, {**lg, g.var: depth}, depth + 1)
        if isinstance(f, Not):
            return eq(f.body, g.body, lf, lg, depth)
        if isinstance(f, _BINARY):
            return eq(f.left, g.left, lf, lg, depth) and eq(f.right, g.right, lf, lg, depth)
        if isinstance(f, (Label, Rel)) and f.name != g.name:
            return False

        def same(a, b):
            if a in lf or b in lg:
                return lf.get(a, -1) == lg.get(b, -2)
            return a == b

        return all(same(a, b) for a, b in zip(_atom_vars(f), _atom_vars(g)))

    return eq(f, g, {}, {}, 0)


# -- renaming ---------------------------------------------------------------

_SUFFIX = re.compile(r"^(.*?)(?:_(\d+))?$")


class NameSupply:
    """Deterministic fresh-name source: ``z`` -> ``z_1``, ``z_2``, ..."""

    def __init__(self, avoid: Iterable[str] = ()):
        self.used = set(avoid)

    def reserve(self, names: Iterable[str]) -> None:
        self.used.update(names)

    def fresh(self, base: str) -> str:
        stem = _SUFFIX.match(base).group(1) or base
        i = 1
        while f"{stem}_{i}" in self.used:
            i += 1
        name = f"{stem}_{i}"
        self.used.add(name)
        return name


def substitute(f: Formula, mapping: Mapping[str, str], supply: NameSupply | None = None) -> Formula:
    """Simultaneously replace free variables per ``mapping``, avoiding capture."""
    if supply is None:
        supply = NameSupply(all_variables(f) | set(mapping) | set(mapping.values()))
    else:
        supply.reserve(set(mapping) | set(mapping.values()))

    def go(f, m):
        if not m:
            return f
        if isinstance(f, _QUANT):
            m = {k: v for k, v in m.items() if k != f.var}
            var, body = f.var, f.body
            if var in m.values():
                new = supply.fresh(var)
                m = {**m, var: new}
                var = new
            return type(f)(var, go(body, m))
        if isinstance(f, Not):
            return Not(go(f.body, m))
        if isinstance(f, _BINARY):
            return type(f)(go(f.left, m), go(f.right, m))
        if isinstance(f, (Eq, Edge)):
            return type(f)(m.get(f.a, f.a), m.get(f.b, f.b))
        if isinstance(f, Rel):
            return Rel(f.name, m.get(f.a, f.a), m.get(f.b, f.b))
        if isinstance(f, Label):
            return Label(f.name, m.get(f.var, f.var))
        return f

    return go(f, dict(mapping))


def freshen(f: Formula, supply: NameSupply, everything: bool = False) -> Formula:
    """Rename bound variables so none is bound twice on a root-to-leaf path.

    With ``everything`` set, every bound variable gets a new name from
    ``supply`` (used when a formula is inlined several times).
    """

    def go(f, bound: frozenset, m: dict):
        if isinstance(f, _QUANT):
            var = f.var
            if everything or var in bound:
                new = supply.fresh(var)
            else:
                new = var
            return type(f)(new, go(f.body, bound | {new}, {**m, var: new}))
        if isinstance(f, Not):
            return Not(go(f.body, bound, m))
        if isinstance(f, _BINARY):
            return type(f)(go(f.left, bound, m), go(f.right, bound, m))
        if not m:
            return f
        if isinstance(f, (Eq, Edge)):
            return type(f)(m.get(f.a, f.a), m.get(f.b, f.b))
        if isinstance(f, Rel):
            return Rel(f.name, m.get(f.a, f.a), m.get(f.b, f.b))
        if isinstance(f, Label):
            return Label(f.name, m.get(f.var, f.var))
        return f

    supply.reserve(all_variables(f))
    return go(f, free_variables(f), {})


# -- parsing ----------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<id>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>->|!=|[()!&|.,=~]))")
_KEYWORDS = {"true", "false", "ex", "all"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            while pos < len(text) and text[pos].isspace():
                pos += 1
            if pos >= len(text):
                break
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", pos, text)
            kind = "id" if m.group("id") else "op"
            value = m.group(kind)
            self.toks.append((kind, value, m.start(kind)))
            pos = m.end()
        self.toks.append(("eof", "", len(text)))
        self.i = 0

    def peek(self, offset=0):
        return self.toks[min(self.i + offset, len(self.toks) - 1)]

    def error(self, msg, tok=None):
        tok = tok or self.peek()
        found = "end of input" if tok[0] == "eof" else repr(tok[1])
        raise FormulaSyntaxError(f"{msg}, found {found}", tok[2], self.text)

    def take(self, value=None, kind=None):
        tok = self.peek()
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind) or tok[0] == "eof":
            self.error(f"expected {value or kind!s}")
        self.i += 1
        return tok

    def at(self, value):
        tok = self.peek()
        return tok[0] != "eof" and tok[1] == value

    def var(self):
        tok = self.peek()
        if tok[0] != "id" or tok[1] in _KEYWORDS:
            self.error("expected a variable")
        self.i += 1
        return tok[1]

    def formula(self):
        left = self.disjunction()
        if self.at("->"):
            self.i += 1
            return Implies(left, self.formula())
        return left

    def disjunction(self):
        left = self.conjunction()
        while self.at("|"):
            self.i += 1
            left = Or(left, self.conjunction())
        return left

    def conjunction(self):
        left = self.unary()
        while self.at("&"):
            self.i += 1
            left = And(left, self.unary())
        return left

    def unary(self):
        tok = self.peek()
        if tok[1] == "!" and tok[0] == "op":
            self.i += 1
            return Not(self.unary())
        if tok[0] == "id" and tok[1] in ("ex", "all"):
            self.i += 1
            v = self.var()
            self.take(".")
            body = self.formula()
            return Exists(v, body) if tok[1] == "ex" else Forall(v, body)
        return self.primary()

    def primary(self):
        tok = self.peek()
        if tok[0] == "op" and tok[1] == "(":
            self.i += 1
            f = self.formula()
            self.take(")")
            return f
        if tok[0] != "id":
            self.error("expected a formula")
        name, nxt = tok[1], self.peek(1)
        if name == "true":
            self.i += 1
            return TRUE
        if name == "false":
            self.i += 1
            return FALSE
        if name == "E" and nxt[1] == "(":
            self.i += 2
            a = self.var()
            self.take(",")
            b = self.var()
            self.take(")")
            return Edge(a, b)
        if name == "L" and nxt[1] == ".":
            self.i += 2
            label = self.take(kind="id")[1]
            self.take("(")
            a = self.var()
            self.take(")")
            return Label(label, a)
        if name == "R" and nxt[1] == ".":
            self.i += 2
            tok = self.peek()
            if tok[0] == "id" or tok[1] == "~":
                self.i += 1
                rel = tok[1]
            else:
                self.error("expected a relation name")
            self.take("(")
            a = self.var()
            self.take(",")
            b = self.var()
            self.take(")")
            return Rel(rel, a, b)
        a = self.var()
        if self.at("="):
            self.i += 1
            return Eq(a, self.var())
        if self.at("!="):
            self.i += 1
            return Not(Eq(a, self.var()))
        self.error("expected '=' or '!=' after a variable")


def parse_formula(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.peek()[0] != "eof":
        p.error("unexpected trailing input")
    return freshen(f, NameSupply())


# -- rendering --------------------------------------------------------------

_PREC = {Implies: 1, Or: 2, And: 3, Not: 4}


def render_formula(f: Formula) -> str:
    def prec(g):
        if isinstance(g, _QUANT):
            return 0
        if isinstance(g, Not) and isinstance(g.body, Eq):
            return 5
        return _PREC.get(type(g), 5)

    def wrap(g, need):
        s = go(g)
        return f"({s})" if prec(g) < need else s

    def go(g):
        if isinstance(g, Top):
            return "true"
        if isinstance(g, Bottom):
            return "false"
        if isinstance(g, Eq):
            return f"{g.a} = {g.b}"
        if isinstance(g, Edge):
            return f"E({g.a},{g.b})"
        if isinstance(g, Label):
            return f"L.{g.name}({g.var})"
        if isinstance(g, Rel):
            return f"R.{g.name}({g.a},{g.b})"
        if isinstance(g, Not):
            if isinstance(g.body, Eq):
                return f"{g.body.a} != {g.body.b}"
            return "!" + wrap(g.body, 4)
        if isinstance(g, And):
            return f"{wrap(g.left, 3)} & {wrap(g.right, 4)}"
        if isinstance(g, Or):
            return f"{wrap(g.left, 2)} | {wrap(g.right, 3)}"
        if isinstance(g, Implies):
            return f"{wrap(g.left, 2)} -> {wrap(g.right, 1)}"
        if isinstance(g, Exists):
            return f"ex {g.var}. {go(g.body)}"
        if isinstance(g, Forall):
            return f"all {g.var}. {go(g.body)}"
        raise TypeError(f"not a formula: {g!r}")

    return go(f)


# -- evaluation -------------------------------------------------------------

# Subformulas at least this large, with few free variables, are memoised.
MEMO_MIN_SIZE = 12
MEMO_MAX_FREE = 3

Env = dict
Closure = Callable[[Env], bool]


def _flatten(f, cls):
    if isinstance(f, cls):
        return _flatten(f.left, cls) + _flatten(f.right, cls)
    return [f]


def compile_formula(f: Formula, s: LabeledStructure) -> Closure:
    """Compile ``f`` against ``s`` into a predicate over variable environments."""
    adj = s.adjacency
    dom = range(s.n)

    def go(f) -> tuple[Closure, frozenset, int]:
        if isinstance(f, Top):
            return (lambda env: True), frozenset(), 1
        if isinstance(f, Bottom):
            return (lambda env: False), frozenset(), 1
        if isinstance(f, Eq):
            a, b = f.a, f.b
            return (lambda env: env[a] == env[b]), frozenset((a, b)), 1
        if isinstance(f, Edge):
            a, b = f.a, f.b
            return (lambda env: env[b] in adj[env[a]]), frozenset((a, b)), 1
        if isinstance(f, Label):
            members, v = s.label(f.name), f.var
            return (lambda env: env[v] in members), frozenset((v,)), 1
        if isinstance(f, Rel):
            if f.name not in s.relations:
                raise ContractError(f"formula mentions relation {f.name!r}, absent from the structure")
            pairs, a, b = s.relations[f.name], f.a, f.b
            return (lambda env: (env[a], env[b]) in pairs), frozenset((a, b)), 1
        if isinstance(f, Not):
            c, fv, size = go(f.body)
            return (lambda env: not c(env)), fv, size + 1
        if isinstance(f, (And, Or)):
            parts = [go(p) for p in _flatten(f, type(f))]
            cs = tuple(p[0] for p in parts)
            fv = frozenset().union(*(p[1] for p in parts))
            size = sum(p[2] for p in parts) + len(parts) - 1
            if isinstance(f, And):

                def c(env, cs=cs):
                    for p in cs:
                        if not p(env):
                            return False
                    return True

            else:

                def c(env, cs=cs):
                    for p in cs:
                        if p(env):
                            return True
                    return False

            return _memo(c, fv, size)
        if isinstance(f, Implies):
            (l, lfv, ls), (r, rfv, rs) = go(f.left), go(f.right)
            return _memo(lambda env: (not l(env)) or r(env), lfv | rfv, ls + rs + 1)
        if isinstance(f, _QUANT):
            body, fv, size = go(f.body)
            v = f.var
            want = isinstance(f, Exists)

            def q(env):
                had = v in env
                old = env.get(v)
                result = not want
                for d in dom:
                    env[v] = d
                    if body(env) is want:
                        result = want
                        break
                if had:
                    env[v] = old
                else:
                    env.pop(v, None)
                return result

            return _memo(q, fv - {v}, size + 1)
        raise TypeError(f"not a formula: {f!r}")

    return go(f)[0]


def _memo(c: Closure, fv: frozenset, size: int):
    if size < MEMO_MIN_SIZE or len(fv) > MEMO_MAX_FREE:
        return c, fv, size
    names = tuple(sorted(fv))
    cache: dict = {}

    if len(names) == 0:

        def m(env):
            try:
                return cache[()]
            except KeyError:
                r = cache[()] = c(env)
                return r

    elif len(names) == 1:
        (a,) = names

        def m(env):
            key = env[a]
            try:
                return cache[key]
            except KeyError:
                r = cache[key] = c(env)
                return r

    else:

        def m(env):
            key = tuple([env[x] for x in names])
            try:
                return cache[key]
            except KeyError:
                r = cache[key] = c(env)
                return r

    return m, fv, size


def evaluate(s: LabeledStructure, f: Formula, assignment: Mapping[str, int] | None = None) -> bool:
    env = dict(assignment or {})
    missing = free_variables(f) - set(env)
    if missing:
        raise ContractError(f"free variables without a value: {sorted(missing)}")
    for var, v in env.items():
        if not 0 <= v < s.n:
            raise ContractError(f"variable {var} assigned out-of-range vertex {v}")
    return compile_formula(f, s)(env)


def binary_relation(s: LabeledStructure, f: Formula, x: str = "x", y: str = "y") -> set:
    """All ordered pairs (u, v) with ``s |= f(u, v)``."""
    c = compile_formula(f, s)
    out = set()
    env: dict = {}
    for u in range(s.n):
        env[x] = u
        for v in range(s.n):
            env[y] = v
            if c(env):
                out.add((u, v))
    return out


# -- interpretation-level rewriting ----------------------------------------


def check_binary(psi: Formula, x: str, y: str) -> None:
    if x == y:
        raise ContractError("the two designated variables must differ")
    extra = free_variables(psi) - {x, y}
    if extra:
        raise ContractError(f"formula must have free variables among {{{x},{y}}}, also has {sorted(extra)}")


def symmetrize(psi: Formula, x: str = "x", y: str = "y") -> Formula:
    """``(x != y) & (psi(x,y) | psi(y,x))``."""
    check_binary(psi, x, y)
    swapped = substitute(psi, {x: y, y: x})
    return And(neq(x, y), Or(psi, swapped))


def rewrite_edges(phi: Formula, psi: Formula, x: str = "x", y: str = "y") -> Formula:
    """Replace each ``E(a,b)`` in ``phi`` by ``psi(a,b)``."""
    check_binary(psi, x, y)
    supply = NameSupply(all_variables(phi) | all_variables(psi))
    phi = freshen(phi, supply)

    def go(f):
        if isinstance(f, Edge):
            inst = freshen(psi, supply, everything=True)
            return substitute(inst, {x: f.a, y: f.b}, supply)
        if isinstance(f, _QUANT):
            return type(f)(f.var, go(f.body))
        if isinstance(f, Not):
            return Not(go(f.body))
        if isinstance(f, _BINARY):
            return type(f)(go(f.left), go(f.right))
        return f

    return go(phi)
