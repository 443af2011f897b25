"""Convolution recurrence systems: data model, built-ins, text format.

A system assigns to every variable ``S`` an equation

    S(1) = base
    S(n) = sum over terms  coeff * sum_{i1+...+ik = n - shift, ij >= 1} prod_j F_j(ij)    (n >= 2)

Terms with ``shift == 0`` and a single factor are same-index dependencies;
they must form an acyclic graph so every index can be evaluated in one pass.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter
from typing import Mapping

from .errors import SystemDefinitionError

DEFAULT_MAX_ARITY = 3


@dataclass(frozen=True)
class Term:
    coeff: int
    shift: int
    factors: tuple[str, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.factors)

    @property
    def is_linear_same_index(self) -> bool:
        """True for ``coeff * F(n)``: the only kind of term that reads index n."""
        return self.shift == 0 and len(self.factors) == 1


@dataclass(frozen=True)
class Equation:
    target: str
    base: int
    terms: tuple[Term, ...] = ()


@dataclass(frozen=True)
class RecurrenceSystem:
    name: str
    variables: tuple[str, ...]
    equations: Mapping[str, Equation]
    root: str = "G"
    max_arity: int = DEFAULT_MAX_ARITY
    _order: tuple[str, ...] = field(default=(), init=False, repr=False, compare=False)
    _index: Mapping[str, int] = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        object.__setattr__(self, "equations", dict(self.equations))
        _validate(self)
        object.__setattr__(self, "_index", {v: i for i, v in enumerate(self.variables)})
        object.__setattr__(self, "_order", _toposort(self))

    def __hash__(self):
        return hash((self.name, self.variables, self.root))

    def index(self, var: str) -> int:
        """Dense integer handle of ``var``."""
        return self._index[var]

    def equation(self, var: str) -> Equation:
        return self.equations[var]

    def base(self, var: str) -> int:
        return self.equations[var].base

    def same_index_deps(self, var: str) -> tuple[str, ...]:
        return tuple(
            t.factors[0] for t in self.equations[var].terms if t.is_linear_same_index
        )

    def first_index_overlap(self, var: str) -> int:
        """Value the n >= 2 rule would assign at n = 1.

        Only linear shift-0 terms can reach index 1, contributing
        ``coeff * base(factor)``.
        """
        return sum(
            t.coeff * self.equations[t.factors[0]].base
            for t in self.equations[var].terms
            if t.is_linear_same_index
        )

    def gf_constant(self, var: str) -> int:
        """Coefficient of the bare ``x`` in the generating-function equation.

        phi_S = (base - overlap) x + sum_terms coeff x^shift prod phi_F, because the
        recurrence only applies from n = 2 on while the products also produce an
        x^1 coefficient through linear shift-0 terms.
        """
        return self.equations[var].base - self.first_index_overlap(var)

    def topo_order(self) -> tuple[str, ...]:
        return self._order


def topo_order(system: RecurrenceSystem) -> tuple[str, ...]:
    """Order in which variables can be evaluated at a common index n."""
    return system.topo_order()


def _validate(system: RecurrenceSystem) -> None:
    names = system.variables
    seen = set()
    for v in names:
        if v in seen:
            raise SystemDefinitionError(f"duplicate variable {v!r}")
        seen.add(v)
    if set(system.equations) != seen:
        missing = seen - set(system.equations)
        extra = set(system.equations) - seen
        if missing:
            raise SystemDefinitionError(f"no equation for {sorted(missing)}")
        raise SystemDefinitionError(f"equation for undeclared variable(s) {sorted(extra)}")
    if system.root not in seen:
        raise SystemDefinitionError(f"root {system.root!r} is not a variable")
    if system.max_arity < 1:
        raise SystemDefinitionError("arity limit must be at least 1")
    for v in names:
        eq = system.equations[v]
        if eq.target != v:
            raise SystemDefinitionError(f"equation keyed {v!r} targets {eq.target!r}")
        if eq.base < 0:
            raise SystemDefinitionError(f"negative coefficient: base of {v} is {eq.base}")
        for t in eq.terms:
            _validate_term(v, t, seen, system.max_arity)
    for v in names:
        overlap = system.first_index_overlap(v)
        if system.equations[v].base < overlap:
            raise SystemDefinitionError(
                f"{v}(1) = {system.equations[v].base} is smaller than {overlap}, the value "
                "its shift-0 terms take at n = 1; the generating function would get a "
                "negative x coefficient"
            )


def _validate_term(target, term, known, max_arity, lineno=None):
    if term.coeff < 0:
        raise SystemDefinitionError(
            f"negative coefficient {term.coeff} in equation for {target}", lineno
        )
    if term.coeff == 0:
        raise SystemDefinitionError(f"zero coefficient in equation for {target}", lineno)
    if term.shift < 0:
        raise SystemDefinitionError(f"negative shift in equation for {target}", lineno)
    if term.arity > max_arity:
        raise SystemDefinitionError(
            f"term with {term.arity} factors exceeds arity limit {max_arity}", lineno
        )
    if term.arity == 0 and term.shift < 2:
        raise SystemDefinitionError(
            f"constant term x^{term.shift} in equation for {target} never applies "
            "(recurrence starts at n = 2; use the base line)",
            lineno,
        )
    for f in term.factors:
        if f not in known:
            raise SystemDefinitionError(f"unknown variable {f!r} in equation for {target}", lineno)


def _toposort(system: RecurrenceSystem) -> tuple[str, ...]:
    ts = TopologicalSorter()
    for v in system.variables:
        ts.add(v, *system.same_index_deps(v))
    try:
        return tuple(ts.static_order())
    except CycleError as exc:
        cycle = " -> ".join(exc.args[1])
        raise SystemDefinitionError(f"cyclic shift-0 dependency: {cycle}") from None


# ---------------------------------------------------------------------------
# built-in systems


def _system(name, bases, rules, root="G"):
    equations = {}
    for v, base in bases.items():
        terms = tuple(Term(c, s, tuple(f)) for c, s, f in rules[v])
        equations[v] = Equation(v, base, terms)
    return RecurrenceSystem(name, tuple(bases), equations, root=root)


# (coeff, shift, factors)
_KR6_RULES = {
    "E": [(1, 1, "F")],
    "F": [(1, 0, "G"), (1, 0, "GH")],
    "G": [(1, 1, "F"), (1, 1, "G"), (1, 1, "GL")],
    "H": [(2, 1, "G"), (1, 1, "EL")],
    "L": [(1, 1, "F"), (1, 1, "H"), (1, 1, "GM")],
    "M": [(1, 1, "G"), (1, 1, "H"), (1, 1, "EM")],
}

_BS17_RULES = {
    "C": [(1, 1, "E")],
    "D": [(1, 1, "G")],
    "E": [(1, 1, "F")],
    "F": [(1, 0, "G"), (1, 0, "P")],
    "G": [(1, 0, "E"), (1, 0, "Q")],
    "H": [(1, 0, "D"), (1, 0, "S")],
    "P": [(1, 0, "EH"), (1, 0, "QD"), (1, 0, "XR"), (1, 0, "VY"), (1, 0, "UYZ")],
    "Q": [(1, 1, "G"), (1, 1, "GE"), (1, 2, "U"), (1, 2, "TG"), (1, 2, "RU")],
    "R": [(1, 0, "Y"), (1, 0, "W")],
    "S": [(1, 1, "G"), (1, 1, "EE"), (1, 2, "T"), (1, 2, "XG"), (1, 2, "YU")],
    "T": [(1, 0, "X"), (1, 0, "V")],
    "U": [(1, 0, "DH"), (1, 0, "SD"), (1, 0, "YR"), (1, 0, "WY"), (1, 0, "UZZ")],
    "V": [(1, 1, "S"), (1, 2, "GG"), (1, 2, "TE"), (1, 2, "RT")],
    "W": [(1, 1, "S"), (1, 2, "EG"), (1, 2, "XE"), (1, 2, "YT")],
    "X": [(1, 1, "D"), (1, 2, "G"), (1, 2, "U")],
    "Y": [(1, 1, "C"), (1, 2, "G"), (1, 2, "T")],
    "Z": [(1, 1, "C"), (1, 2, "E"), (1, 2, "X")],
}

BUILTIN_NAMES = ("KR6", "BS17")


def builtin_system(name: str) -> RecurrenceSystem:
    """The six-type system (``KR6``) or the seventeen-type system (``BS17``)."""
    key = name.upper()
    if key == "KR6":
        return _system("KR6", dict.fromkeys("EFGHLM", 1), _KR6_RULES)
    if key == "BS17":
        bases = dict.fromkeys("CDEFGH", 1)
        bases.update(dict.fromkeys("PQRSTUVWXYZ", 0))
        return _system("BS17", bases, _BS17_RULES)
    raise KeyError(f"unknown built-in system {name!r}; choose from {', '.join(BUILTIN_NAMES)}")


# ---------------------------------------------------------------------------
# text format

_NAME = r"[A-Za-z_][A-Za-z0-9_]*"
_HEADER_RE = re.compile(rf"system\s+(\S+)\s+root\s+({_NAME})$")
_ARITY_RE = re.compile(r"arity\s+(\S+)$")
_BASE_RE = re.compile(rf"({_NAME})\s*\(\s*1\s*\)\s*=\s*(\S+)$")
_TERM_RE = re.compile(rf"({_NAME})\s*\+=\s*(\S+?)\s*\*\s*x\s*\^\s*(\S+?)(?:\s*\*\s*(.+))?$")
_INT_RE = re.compile(r"[+-]?\d+$")


def _int(token, what, lineno):
    if not _INT_RE.match(token):
        raise SystemDefinitionError(f"{what} must be a decimal integer, got {token!r}", lineno)
    return int(token)


def parse_system(source: str) -> RecurrenceSystem:
    """Parse the line-oriented system format (see ``render_system``)."""
    name = root = None
    max_arity = DEFAULT_MAX_ARITY
    bases: dict[str, int] = {}
    terms: dict[str, list[tuple[int, Term]]] = {}
    for lineno, raw in enumerate(source.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m := _HEADER_RE.match(line):
            if name is not None:
                raise SystemDefinitionError("second system header", lineno)
            name, root = m.groups()
        elif m := _ARITY_RE.match(line):
            max_arity = _int(m.group(1), "arity limit", lineno)
        elif m := _BASE_RE.match(line):
            var, value = m.group(1), _int(m.group(2), "initial value", lineno)
            if var in bases:
                raise SystemDefinitionError(f"duplicate variable {var!r}", lineno)
            if value < 0:
                raise SystemDefinitionError(f"negative coefficient: {var}(1) = {value}", lineno)
            bases[var] = value
        elif m := _TERM_RE.match(line):
            var, coeff, shift, product = m.groups()
            factors = tuple(f.strip() for f in product.split("*")) if product else ()
            for f in factors:
                if not re.fullmatch(_NAME, f):
                    raise SystemDefinitionError(f"bad factor {f!r}", lineno)
            term = Term(_int(coeff, "coefficient", lineno), _int(shift, "shift", lineno), factors)
            terms.setdefault(var, []).append((lineno, term))
        else:
            raise SystemDefinitionError(f"syntax error: {raw.strip()!r}", lineno)
    if name is None:
        raise SystemDefinitionError("missing 'system <name> root <Var>' header")
    for var, items in terms.items():
        for lineno, term in items:
            if var not in bases:
                raise SystemDefinitionError(f"unknown variable {var!r} (no '{var}(1) = ...' line)", lineno)
            _validate_term(var, term, bases, max_arity, lineno)
    equations = {
        v: Equation(v, b, tuple(t for _, t in terms.get(v, ()))) for v, b in bases.items()
    }
    return RecurrenceSystem(name, tuple(bases), equations, root=root, max_arity=max_arity)


def render_system(system: RecurrenceSystem) -> str:
    lines = [f"system {system.name} root {system.root}"]
    if system.max_arity != DEFAULT_MAX_ARITY:
        lines.append(f"arity {system.max_arity}")
    for v in system.variables:
        eq = system.equations[v]
        lines.append(f"{v}(1) = {eq.base}")
        for t in eq.terms:
            product = "".join(f" * {f}" for f in t.factors)
            lines.append(f"{v} += {t.coeff} * x^{t.shift}{product}")
    return "\n".join(lines) + "\n"


def load_system(name: str) -> RecurrenceSystem:
    """Resolve a CLI ``--system`` argument: a built-in name or a file path."""
    if name.upper() in BUILTIN_NAMES:
        return builtin_system(name)
    with open(name, encoding="utf-8") as fh:
        return parse_system(fh.read())
