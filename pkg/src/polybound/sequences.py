"""Exact evaluation of hat sequences and their truncated generating functions."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from operator import mul
from typing import Mapping

from .system import RecurrenceSystem


@dataclass(frozen=True)
class SequenceTable:
    """Values ``values[S][n]`` for ``1 <= n <= horizon``; slot 0 is padding."""

    system: RecurrenceSystem
    horizon: int
    values: Mapping[str, tuple[int, ...]]

    def __getitem__(self, key):
        var, n = key
        if not 1 <= n <= self.horizon:
            raise IndexError(f"index {n} outside 1..{self.horizon}")
        return self.values[var][n]

    def column(self, var: str) -> tuple[int, ...]:
        """Values at indices 1..horizon."""
        return self.values[var][1:]


def _conv(a, b, m):
    # sum_{i=1}^{m-1} a[i] * b[m-i]
    if m < 2:
        return 0
    return sum(map(mul, a[1:m], b[m - 1 : 0 : -1]))


class _PairCache:
    """Lazily extended self-convolutions (A*B)(m), shared by all terms."""

    def __init__(self, vals):
        self._vals = vals
        self._seqs: dict[tuple[str, str], list[int]] = {}

    def seq(self, a: str, b: str, upto: int) -> list[int]:
        key = (a, b) if a <= b else (b, a)
        s = self._seqs.setdefault(key, [0])
        va, vb = self._vals[key[0]], self._vals[key[1]]
        while len(s) <= upto:
            s.append(_conv(va, vb, len(s)))
        return s


def _term_value(term, n, vals, pairs):
    m = n - term.shift
    k = len(term.factors)
    if k == 0:
        return term.coeff if m == 0 else 0
    if m < k:
        return 0
    if k == 1:
        return term.coeff * vals[term.factors[0]][m]
    if k == 2:
        a, b = term.factors
        return term.coeff * pairs.seq(a, b, m)[m]
    head, rest = term.factors[0], term.factors[1:]
    if k == 3:
        inner = pairs.seq(rest[0], rest[1], m - 1)
    else:
        inner = _nested(rest, m - 1, vals, pairs)
    return term.coeff * _conv(vals[head], inner, m)


def _nested(factors, upto, vals, pairs):
    # k-fold convolution sequence for k >= 3 (only reached with a raised arity limit)
    if len(factors) == 2:
        return pairs.seq(factors[0], factors[1], upto)
    inner = _nested(factors[1:], upto, vals, pairs)
    head = vals[factors[0]]
    return [0] + [_conv(head, inner, m) for m in range(1, upto + 1)]


def evaluate(system: RecurrenceSystem, horizon: int) -> SequenceTable:
    """Fill every hat sequence exactly for indices 1..horizon."""
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    order = system.topo_order()
    vals = {v: [0] * (horizon + 1) for v in system.variables}
    for v in system.variables:
        vals[v][1] = system.base(v)
    pairs = _PairCache(vals)
    for n in range(2, horizon + 1):
        for v in order:
            vals[v][n] = sum(
                _term_value(t, n, vals, pairs) for t in system.equation(v).terms
            )
    return SequenceTable(system, horizon, {v: tuple(col) for v, col in vals.items()})


def partial_sum(table: SequenceTable, var: str, x: Fraction, n: int) -> Fraction:
    """Exact value of sum_{i=1}^{n} S(i) x^i."""
    if not 1 <= n <= table.horizon:
        raise IndexError(f"index {n} outside 1..{table.horizon}")
    x = Fraction(x)
    if x <= 0:
        raise ValueError("x must be positive")
    p, q = x.numerator, x.denominator
    col = table.values[var]
    # Horner over a common denominator q^n
    num = 0
    for i in range(n, 0, -1):
        num = num * p + col[i] * q ** (n - i)
    return Fraction(num * p, q**n)


def partial_sums(table: SequenceTable, var: str, x: Fraction, n: int) -> list[Fraction]:
    """All prefixes ``[partial_sum(.., 1), ..., partial_sum(.., n)]`` in one pass."""
    x = Fraction(x)
    out, acc, power = [], Fraction(0), Fraction(1)
    col = table.values[var]
    for i in range(1, n + 1):
        power *= x
        acc += col[i] * power
        out.append(acc)
    return out


def ratio_report(table: SequenceTable, var: str) -> list[tuple[int, Fraction]]:
    """Consecutive ratios S(n+1)/S(n), skipping pairs that involve a zero."""
    col = table.values[var]
    return [
        (n, Fraction(col[n + 1], col[n]))
        for n in range(1, table.horizon)
        if col[n] and col[n + 1]
    ]
