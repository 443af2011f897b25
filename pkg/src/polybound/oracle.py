"""Brute-force ground truth from enumerated fixed polyominoes.

Counts polyomino-cell pairs per neighborhood type and checks each recurrence
inequality, and the chain A(n) <= G(n) <= G_hat(n), on the true counts.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterable, Iterator, Mapping

from .errors import EnumerationCapError, MaskError
from .sequences import evaluate
from .system import RecurrenceSystem

MAX_ENUMERATION = 12
NEIGHBORS = ((1, 0), (0, 1), (-1, 0), (0, -1))

Cell = tuple[int, int]


@dataclass(frozen=True)
class Polyomino:
    """Edge-connected cells, translated so the lowest-leftmost cell is (0, 0)."""

    cells: frozenset[Cell]

    @classmethod
    def from_cells(cls, cells: Iterable[Cell]) -> "Polyomino":
        cells = frozenset(cells)
        if not cells:
            raise ValueError("a polyomino has at least one cell")
        if not _connected(cells):
            raise ValueError("cells are not edge-connected")
        return cls(canonical(cells))

    def __len__(self):
        return len(self.cells)

    def translate(self, dx: int, dy: int) -> frozenset[Cell]:
        return frozenset((x + dx, y + dy) for x, y in self.cells)


def canonical(cells: Iterable[Cell]) -> frozenset[Cell]:
    cells = list(cells)
    ox, oy = min(cells, key=lambda c: (c[1], c[0]))
    return frozenset((x - ox, y - oy) for x, y in cells)


def _connected(cells: frozenset[Cell]) -> bool:
    start = next(iter(cells))
    seen, stack = {start}, [start]
    while stack:
        x, y = stack.pop()
        for dx, dy in NEIGHBORS:
            nb = (x + dx, y + dy)
            if nb in cells and nb not in seen:
                seen.add(nb)
                stack.append(nb)
    return len(seen) == len(cells)


def enumerate_polyominoes(n_max: int) -> Iterator[Polyomino]:
    """Every fixed polyomino with 1..n_max cells, each exactly once.

    Redelmeier's method: cells are only added above the origin row or to its
    right, and a cell becomes a candidate only the first time it is reached,
    so each translation class is generated exactly once already in canonical
    position. Output is in depth-first order.
    """
    if not 1 <= n_max <= MAX_ENUMERATION:
        raise EnumerationCapError(f"n_max must lie in 1..{MAX_ENUMERATION}, got {n_max}")
    poly: list[Cell] = []
    reached = {(0, 0)}

    def grow(untried: list[Cell]):
        untried = list(untried)
        while untried:
            c = untried.pop()
            poly.append(c)
            yield Polyomino(frozenset(poly))
            if len(poly) < n_max:
                fresh = []
                x, y = c
                for dx, dy in NEIGHBORS:
                    nb = (x + dx, y + dy)
                    if (nb[1] > 0 or (nb[1] == 0 and nb[0] >= 0)) and nb not in reached:
                        fresh.append(nb)
                reached.update(fresh)
                yield from grow(untried + fresh)
                reached.difference_update(fresh)
            poly.pop()

    yield from grow([(0, 0)])


def polyominoes_by_size(n_max: int) -> dict[int, list[Polyomino]]:
    groups: dict[int, list[Polyomino]] = {n: [] for n in range(1, n_max + 1)}
    for p in enumerate_polyominoes(n_max):
        groups[len(p)].append(p)
    return groups


def count_fixed(n_max: int) -> list[int]:
    """A(1), ..., A(n_max)."""
    c = Counter(len(p) for p in enumerate_polyominoes(n_max))
    return [c[n] for n in range(1, n_max + 1)]


# ---------------------------------------------------------------------------
# neighborhood types


@dataclass(frozen=True)
class NeighborhoodType:
    """Offsets relative to the marked cell that must be empty / occupied.

    ``required`` lists the other white cells of a multi-cell state; the pair
    is still counted once per placement of the marked cell.
    """

    name: str
    forbidden: frozenset[Cell]
    required: frozenset[Cell] = frozenset()

    def __post_init__(self):
        if (0, 0) in self.forbidden or (0, 0) in self.required:
            raise MaskError(f"type {self.name}: the marked cell (0,0) cannot be listed")
        both = self.forbidden & self.required
        if both:
            raise MaskError(f"type {self.name}: {sorted(both)} both forbidden and required")

    def matches(self, cells: frozenset[Cell], at: Cell) -> bool:
        x, y = at
        for dx, dy in self.required:
            if (x + dx, y + dy) not in cells:
                return False
        for dx, dy in self.forbidden:
            if (x + dx, y + dy) in cells:
                return False
        return True


_COORD_RE = re.compile(r"\(\s*(-?\d+)\s*,\s*(-?\d+)\s*\)")


def parse_masks(text: str) -> dict[str, NeighborhoodType]:
    """``type <Name> [require (dx,dy) ...] forbid (dx,dy) ...`` one per line."""
    masks: dict[str, NeighborhoodType] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split(None, 2)
        if len(parts) < 2 or parts[0] != "type":
            raise MaskError(f"line {lineno}: expected 'type <Name> ...'")
        name, rest = parts[1], parts[2] if len(parts) > 2 else ""
        if name in masks:
            raise MaskError(f"line {lineno}: duplicate type {name!r}")
        sets = {"forbid": set(), "require": set()}
        current = None
        for word in re.findall(r"\([^)]*\)|\S+", rest):
            if word in sets:
                current = word
            elif m := _COORD_RE.fullmatch(word):
                if current is None:
                    raise MaskError(f"line {lineno}: offset before 'forbid'/'require'")
                sets[current].add((int(m.group(1)), int(m.group(2))))
            else:
                raise MaskError(f"line {lineno}: unexpected token {word!r}")
        try:
            masks[name] = NeighborhoodType(
                name, frozenset(sets["forbid"]), frozenset(sets["require"])
            )
        except MaskError as exc:
            raise MaskError(f"line {lineno}: {exc}") from None
    return masks


def render_masks(masks: Mapping[str, NeighborhoodType]) -> str:
    lines = []
    for t in masks.values():
        fmt = lambda cells: " ".join(f"({x},{y})" for x, y in sorted(cells))
        req = f" require {fmt(t.required)}" if t.required else ""
        lines.append(f"type {t.name}{req} forbid {fmt(t.forbidden)}")
    return "\n".join(lines) + "\n"


def default_masks_text() -> str:
    return resources.files("polybound.data").joinpath("masks.txt").read_text(encoding="utf-8")


def load_masks(path=None) -> dict[str, NeighborhoodType]:
    if path is None:
        return parse_masks(default_masks_text())
    with open(path, encoding="utf-8") as fh:
        return parse_masks(fh.read())


# ---------------------------------------------------------------------------
# typed counts and inequality checks


@dataclass(frozen=True)
class TypedCountReport:
    n_max: int
    counts: Mapping[str, tuple[int, ...]]  # counts[T][n], slot 0 unused
    totals: tuple[int, ...]  # A(n), slot 0 unused

    def __getitem__(self, key):
        name, n = key
        return self.counts[name][n] if n >= 1 else 0


def typed_counts(
    n_max: int, types: Iterable[NeighborhoodType], polyominoes: Iterable[Polyomino] | None = None
) -> TypedCountReport:
    """Count pairs (P, c) with |P| = n whose cell c satisfies each mask."""
    types = list(types)
    counts = {t.name: [0] * (n_max + 1) for t in types}
    totals = [0] * (n_max + 1)
    source = enumerate_polyominoes(n_max) if polyominoes is None else polyominoes
    for p in source:
        n = len(p)
        totals[n] += 1
        cells = p.cells
        for t in types:
            row = counts[t.name]
            row[n] += sum(1 for c in cells if t.matches(cells, c))
    return TypedCountReport(
        n_max, {k: tuple(v) for k, v in counts.items()}, tuple(totals)
    )


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def rhs_on_counts(system: RecurrenceSystem, var: str, n: int, counts: TypedCountReport) -> int:
    """Right side of ``var``'s inequality at ``n``, by explicit compositions."""
    total = 0
    for t in system.equation(var).terms:
        m = n - t.shift
        if not t.factors:
            total += t.coeff if m == 0 else 0
            continue
        for parts in _compositions(m, len(t.factors)):
            prod = t.coeff
            for f, i in zip(t.factors, parts):
                prod *= counts[f, i]
            total += prod
    return total


@dataclass(frozen=True)
class InequalityViolation:
    var: str
    n: int
    lhs: int
    rhs: int


@dataclass
class LemmaReport:
    system: str
    n_max: int
    violations: list[InequalityViolation] = field(default_factory=list)
    tight: dict[str, bool] = field(default_factory=dict)  # equality at every n

    @property
    def passed(self) -> bool:
        return not self.violations

    def failed_vars(self) -> list[str]:
        return sorted({v.var for v in self.violations})


def _require_masks(system, masks):
    missing = [v for v in system.variables if v not in masks]
    if missing:
        raise MaskError(f"no neighborhood mask for {', '.join(missing)}")
    return [masks[v] for v in system.variables]


def check_lemma(
    system: RecurrenceSystem,
    n_max: int,
    masks: Mapping[str, NeighborhoodType] | None = None,
    counts: TypedCountReport | None = None,
) -> LemmaReport:
    """Check S_true(n) <= RHS(true counts) for every equation and 2 <= n <= n_max."""
    masks = load_masks() if masks is None else masks
    types = _require_masks(system, masks)
    if counts is None:
        counts = typed_counts(n_max, types)
    report = LemmaReport(system.name, n_max)
    for v in system.variables:
        equal = True
        if counts[v, 1] != system.base(v):
            report.violations.append(InequalityViolation(v, 1, counts[v, 1], system.base(v)))
        for n in range(2, n_max + 1):
            lhs, rhs = counts[v, n], rhs_on_counts(system, v, n, counts)
            equal &= lhs == rhs
            if lhs > rhs:
                report.violations.append(InequalityViolation(v, n, lhs, rhs))
        report.tight[v] = equal
    return report


@dataclass
class DominationReport:
    system: str
    n_max: int
    rows: list[tuple[int, int, int, int]]  # (n, A(n), root_true(n), root_hat(n))
    violations: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def check_domination(
    system: RecurrenceSystem,
    n_max: int,
    masks: Mapping[str, NeighborhoodType] | None = None,
    counts: TypedCountReport | None = None,
) -> DominationReport:
    """Check A(n) <= root_true(n) <= root_hat(n), and S_true <= S_hat for all S."""
    masks = load_masks() if masks is None else masks
    types = _require_masks(system, masks)
    if counts is None:
        counts = typed_counts(n_max, types)
    table = evaluate(system, n_max)
    root = system.root
    report = DominationReport(system.name, n_max, [])
    for n in range(1, n_max + 1):
        a, true_root, hat_root = counts.totals[n], counts[root, n], table[root, n]
        report.rows.append((n, a, true_root, hat_root))
        if a > true_root:
            report.violations.append(f"n={n}: A={a} > {root}_true={true_root}")
        for v in system.variables:
            if counts[v, n] > table[v, n]:
                report.violations.append(f"n={n}: {v}_true={counts[v, n]} > {v}_hat={table[v, n]}")
    return report
