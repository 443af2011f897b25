"""Bisection for the smallest bound a system can certify.

Floats are used only to locate the fixed point quickly; every reported bound
comes with a rational certificate accepted by ``certificate.verify``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction

from .certificate import Certificate, ceil_fraction, polish, rationalize, verify
from .errors import BracketError, CertificationFailed, VerificationFailed
from .system import RecurrenceSystem

log = logging.getLogger(__name__)

# bisection midpoints are snapped to this grid so 1/bound stays a short rational
BOUND_GRID = 10**7


@dataclass(frozen=True)
class SearchConfig:
    lower: float = 3.0
    upper: float = 6.0
    tol: float = 1e-4
    max_iter: int = 100_000
    fp_tol: float = 1e-13
    denominator_bound: int = 10_000
    margin: float = 1e-6
    divergence: float = 1e6
    retries: int = 3

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError("lower must be < upper")
        for name in ("tol", "fp_tol", "margin", "divergence"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.max_iter < 1 or self.denominator_bound < 1:
            raise ValueError("max_iter and denominator_bound must be >= 1")


@dataclass(frozen=True)
class ProbeResult:
    bound: float
    converged: bool
    iterations: int
    values: dict[str, float] | None = None


class _CompiledSystem:
    """Index-based form of the sweep; the inner loop of every probe."""

    def __init__(self, system: RecurrenceSystem):
        self.system = system
        self.names = system.variables
        idx = {v: i for i, v in enumerate(self.names)}
        self.plan = []
        for v in system.topo_order():
            linear, other = [], []
            for t in system.equation(v).terms:
                if t.is_linear_same_index:
                    linear.append((float(t.coeff), idx[t.factors[0]]))
                else:
                    other.append((float(t.coeff), t.shift, tuple(idx[f] for f in t.factors)))
            self.plan.append((idx[v], float(system.gf_constant(v)), linear, other))
        self.start = [float(system.base(v)) for v in self.names]

    def run(self, x: float, cfg: SearchConfig) -> tuple[bool, int, list[float]]:
        powers = [1.0, x, x * x, x**3, x**4]
        plan = [
            (i, c * x, linear, [(k * (powers[s] if s < 5 else x**s), f) for k, s, f in other])
            for i, c, linear, other in self.plan
        ]
        old = [b * x for b in self.start]
        for it in range(1, cfg.max_iter + 1):
            new = old[:]
            for i, const, linear, other in plan:
                acc = const
                for k, j in linear:
                    acc += k * new[j]
                for k, fs in other:
                    p = k
                    for j in fs:
                        p *= old[j]
                    acc += p
                new[i] = acc
            delta = max(abs(a - b) for a, b in zip(new, old))
            if not all(math.isfinite(a) and a <= cfg.divergence for a in new):
                return False, it, new
            if delta < cfg.fp_tol:
                return True, it, new
            old = new
        return False, cfg.max_iter, old


def probe(system: RecurrenceSystem, bound: float, config: SearchConfig | None = None, _compiled=None):
    """Run the float iteration at x = 1/bound."""
    cfg = config or SearchConfig()
    if bound <= 1:
        raise ValueError("bound candidate must exceed 1")
    comp = _compiled or _CompiledSystem(system)
    ok, iters, vals = comp.run(1.0 / float(bound), cfg)
    values = dict(zip(comp.names, vals)) if ok else None
    return ProbeResult(float(bound), ok, iters, values)


@dataclass
class SearchResult:
    bound: Fraction
    certificate: Certificate
    log: list[ProbeResult] = field(default_factory=list)
    attempts: int = 1

    @property
    def largest_diverged(self) -> float | None:
        div = [p.bound for p in self.log if not p.converged]
        return max(div) if div else None


def _snap(value: float) -> Fraction:
    return Fraction(math.ceil(value * BOUND_GRID), BOUND_GRID)


def search(system: RecurrenceSystem, config: SearchConfig | None = None) -> SearchResult:
    cfg = config or SearchConfig()
    comp = _CompiledSystem(system)
    history: list[ProbeResult] = []

    def run(b: Fraction) -> ProbeResult:
        r = probe(system, float(b), cfg, comp)
        log.debug("probe %.7f -> %s after %d iterations", r.bound, r.converged, r.iterations)
        history.append(r)
        return r

    lo, hi = _snap(cfg.lower), _snap(cfg.upper)
    if lo <= 1:
        # x = 1 is never inside the radius of a system with a nonzero generating function
        history.append(ProbeResult(float(lo), False, 0))
    elif run(lo).converged:
        raise BracketError(f"probe converges at lower bracket {cfg.lower}")
    best = run(hi)
    if not best.converged:
        raise BracketError(f"probe diverges at upper bracket {cfg.upper}")
    while hi - lo > Fraction(cfg.tol):
        mid = _snap(float((lo + hi) / 2))
        if mid >= hi or mid <= lo:
            break
        r = run(mid)
        if r.converged:
            hi, best = mid, r
        else:
            lo = mid

    x = 1 / hi
    den = cfg.denominator_bound
    approx = {v: a * (1 + cfg.margin) for v, a in best.values.items()}
    last_error = None
    for attempt in range(1, cfg.retries + 2):
        try:
            cert = rationalize(system, approx, x, den)
        except VerificationFailed as exc:
            log.info("attempt %d: rounding at D=%d fails for %s; repairing",
                     attempt, den, ", ".join(c.var for c in exc.report.failures))
            rounded = Certificate(
                system.name, x, {v: ceil_fraction(a, den) for v, a in approx.items()}
            )
            try:
                cert = polish(system, rounded, den, cfg.margin)
            except VerificationFailed as exc2:
                last_error = exc2
                den *= 10
                continue
        if not verify(system, cert).passed:  # pragma: no cover - guarded by rationalize/polish
            raise CertificationFailed("internal error: unverified certificate")
        return SearchResult(hi, cert, history, attempt)
    raise CertificationFailed(
        f"no exact certificate at bound {float(hi):.7f} after {cfg.retries} retries: {last_error}"
    )
