"""Rational witness certificates for growth bounds.

A certificate is a point ``0 < x < 1`` and positive rationals ``w_S`` with

    w_S >= c_S x + sum_terms coeff * x^shift * prod w_F        for every S,

where ``c_S`` is the generating-function constant of S (see
``RecurrenceSystem.gf_constant``). The monotone iteration started at
``s_1 = base * x`` then stays below ``w`` while its limit is the value of the
generating function at ``x``; a finite value bounds every growth rate by 1/x.
"""

from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Mapping

from .errors import CertificateError, VerificationFailed
from .sequences import evaluate, partial_sums
from .system import RecurrenceSystem

log = logging.getLogger(__name__)

DIVERGENCE_THRESHOLD = 10**6


def to_decimal(value: Fraction, digits: int = 12) -> str:
    """Decimal rendering of an exact rational to ``digits`` significant digits."""
    with localcontext() as ctx:
        ctx.prec = digits
        return str(Decimal(value.numerator) / Decimal(value.denominator))


@dataclass(frozen=True)
class Certificate:
    system: str
    x: Fraction
    witness: Mapping[str, Fraction]

    def __post_init__(self):
        object.__setattr__(self, "x", Fraction(self.x))
        object.__setattr__(self, "witness", {k: Fraction(v) for k, v in self.witness.items()})

    @property
    def bound(self) -> Fraction:
        return 1 / self.x


# ---------------------------------------------------------------------------
# file format

_RATIONAL_RE = re.compile(r"[+-]?\d+(?:/\d+)?$")
_LINE_RE = re.compile(r"([A-Za-z_][\w.]*)\s*[=:]\s*(\S+)$")


def parse_rational(text: str, what: str = "value") -> Fraction:
    """Parse ``p/q`` or an integer; decimals and exponents are rejected."""
    text = text.strip()
    if not _RATIONAL_RE.match(text):
        raise CertificateError(f"{what}: {text!r} is not an exact rational p/q")
    try:
        return Fraction(text)
    except ZeroDivisionError:
        raise CertificateError(f"{what}: zero denominator") from None


def parse_certificate(text: str) -> Certificate:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = _LINE_RE.match(line)
        if not m:
            raise CertificateError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = m.groups()
        if key in fields:
            raise CertificateError(f"line {lineno}: duplicate key {key!r}")
        fields[key] = value
    for key in ("system", "x"):
        if key not in fields:
            raise CertificateError(f"certificate is missing {key!r}")
    x = parse_rational(fields["x"], "x")
    witness = {
        k.split(".", 1)[1]: parse_rational(v, k) for k, v in fields.items() if k.startswith("witness.")
    }
    unknown = set(fields) - {"system", "x", "bound"} - {f"witness.{k}" for k in witness}
    if unknown:
        raise CertificateError(f"unknown certificate keys: {sorted(unknown)}")
    if "bound" in fields:
        bound = parse_rational(fields["bound"], "bound")
        if x == 0 or bound != 1 / x:
            raise CertificateError(f"bound {bound} is not 1/x = {1 / x if x else 'inf'}")
    return Certificate(fields["system"], x, witness)


def render_certificate(cert: Certificate, order=None) -> str:
    names = order or sorted(cert.witness)
    lines = [
        f"system = {cert.system}",
        f"x = {_frac(cert.x)}",
        f"bound = {_frac(cert.bound)}",
    ]
    lines += [f"witness.{v} = {_frac(cert.witness[v])}" for v in names]
    return "\n".join(lines) + "\n"


def _frac(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


def load_certificate(path) -> Certificate:
    with open(path, encoding="utf-8") as fh:
        return parse_certificate(fh.read())


# ---------------------------------------------------------------------------
# the generating-function map


def _check_point(x):
    if x <= 0:
        raise CertificateError(f"x must be positive, got {x}")


def gf_rhs(system: RecurrenceSystem, var: str, x, old, new=None):
    """Right-hand side for ``var`` at point ``x``.

    Linear shift-0 terms read from ``new`` (the current sweep) and everything
    else from ``old``; pass one mapping for both to evaluate the plain map.
    Works for any ordered field type (Fraction, float).
    """
    if new is None:
        new = old
    if type(x) is Fraction:
        return _exact_rhs(system, var, x, old, new)
    acc = system.gf_constant(var) * x
    for t in system.equation(var).terms:
        if t.is_linear_same_index:
            acc += t.coeff * new[t.factors[0]]
        else:
            prod = x**t.shift if t.shift else 1
            for f in t.factors:
                prod *= old[f]
            acc += t.coeff * prod
    return acc


def _exact_rhs(system, var, x, old, new):
    # same sum over a single unreduced numerator/denominator pair; one gcd at the end
    xp, xq = x.numerator, x.denominator
    num, den = system.gf_constant(var) * xp, xq
    for t in system.equation(var).terms:
        if t.is_linear_same_index:
            f = Fraction(new[t.factors[0]])
            p, q = t.coeff * f.numerator, f.denominator
        else:
            p, q = t.coeff * xp**t.shift, xq**t.shift
            for name in t.factors:
                f = Fraction(old[name])
                p, q = p * f.numerator, q * f.denominator
        num, den = num * q + p * den, den * q
    return Fraction(num, den)


def sweep(system: RecurrenceSystem, x, old):
    """One step of the monotone iteration, in topological order."""
    new = {}
    for v in system.topo_order():
        new[v] = gf_rhs(system, v, x, old, new)
    return new


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class InequalityCheck:
    var: str
    lhs: Fraction
    rhs: Fraction
    floor: Fraction

    @property
    def slack(self) -> Fraction:
        return self.lhs - self.rhs

    @property
    def passed(self) -> bool:
        return self.lhs >= self.rhs

    @property
    def floor_passed(self) -> bool:
        return self.lhs >= self.floor

    def as_dict(self):
        return {
            "var": self.var,
            "witness": _frac(self.lhs),
            "rhs": _frac(self.rhs),
            "slack": _frac(self.slack),
            "slack_decimal": to_decimal(self.slack),
            "passed": self.passed,
            "floor": _frac(self.floor),
            "floor_passed": self.floor_passed,
        }


@dataclass(frozen=True)
class VerificationReport:
    system: str
    x: Fraction
    checks: tuple[InequalityCheck, ...]

    @property
    def passed(self) -> bool:
        return all(c.passed and c.floor_passed for c in self.checks)

    @property
    def failures(self) -> list[InequalityCheck]:
        return [c for c in self.checks if not (c.passed and c.floor_passed)]

    @property
    def pass_vector(self) -> tuple[tuple[bool, bool], ...]:
        return tuple((c.passed, c.floor_passed) for c in self.checks)

    def as_dict(self):
        return {
            "system": self.system,
            "x": _frac(self.x),
            "bound": _frac(1 / self.x),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
        }


def check_matches(system: RecurrenceSystem, cert: Certificate) -> None:
    missing = [v for v in system.variables if v not in cert.witness]
    extra = sorted(set(cert.witness) - set(system.variables))
    if missing:
        raise CertificateError(f"certificate has no witness for variable(s) {', '.join(missing)}")
    if extra:
        raise CertificateError(f"certificate has witness for unknown variable(s) {', '.join(extra)}")
    _check_point(cert.x)
    for v, w in cert.witness.items():
        if w <= 0:
            raise CertificateError(f"witness for {v} must be positive, got {w}")


def verify(system: RecurrenceSystem, cert: Certificate) -> VerificationReport:
    """Check every fixed-point inequality exactly and report the slack."""
    check_matches(system, cert)
    x, w = cert.x, cert.witness
    checks = tuple(
        InequalityCheck(v, w[v], gf_rhs(system, v, x, w), system.base(v) * x)
        for v in system.variables
    )
    return VerificationReport(system.name, x, checks)


def critical_witness(system: RecurrenceSystem, var: str, cert: Certificate) -> Fraction:
    """Smallest value of ``var``'s witness that satisfies its own inequality,
    with every other witness held fixed.

    The right side may read ``var`` itself (G in the six-type system); it has
    to be affine in that argument, ``a + b w`` with ``b < 1``, and the answer
    is ``a / (1 - b)``.
    """
    check_matches(system, cert)
    x, w = cert.x, dict(cert.witness)

    def rhs(value):
        w[var] = Fraction(value)
        return gf_rhs(system, var, x, w)

    a = rhs(0)
    b = rhs(1) - a
    if rhs(2) != a + 2 * b:
        raise ValueError(f"right side of {var} is not affine in {var}")
    if b >= 1:
        raise ValueError(f"right side of {var} grows at least as fast as {var}")
    return a / (1 - b)


# ---------------------------------------------------------------------------
# monotone iteration


@dataclass(frozen=True)
class IterationState:
    step: int
    values: Mapping[str, Fraction]
    unbounded: bool = False


def iterate(system: RecurrenceSystem, x, steps: int) -> list[IterationState]:
    """Exact iterates s_1..s_K.

    The iterates are polynomials in ``x`` whose degree roughly doubles each
    step, so exact values are only practical for K up to about a dozen; use
    ``iterate_enclosure`` beyond that.
    Stops early (last state flagged ``unbounded``) once a component exceeds
    ``DIVERGENCE_THRESHOLD``.
    """
    x = Fraction(x)
    _check_point(x)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    s = {v: system.base(v) * x for v in system.variables}
    states = [IterationState(1, s)]
    for k in range(2, steps + 1):
        nxt = sweep(system, x, s)
        if any(nxt[v] < s[v] for v in system.variables):
            raise AssertionError(f"iteration decreased at step {k}")
        s = nxt
        if any(val > DIVERGENCE_THRESHOLD for val in s.values()):
            log.info("iteration exceeded %s at step %d", DIVERGENCE_THRESHOLD, k)
            states.append(IterationState(k, s, unbounded=True))
            break
        states.append(IterationState(k, s))
    return states


@dataclass(frozen=True)
class Enclosure:
    """Rigorous bounds lower <= s_n <= upper; ``exact`` when they coincide."""

    step: int
    lower: Mapping[str, Fraction]
    upper: Mapping[str, Fraction]

    @property
    def exact(self) -> bool:
        return self.lower == self.upper


def _round(v: Fraction, bits: int, up: bool) -> Fraction:
    scaled = v.numerator << bits
    q, r = divmod(scaled, v.denominator)
    if up and r:
        q += 1
    return Fraction(q, 1 << bits)


def iterate_enclosure(
    system: RecurrenceSystem, x, steps: int, bits: int | None = None, exact_limit: int = 4096
) -> list[Enclosure]:
    """Outward-rounded iterates: exact while numbers stay below ``exact_limit``
    bits, then dyadic with ``bits`` fractional bits.

    The map is monotone in every argument, so sweeping the lower (upper) bound
    and rounding down (up) keeps both sides valid.
    """
    x = Fraction(x)
    _check_point(x)
    if bits is None:
        bits = 128 + 4 * steps * max(1, math.ceil(math.log2(x.denominator / x.numerator)))
    lo = {v: system.base(v) * x for v in system.variables}
    hi = lo
    out = [Enclosure(1, lo, hi)]
    rounding = False
    for k in range(2, steps + 1):
        if not rounding:
            nxt = sweep(system, x, lo)
            if max(q.denominator.bit_length() for q in nxt.values()) <= exact_limit:
                lo = hi = nxt
                out.append(Enclosure(k, lo, hi))
                if any(val > DIVERGENCE_THRESHOLD for val in lo.values()):
                    break
                continue
            rounding = True
            lo = {v: _round(q, bits, False) for v, q in nxt.items()}
            hi = {v: _round(q, bits, True) for v, q in nxt.items()}
        else:
            lo = {v: _round(q, bits, False) for v, q in sweep(system, x, lo).items()}
            hi = {v: _round(q, bits, True) for v, q in sweep(system, x, hi).items()}
        out.append(Enclosure(k, lo, hi))
        if any(val > DIVERGENCE_THRESHOLD for val in lo.values()):
            break
    return out


@dataclass(frozen=True)
class SandwichViolation:
    var: str
    step: int
    kind: str  # "partial_sum", "no_domination", "undecided"


@dataclass
class SandwichReport:
    system: str
    x: Fraction
    steps: int
    violations: list[SandwichViolation] = field(default_factory=list)
    unbounded: bool = False

    @property
    def passed(self) -> bool:
        return not self.violations

    @property
    def status(self) -> str:
        kinds = {v.kind for v in self.violations}
        if "partial_sum" in kinds:
            return "partial-sum violation"
        if "no_domination" in kinds:
            return "no domination"
        if kinds:
            return "undecided"
        return "ok"

    def as_dict(self):
        return {
            "system": self.system,
            "x": _frac(self.x),
            "steps": self.steps,
            "status": self.status,
            "unbounded": self.unbounded,
            "violations": [vars(v) for v in self.violations],
        }


def sandwich_check(
    system: RecurrenceSystem, x, cert: Certificate | None, steps: int
) -> SandwichReport:
    """Check partial sum <= s_n (and s_n <= witness when a certificate is given)."""
    x = Fraction(x)
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if cert is not None:
        check_matches(system, cert)
    encl = iterate_enclosure(system, x, steps)
    table = evaluate(system, len(encl))
    sums = {v: partial_sums(table, v, x, len(encl)) for v in system.variables}
    report = SandwichReport(system.name, x, steps)
    for e in encl:
        for v in system.variables:
            if sums[v][e.step - 1] > e.lower[v]:
                report.violations.append(SandwichViolation(v, e.step, "partial_sum"))
            if cert is not None:
                w = cert.witness[v]
                if e.lower[v] > w:
                    report.violations.append(SandwichViolation(v, e.step, "no_domination"))
                elif e.upper[v] > w:
                    report.violations.append(SandwichViolation(v, e.step, "undecided"))
    report.unbounded = len(encl) < steps
    return report


# ---------------------------------------------------------------------------
# rationalization


def ceil_fraction(value, max_den: int) -> Fraction:
    """Smallest fraction >= value whose denominator is at most ``max_den``."""
    a = Fraction(value)
    if max_den < 1:
        raise ValueError("denominator bound must be >= 1")
    if a.denominator <= max_den:
        return a
    fl = a.numerator // a.denominator
    # Stern-Brocot descent with lp/lq < a < hp/hq, moving in maximal runs
    lp, lq, hp, hq = fl, 1, fl + 1, 1
    while lq + hq <= max_den:
        if Fraction(lp + hp, lq + hq) < a:
            # largest k with (lp + k hp)/(lq + k hq) < a
            k = _run_length(a * lq - lp, hp - a * hq)
            k = min(k, (max_den - lq) // hq)
            lp, lq = lp + k * hp, lq + k * hq
        else:
            k = _run_length(hp - a * hq, a * lq - lp)
            k = min(k, (max_den - hq) // lq)
            hp, hq = hp + k * lp, hq + k * lq
    return Fraction(hp, hq)


def _run_length(num: Fraction, den: Fraction) -> int:
    # largest integer k with k < num/den (num, den > 0)
    r = num / den
    k = math.ceil(r) - 1
    return max(k, 1)


def rationalize(
    system: RecurrenceSystem,
    approx: Mapping[str, float],
    x,
    denominator_bound: int,
) -> Certificate:
    """Round every approximate witness up to denominator <= D, then verify.

    Raises ``VerificationFailed`` (carrying the report) when the rounded
    witness does not satisfy the inequalities.
    """
    for v, a in approx.items():
        if not (math.isfinite(a) and a > 0):
            raise CertificateError(f"approximation for {v} must be finite and positive, got {a}")
    cert = Certificate(
        system.name,
        Fraction(x),
        {v: ceil_fraction(approx[v], denominator_bound) for v in system.variables if v in approx},
    )
    report = verify(system, cert)
    if not report.passed:
        names = ", ".join(c.var for c in report.failures)
        raise VerificationFailed(f"rounded witness fails inequalities for {names}", report)
    return cert


def polish(
    system: RecurrenceSystem,
    cert: Certificate,
    denominator_bound: int,
    margin,
    max_steps: int = 20_000,
) -> Certificate:
    """Push a nearly valid witness up until it satisfies every inequality.

    Iterates ``w <- max(w, ceil_D((1 + margin) * RHS(w)))`` in topological
    order, exactly. Each step can only raise components, so the loop either
    reaches a witness the verifier accepts or runs away (the point is too
    close to the radius for this denominator bound).
    """
    check_matches(system, cert)
    x, w = cert.x, {v: cert.witness[v] for v in system.variables}
    factor = 1 + Fraction(margin)
    for _ in range(max_steps):
        candidate = Certificate(cert.system, x, w)
        report = verify(system, candidate)
        if report.passed:
            return candidate
        new = {}
        for v in system.topo_order():
            target = ceil_fraction(factor * gf_rhs(system, v, x, w, new), denominator_bound)
            new[v] = max(w[v], target)
        if any(val > DIVERGENCE_THRESHOLD for val in new.values()):
            break
        w = {v: new[v] for v in system.variables}
    raise VerificationFailed(
        "witness repair did not reach a valid certificate", verify(system, Certificate(cert.system, x, w))
    )
