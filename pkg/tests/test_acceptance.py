"""Acceptance criteria 1-9, one pass/fail line each (see the summary section
at the end of the pytest run)."""

import time
from fractions import Fraction as Q

from conftest import BS17_WITNESS, BS17_X, KR6_WITNESS, KR6_X
from polybound import data_path
from polybound.certificate import (
    Certificate,
    critical_witness,
    parse_certificate,
    render_certificate,
    sandwich_check,
    verify,
)
from polybound.oracle import check_domination, check_lemma, count_fixed, load_masks, typed_counts
from polybound.search import SearchConfig, search
from polybound.sequences import evaluate


def best_time(fn, repeat=50):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def _verify_file(system, name):
    text = data_path(name).read_text(encoding="utf-8")

    def job():
        return verify(system, parse_certificate(text))

    return job(), best_time(job)


def test_1_six_type_certificate(kr6, criterion):
    report, t = _verify_file(kr6, "kr6.cert")
    cert_ok = report.x == KR6_X and {c.var: c.lhs for c in report.checks} == KR6_WITNESS
    ok = cert_ok and report.passed and all(c.slack > 0 for c in report.checks) and t < 1e-3
    criterion(1, "six-type certificate x = 100/463 passes with positive slack", ok,
              f"min slack {float(min(c.slack for c in report.checks)):.3e}, {t * 1e3:.3f} ms")
    assert ok


def test_2_seventeen_type_certificate(bs17, criterion):
    report, t = _verify_file(bs17, "bs17.cert")
    cert_ok = report.x == BS17_X and {c.var: c.lhs for c in report.checks} == BS17_WITNESS
    ok = cert_ok and report.passed and len(report.checks) == 17 and t < 1e-3
    criterion(2, "seventeen-type certificate x = 10000/45238 passes", ok, f"{t * 1e3:.3f} ms")
    assert ok


def test_3_mutation_rejection(kr6, bs17, kr6_cert, bs17_cert, criterion):
    wrong = []
    for system, cert in ((kr6, kr6_cert), (bs17, bs17_cert)):
        for v in system.variables:
            w = dict(cert.witness)
            w[v] = critical_witness(system, v, cert) - Q(1, 10**6)
            failed = [c.var for c in verify(system, Certificate(cert.system, cert.x, w)).failures]
            if failed != [v]:
                wrong.append((system.name, v, failed))
    ok = not wrong
    criterion(3, "lowering any one witness below its threshold fails exactly that inequality", ok,
              f"23 mutations, {len(wrong)} wrong")
    assert ok, wrong


def test_4_spot_values(kr6, criterion):
    t = evaluate(kr6, 3)
    expected = {
        ("G", 2): 2, ("F", 2): 3, ("H", 2): 2, ("L", 2): 2, ("M", 2): 2, ("E", 2): 1,
        ("G", 3): 6, ("F", 3): 10, ("H", 3): 5,
    }
    bad = {k: t[k] for k, v in expected.items() if t[k] != v}
    ok = not bad
    criterion(4, "six-type hat values at n = 2, 3", ok, f"mismatches {bad}" if bad else "")
    assert ok


def test_5_sandwich(kr6, bs17, kr6_cert, bs17_cert, criterion):
    results = []
    for system, cert in ((kr6, kr6_cert), (bs17, bs17_cert)):
        t0 = time.perf_counter()
        report = sandwich_check(system, cert.x, cert, 50)
        results.append((report.passed, time.perf_counter() - t0))
    ok = all(p and t < 1.0 for p, t in results)
    criterion(5, "partial sums <= iterates <= witnesses for n <= 50, both systems", ok,
              ", ".join(f"{t:.2f} s" for _, t in results))
    assert ok


def test_6_certificate_domination(kr6, bs17, criterion):
    t0 = time.perf_counter()
    bad = []
    for system, x, g in ((kr6, KR6_X, Q(67, 82)), (bs17, BS17_X, Q(4757, 5000))):
        col = evaluate(system, 500).column("G")
        p, q = x.numerator, x.denominator
        # G(n) p^n / q^n <= g.num / g.den, compared in integers
        pn, qn = 1, 1
        for n, c in enumerate(col, 1):
            pn, qn = pn * p, qn * q
            if c * pn * g.denominator > g.numerator * qn:
                bad.append((system.name, n))
    elapsed = time.perf_counter() - t0
    ok = not bad and elapsed < 30
    criterion(6, "G_hat(n) x^n <= g for n <= 500, both systems", ok, f"{elapsed:.2f} s")
    assert ok, bad[:5]


def test_7_oracle_counts(criterion):
    t0 = time.perf_counter()
    counts = count_fixed(8)
    elapsed = time.perf_counter() - t0
    ok = counts == [1, 2, 6, 19, 63, 216, 760, 2725] and elapsed < 10
    criterion(7, "fixed polyomino counts n = 1..8", ok, f"{counts[-1]} at n = 8, {elapsed:.2f} s")
    assert ok


def test_8_oracle_inequalities(kr6, bs17, criterion):
    t0 = time.perf_counter()
    masks = load_masks()
    problems = []
    for system in (kr6, bs17):
        counts = typed_counts(8, [masks[v] for v in system.variables])
        lemma = check_lemma(system, 8, masks, counts)
        dom = check_domination(system, 8, masks, counts)
        problems += [(system.name, e.var, e.n) for e in lemma.violations] + dom.violations
    elapsed = time.perf_counter() - t0
    ok = not problems and elapsed < 60
    criterion(8, "inequalities and A <= G_true <= G_hat on true counts, n <= 8", ok, f"{elapsed:.2f} s")
    assert ok, problems


def test_9_search(kr6, bs17, criterion):
    rows = []
    for system, limit in ((kr6, Q(463, 100)), (bs17, Q(4524, 1000))):
        t0 = time.perf_counter()
        res = search(system, SearchConfig(tol=1e-4))
        elapsed = time.perf_counter() - t0
        # re-read the emitted file text so the check is independent of the search
        text_cert = parse_certificate(render_certificate(res.certificate, system.variables))
        ok = res.bound <= limit and verify(system, text_cert).passed and elapsed < 120
        rows.append((system.name, ok, float(res.bound), elapsed))
    ok = all(r[1] for r in rows)
    criterion(9, "search emits verified certificates (<= 4.63 and <= 4.524)", ok,
              ", ".join(f"{n} {b:.7f} in {t:.1f} s" for n, _, b, t in rows))
    assert ok

