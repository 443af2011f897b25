from fractions import Fraction as Q

import pytest

from conftest import BS17_WITNESS, KR6_WITNESS
from polybound.certificate import verify
from polybound.errors import BracketError
from polybound.search import SearchConfig, probe, search
from polybound.system import parse_system

GEOMETRIC = "system geo root S\nS(1) = 1\nS += 1 * x^1 * S\n"


def test_probe_converges_above_the_published_bound(kr6):
    r = probe(kr6, 4.63)
    assert r.converged
    assert r.values["G"] < float(KR6_WITNESS["G"])
    assert all(r.values[v] < float(w) for v, w in KR6_WITNESS.items())


def test_probe_diverges_below_the_radius(kr6):
    assert not probe(kr6, 4.0).converged
    with pytest.raises(ValueError):
        probe(kr6, 1.0)


def test_bs17_probe_below_witnesses(bs17):
    r = probe(bs17, 4.5238)
    assert r.converged
    assert all(r.values[v] <= float(w) for v, w in BS17_WITNESS.items())


def test_probe_monotone_in_bound(kr6):
    bounds = [4.5, 4.6, 4.628, 4.63, 4.7, 5.0, 6.0]
    flags = [probe(kr6, b).converged for b in bounds]
    assert flags == sorted(flags)
    vals = [probe(kr6, b).values["G"] for b in bounds if probe(kr6, b).converged]
    assert vals == sorted(vals, reverse=True)


def test_geometric_system():
    # S = x + x S has radius 1
    s = parse_system(GEOMETRIC)
    res = search(s, SearchConfig(lower=1.0, upper=2.0, tol=1e-3))
    assert 1 < res.bound <= Q(1002, 1000)
    assert verify(s, res.certificate).passed


def test_search_kr6(kr6):
    res = search(kr6, SearchConfig(tol=1e-4))
    assert res.bound <= Q(463, 100)
    assert verify(kr6, res.certificate).passed
    assert res.certificate.bound == res.bound
    assert res.largest_diverged < float(res.bound)
    assert float(res.bound) - res.largest_diverged <= 1e-4 + 1e-7


def test_bracket_errors(kr6):
    with pytest.raises(BracketError, match="lower"):
        search(kr6, SearchConfig(lower=4.7, upper=6.0))
    with pytest.raises(BracketError, match="upper"):
        search(kr6, SearchConfig(lower=3.0, upper=4.2))


def test_config_validation():
    with pytest.raises(ValueError):
        SearchConfig(lower=5, upper=4)
    with pytest.raises(ValueError):
        SearchConfig(tol=0)
