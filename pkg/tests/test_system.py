import pytest

from polybound.errors import SystemDefinitionError
from polybound.system import BUILTIN_NAMES, Term, builtin_system, parse_system, render_system, topo_order

TINY = """\
system tiny root S
S(1) = 1
T(1) = 1
T += 1 * x^0 * S
S += 1 * x^1 * T
"""


def test_builtin_names():
    assert set(BUILTIN_NAMES) == {"KR6", "BS17"}
    with pytest.raises(KeyError):
        builtin_system("nope")


def test_kr6_shape(kr6):
    assert kr6.variables == tuple("EFGHLM")
    assert kr6.root == "G"
    assert all(kr6.base(v) == 1 for v in kr6.variables)
    assert kr6.equation("E").terms == (Term(1, 1, ("F",)),)
    assert kr6.equation("M").terms == (
        Term(1, 1, ("G",)), Term(1, 1, ("H",)), Term(1, 1, ("E", "M")),
    )
    shifts = {t.shift for v in kr6.variables for t in kr6.equation(v).terms}
    assert shifts == {0, 1}


def test_bs17_shape(bs17):
    assert len(bs17.variables) == 17
    assert [v for v in bs17.variables if bs17.base(v)] == list("CDEFGH")
    u = bs17.equation("U").terms
    assert Term(1, 0, ("U", "Z", "Z")) in u
    assert max(t.arity for v in bs17.variables for t in bs17.equation(v).terms) == 3
    shifts = {t.shift for v in bs17.variables for t in bs17.equation(v).terms}
    assert shifts == {0, 1, 2}


def test_gf_constant(kr6, bs17):
    # F(1) = 1 is already produced by the G term, so the bare x drops out
    assert kr6.gf_constant("F") == 0
    assert kr6.gf_constant("G") == 1
    assert bs17.gf_constant("G") == 0
    assert bs17.gf_constant("P") == 0


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_topo_order_respects_same_index_edges(name):
    system = builtin_system(name)
    order = topo_order(system)
    assert sorted(order) == sorted(system.variables)
    pos = {v: i for i, v in enumerate(order)}
    for v in system.variables:
        for dep in system.same_index_deps(v):
            assert pos[dep] < pos[v]


def test_multi_factor_shift0_is_not_an_edge(bs17):
    # U reads U only through U*Z*Z, whose factors all sit at indices < n
    assert "U" not in bs17.same_index_deps("U")
    assert bs17.same_index_deps("F") == ("G", "P")


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_render_parse_round_trip(name):
    system = builtin_system(name)
    again = parse_system(render_system(system))
    assert again.variables == system.variables
    assert again.equations == system.equations
    assert again.root == system.root


def test_parse_small():
    s = parse_system(TINY)
    assert s.topo_order() == ("S", "T")
    assert s.equation("T").terms == (Term(1, 0, ("S",)),)


def test_comments_and_blank_lines():
    s = parse_system("# header\n\n" + TINY.replace("S(1) = 1", "S(1) = 1   # start"))
    assert s.base("S") == 1


@pytest.mark.parametrize(
    "text, match",
    [
        ("system c root S\nS(1) = 1\nS += 1 * x^0 * S\n", "cyclic"),
        ("system c root S\nS(1) = 1\nT(1) = 1\nS += 1 * x^0 * T\nT += 1 * x^0 * S\n", "cyclic"),
        ("system u root S\nS(1) = 1\nS += 1 * x^1 * Q\n", "unknown variable 'Q'"),
        ("system d root S\nS(1) = 1\nS(1) = 2\n", "duplicate variable"),
        ("system n root S\nS(1) = 1\nS += -2 * x^1 * S\n", "negative coefficient"),
        ("system n root S\nS(1) = -1\n", "negative coefficient"),
        ("system a root S\nS(1) = 1\nS += 1 * x^1 * S * S * S * S\n", "arity"),
        ("system k root S\nS(1) = 1\nS += 1 * x^1\n", "never applies"),
        ("system r root Z\nS(1) = 1\n", "root"),
        ("S(1) = 1\n", "header"),
        ("system o root S\nS(1) = 0\nT(1) = 1\nS += 1 * x^0 * T\n", "smaller"),
    ],
)
def test_parse_errors(text, match):
    with pytest.raises(SystemDefinitionError, match=match):
        parse_system(text)


def test_syntax_error_has_line_number():
    with pytest.raises(SystemDefinitionError, match="line 3"):
        parse_system("system s root S\nS(1) = 1\nS = what\n")


def test_arity_directive():
    s = parse_system("system a root S\narity 4\nS(1) = 1\nS += 1 * x^1 * S * S * S * S\n")
    assert s.max_arity == 4
    assert "arity 4" in render_system(s)
