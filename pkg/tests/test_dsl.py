from pathlib import Path

import pytest
from hypothesis import given, settings, strategies as st

from dagkit import dsl
from dagkit.expr import DslError

DATA = Path(__file__).parent / "data"

EXAMPLE = """\
def f(x) = x^2;
cdga A { gens x:0, Y:1, Z:1; diff Y -> f(x), Z -> x^3; }
ring R { vars x, y; ideal x*y - 1; }
ring L { vars x; ideal x^2; }
morphism p : A -> L { x -> x, Y -> 0, Z -> 0; }
cover C of R { x, 1 - x*y + x; }
cdga U = crit f;
action Q of Gm on U { x -> g*x, eta_x -> g*eta_x; }
"""


def err(text):
    with pytest.raises(DslError) as e:
        dsl.parse(text)
    return e.value


def test_example_parses():
    ws = dsl.parse(EXAMPLE)
    assert ws.names() == ["f", "A", "R", "L", "p", "C", "U", "Q"]
    assert ws.names("ring") == ["R", "L"]
    A = ws.get("A", ("cdga",))
    assert str(A.d("Y")) == "x^2"
    assert A.validate().ok
    with pytest.raises(KeyError):
        ws.get("A", ("ring",))
    with pytest.raises(KeyError):
        ws.get("nothing")


def test_empty_file_and_comments():
    assert len(dsl.parse("")) == 0
    assert len(dsl.parse("  \n# only a comment\n")) == 0


def test_data_files_parse():
    for path in sorted(DATA.glob("*.dga")):
        ws = dsl.parse_file(path)
        assert len(ws) > 0, path.name


def test_roundtrip_example():
    ws = dsl.parse(EXAMPLE)
    text = dsl.serialize(ws)
    ws2 = dsl.parse(text)
    assert dsl.serialize(ws2) == text
    assert ws2.to_dict() == ws.to_dict()


def test_degree_error_points_at_arrow():
    e = err("cdga A { gens x:0, Y:1, Z:1;\n diff Y -> Z; }")
    assert e.kind == "degree"
    assert (e.span.line, e.span.col) == (2, 9)
    assert str(e).startswith("2:9:")


def test_duplicate_name():
    e = err("ring R { vars x; }\nring R { vars y; }")
    assert e.kind == "semantic" and "duplicate" in e.message
    assert e.span.line == 2


def test_unbound_references():
    e = err("morphism p : A -> B { x -> x; }")
    assert e.kind == "semantic" and (e.span.line, e.span.col) == (1, 14)
    e = err("cdga A { gens x:0, Y:1; diff Y -> q; }")
    assert "'q'" in e.message and e.span.col == 35


def test_forward_reference_is_unbound():
    e = err("cover C of R { x; }\nring R { vars x; }")
    assert e.kind == "semantic" and e.span.line == 1


def test_syntax_errors():
    e = err("cdga A { gens x:0 diff }")
    assert e.kind == "parse" and e.span.col == 19
    e = err("frob X;")
    assert e.kind == "parse" and (e.span.line, e.span.col) == (1, 1)


def test_d_squared_and_morphism_failures():
    e = err("cdga W { gens x:0, Y:1, u:2; diff Y -> x^2, u -> x*Y; }")
    assert e.kind == "semantic" and "d^2" in e.message
    e = err("ring L { vars x; }\ncdga A { gens x:0, Y:1; diff Y -> x; }\nmorphism p : A -> L { x -> x; }")
    assert e.kind == "semantic" and e.span.line == 3


# ---------------------------------------------------------- round trip

coeff = st.integers(min_value=-3, max_value=3)


@st.composite
def polys(draw, names):
    terms = []
    for _ in range(draw(st.integers(min_value=1, max_value=3))):
        c = draw(coeff.filter(bool))
        mono = "*".join("%s^%d" % (v, draw(st.integers(1, 3))) for v in names if draw(st.booleans()))
        terms.append("%d*%s" % (c, mono) if mono else str(c))
    return " + ".join(terms)


@st.composite
def workspaces(draw):
    lines = []
    for k in range(draw(st.integers(min_value=1, max_value=3))):
        nvars = draw(st.integers(min_value=1, max_value=2))
        vs = ["x", "y"][:nvars]
        if draw(st.booleans()):
            ideal = [draw(polys(vs)) for _ in range(draw(st.integers(0, 2)))]
            body = "vars %s;" % ", ".join(vs)
            if ideal:
                body += " ideal %s;" % ", ".join(ideal)
            lines.append("ring R%d { %s }" % (k, body))
        else:
            nodd = draw(st.integers(min_value=0, max_value=2))
            odd = ["E%d" % i for i in range(nodd)]
            gens = ", ".join(["%s:0" % v for v in vs] + ["%s:1" % e for e in odd])
            body = "gens %s;" % gens
            if odd:
                body += " diff %s;" % ", ".join("%s -> %s" % (e, draw(polys(vs))) for e in odd)
            lines.append("cdga A%d { %s }" % (k, body))
    if draw(st.booleans()):
        lines.insert(0, "def f(x) = %s;" % draw(polys(["x"])))
    return "\n".join(lines)


@settings(max_examples=40, deadline=None)
@given(workspaces())
def test_serialize_parse_roundtrip(text):
    ws = dsl.parse(text)
    out = dsl.serialize(ws)
    ws2 = dsl.parse(out)
    assert dsl.serialize(ws2) == out
    assert ws2.to_dict() == ws.to_dict()
    assert ws2.names() == ws.names()
