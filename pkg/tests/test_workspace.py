import pytest
from hypothesis import given
from hypothesis import strategies as st

from nccech.cech import ext
from nccech.coeff import Window
from nccech.examples import line_bundle, p1
from nccech.qcoh import validate_module
from nccech.workspace import Workspace, WorkspaceError, module_to_text, parse_matrix_literal

HEADER = """field QQ
tweight 0
window -4:4 cap 12 pmax 2
poset P
  elements 0 1 2
  less 0 1
  less 0 2
  meet 1 2 = 0
end
algebra L
  letters x:1 z:-1
  rule x*z -> 1
  rule z*x -> 1
end
algebra A
  letters x:1
end
algebra B
  letters y:-1
end
scheme S on P
  chart 0 L
  chart 1 A
  chart 2 B
  glue 0 1 x=x
  glue 0 2 y=z
end
module O = structure S
"""


def bundle_text(n):
    psi = "x^%d" % n if n > 0 else ("z^%d" % -n if n < 0 else "1")
    return "module L%d on S\n  rank 1\n  shift 2 %d\n  psi 0 2 [[%s]]\nend\n" % (n, -n, psi)


@given(st.integers(-3, 3))
def test_workspace_modules_agree_with_library(n):
    ws = Workspace(HEADER + bundle_text(n))
    M = ws.module("L%d" % n)
    W = Window.interval(-4, 4)
    assert validate_module(M, W).valid
    S = p1()
    assert ext(ws.module("O"), M, W).table() == ext(line_bundle(S, 0), line_bundle(S, n), W).table()


def test_settings_are_read():
    ws = Workspace(HEADER)
    assert str(ws.require_window()) == "-4:4" and ws.length_cap == 12 and ws.pmax == 2


def test_errors_carry_line_numbers_and_are_collected():
    text = HEADER + "module M on S\n  rank 1\n  psi 0 3 [[1]]\nend\nfrobnicate\nmodule N = twist Q by 1\n"
    with pytest.raises(WorkspaceError) as exc:
        Workspace(text)
    errors = exc.value.errors
    lines = [line for line, _ in errors]
    base = HEADER.count("\n")
    assert base + 5 in lines  # frobnicate
    assert base + 6 in lines  # twist of an undeclared module


def test_inhomogeneous_rule_is_reported_with_its_line():
    text = HEADER.replace("  rule z*x -> 1\n", "  rule z*x -> 1\n  rule x*x -> x\n")
    with pytest.raises(WorkspaceError) as exc:
        Workspace(text)
    line = text.splitlines().index("  rule x*x -> x") + 1
    assert any(l == line and "homogeneous" in m for l, m in exc.value.errors)


@pytest.mark.parametrize("old,new,needle", [
    ("  glue 0 2 y=z\n", "", "missing glue 0 2"),
    ("  chart 1 A\n", "  chart 1 Nope\n", "unknown algebra 'Nope'"),
    ("module O = structure S", "module O = structure T", "unknown scheme 'T'"),
])
def test_scheme_reference_errors(old, new, needle):
    with pytest.raises(WorkspaceError) as exc:
        Workspace(HEADER.replace(old, new))
    assert any(needle in m for _, m in exc.value.errors)


def test_matrix_literal():
    assert parse_matrix_literal("[[1, x], [0, z^2]]") == [["1", "x"], ["0", "z^2"]]
    with pytest.raises(ValueError):
        parse_matrix_literal("[[1, 2], [3]]")
    with pytest.raises(ValueError):
        parse_matrix_literal("1, 2")


def test_objects_sums_and_shifts():
    ws = Workspace(HEADER + bundle_text(1) + bundle_text(-2))
    X = ws.object("L-2[1]")
    assert list(X.terms) == [-1]
    Y = ws.object("O + L1")
    assert Y.terms[0].rank == 2
    with pytest.raises(WorkspaceError):
        ws.object("Q")


@given(st.integers(-3, 3), st.integers(-3, 3))
def test_module_text_roundtrip(a, b):
    ws = Workspace(HEADER + bundle_text(a) + ("" if a == b else bundle_text(b))
                   + "module T = L%d + L%d\n" % (a, b))
    M = ws.module("T")
    again = Workspace(HEADER + module_to_text(M, "S", "T2")).module("T2")
    assert again.shifts == M.shifts and again.gluings == M.gluings


def test_prime_field_workspace():
    ws = Workspace(HEADER.replace("field QQ", "field GF(7)") + bundle_text(-3))
    rep = ext(ws.module("O"), ws.module("L-3"), Window.interval(-4, 4))
    assert rep.totals() == {0: 0, 1: 2, 2: 0}


def test_tower_with_override():
    text = HEADER.replace("tweight 0", "tweight 1") + "tower T\n  scheme S\n  levels 3\nend\n"
    T = Workspace(text).tower("T")
    assert T.top == 3 and T.level(3).ring.order == 3 and T.level(1).ring.t_weight == (1,)
