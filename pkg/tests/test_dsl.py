import pytest
from hypothesis import given, settings, strategies as st

from anyonvm import dsl
from anyonvm.dsl import ParseError, ValidationError, format_script, parse_script
from anyonvm.protocols import protocol_dir

SHIPPED = sorted(protocol_dir().glob("*.anyon"))

SMALL = """\
protocol tiny
input qubit1221
ancilla qubit1221 0.7071067811865476 0.7071067811865476j
output qubit1221

checkpoint J
measure_pair 4 {
  0 => remove 4
  2 => { measure_block 5..8 { 0 => retry J; 2 => abort "stuck"; 4 => abort "unreachable" } }
}
emit_gate
"""


def test_shipped_corpus_present():
    names = {p.name for p in SHIPPED}
    assert {"qubit_gate.anyon", "qutrit_gate.anyon", "eg_protocol.anyon", "prepare_a1.anyon"} <= names
    assert len(SHIPPED) >= 20


@pytest.mark.parametrize("path", SHIPPED, ids=lambda p: p.stem)
def test_shipped_script_is_canonical(path):
    text = path.read_text()
    script = parse_script(text)
    assert format_script(script) == text
    assert parse_script(format_script(script)) == script


def test_small_script_round_trip():
    s = parse_script(SMALL)
    assert s.name == "tiny"
    assert s.input_kinds == ("qubit1221",)
    assert s.ancilla == ("qubit1221", (0.7071067811865476, 0.7071067811865476j))
    assert s.loop_bound == 10
    out = format_script(s)
    assert parse_script(out) == s
    assert format_script(parse_script(out)) == out


def test_semicolons_and_newlines_are_equivalent():
    a = parse_script(SMALL)
    b = parse_script(SMALL.replace("0 => retry J; 2 => abort \"stuck\"", "0 => retry J\n2 => abort \"stuck\""))
    assert a.steps == b.steps


def test_register_layout_headers():
    s = parse_script(protocol_dir().joinpath("qutrit_gate.anyon").read_text())
    assert s.joined
    assert s.register_kinds() == ["qutrit2222~qutrit2222"]
    assert s.initial_shape().leaves == (2, 2, 2, 2, 2, 2)


@pytest.mark.parametrize("text, fragment", [
    ("protocol x\ninput qubit1221\nbraid 9 +\n", "out of range"),
    ("protocol x\ninput qubit1221\nfoo 1\n", "unknown step"),
    ("protocol x\ninput qubit1221\nmeasure_pair 1 { 0 => continue }\n", "not admissible"),
    ("protocol x\ninput qubit1221\nmeasure_pair 2 { 0 => continue }\n", "no branch"),
    ("protocol x\ninput qubit1221\nretry K\n", "K"),
    ("protocol x\ninput qubit1221\nbraid 1 *\n", ""),
    ("protocol x\ninput qubit1221\nmeasure_pair 2 { 0 => continue\n", ""),
    ('protocol x\ninput qubit1221\nabort "open\n', ""),
])
def test_rejects_bad_scripts(text, fragment):
    with pytest.raises(ParseError) as info:
        parse_script(text)
    assert fragment in str(info.value)


def test_errors_carry_positions():
    with pytest.raises(ParseError) as info:
        parse_script("protocol x\ninput qubit1221\n\n   bogus 3\n")
    assert "line 4" in str(info.value)


def test_validation_can_be_skipped():
    text = "protocol x\ninput qubit1221\nbraid 9 +\n"
    with pytest.raises(ValidationError):
        parse_script(text)
    assert len(parse_script(text, validate=False).steps) == 1


def test_wildcard_covers_remaining_outcomes():
    text = "protocol x\ninput qubit1221\nmeasure_pair 2 { 0 => continue; _ => abort \"other\" }\nemit_gate\n"
    step = parse_script(text).steps[0]
    assert step.table(2).outcomes is None
    assert step.table(0).outcomes == (0,)


def test_block_outcomes():
    # the 2-pair of a 1221 qubit sits between two charge-1 edges
    assert dsl.block_outcomes((1, 2, 2, 1), 0, 2, 3) == {0, 2}
    assert dsl.block_outcomes((2, 2, 2, 2), 0, 2, 3) == {0, 2, 4}
    assert dsl.block_outcomes((1, 2, 2, 1), 0, 1, 2) == {1, 3}


@pytest.mark.parametrize("text, value", [
    ("1", 1), ("-0.5", -0.5), ("2j", 2j), ("0.5+0.5j", 0.5 + 0.5j), ("1e-3-2j", 1e-3 - 2j),
])
def test_parse_complex(text, value):
    assert dsl.parse_complex(text) == value


braid_lines = st.lists(
    st.tuples(st.integers(1, 3), st.sampled_from("+-")).map(lambda t: f"braid {t[0]} {t[1]}"),
    min_size=1, max_size=12,
)


@settings(max_examples=60, deadline=None)
@given(braid_lines, st.sampled_from(["\n", "; "]))
def test_braid_sequences_round_trip(lines, sep):
    text = "protocol gen\ninput qubit1221\noutput qubit1221\n\n" + sep.join(lines) + "\nemit_gate\n"
    s = parse_script(text)
    assert [(b.position, b.sign) for b in s.steps[:-1]] == [
        (int(l.split()[1]), 1 if l.endswith("+") else -1) for l in lines
    ]
    assert parse_script(format_script(s)) == s
