from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings

from sdnqos.errors import ParseError, UnknownPrefix
from sdnqos.n3 import Document, Rule, parse, serialize
from sdnqos.terms import RDF_TYPE, XSD_DECIMAL, XSD_DOUBLE, XSD_INTEGER, BlankNode, Iri, ListTerm, Literal, Triple, Variable
from tests.support import corpus, documents, documents_isomorphic

EX = "http://ex/"


def test_minimal_document():
    doc = parse("@prefix ex: <http://ex/> . ex:a ex:b ex:c .")
    assert doc.triples == [Triple(Iri(EX + "a"), Iri(EX + "b"), Iri(EX + "c"))]
    assert doc.prefixes == {"ex": EX}


def test_list_syntax():
    doc = parse("@prefix ex: <http://ex/> . ex:c ex:productOf ( 2 3 ) .")
    assert doc.triples[0].o == ListTerm([Literal.of(2), Literal.of(3)])


def test_minimal_rule():
    doc = parse("@prefix ex: <http://ex/> . { ?x ex:p ?y } => { ?y ex:q ?x } .")
    (rule,) = doc.rules
    assert rule.premise == (Triple(Variable("x"), Iri(EX + "p"), Variable("y")),)
    assert rule.conclusion == (Triple(Variable("y"), Iri(EX + "q"), Variable("x")),)


def test_variable_outside_rule_is_error():
    with pytest.raises(ParseError) as err:
        parse("@prefix ex: <http://ex/> .\nex:a ex:b ?x .")
    assert err.value.line == 2


def test_unknown_prefix():
    with pytest.raises(UnknownPrefix) as err:
        parse("@prefix ex: <http://ex/> .\n\nfoo:a ex:b ex:c .")
    assert err.value.line == 3


def test_numeric_tokens():
    doc = parse("@prefix ex: <http://ex/> . ex:a ex:b 30, 0.95, 1.5e3, -2 .")
    assert {t.o for t in doc.triples} == {
        Literal("30", XSD_INTEGER), Literal("0.95", XSD_DECIMAL),
        Literal("1.5E3", XSD_DOUBLE), Literal("-2", XSD_INTEGER),
    }


def test_sugar():
    doc = parse('''@prefix ex: <http://ex/> .
        ex:a a ex:T ; ex:p [ ex:q "v" ] , true .''')
    assert Triple(Iri(EX + "a"), RDF_TYPE, Iri(EX + "T")) in doc.triples
    anon = [t.o for t in doc.triples if t.p == Iri(EX + "p") and isinstance(t.o, BlankNode)]
    assert len(anon) == 1
    assert Triple(anon[0], Iri(EX + "q"), Literal("v")) in doc.triples


def test_typed_literal_is_canonicalised():
    doc = parse('@prefix ex: <http://ex/> . @prefix xsd: <http://www.w3.org/2001/XMLSchema#> .'
                ' ex:a ex:b "007"^^xsd:integer .')
    assert doc.triples[0].o == Literal("7", XSD_INTEGER)


@pytest.mark.parametrize("text", [
    "{ ?x <http://p> ?y } <= { ?y <http://q> ?x } .",
    "{ ?x <http://p> ?y } => { ?z <http://q> ?x } .",
    "{ } => { <http://a> <http://b> <http://c> } .",
    "{ { <http://a> <http://b> <http://c> } => { } } => { <http://a> <http://b> <http://c> } .",
    '<http://a> <http://b> "unterminated .',
    "<relative> <http://b> <http://c> .",
    "<http://a> <http://b> <http://c>",
    '"lit" <http://b> <http://c> .',
    "@forAll <http://x> .",
])
def test_syntax_errors_are_positioned(text):
    with pytest.raises(ParseError) as err:
        parse(text)
    assert err.value.line >= 1 and err.value.column >= 1


def test_serialize_empty():
    assert serialize(Document()) == ""
    assert serialize(Document({"ex": EX})) == "@prefix ex: <http://ex/> .\n"


def test_serialize_one_triple():
    text = serialize(Document({}, [Triple(Iri(EX + "a"), Iri(EX + "b"), Literal.of(1))]))
    assert text == "<http://ex/a> <http://ex/b> 1 .\n"


def test_serialize_rule_block():
    rule = Rule((Triple(Variable("x"), Iri(EX + "p"), Variable("y")),),
                (Triple(Variable("y"), Iri(EX + "q"), Variable("x")),))
    text = serialize(Document({"ex": EX}, [rule]))
    assert "{\n    ?x ex:p ?y .\n} => {\n    ?y ex:q ?x .\n} ." in text
    assert parse(text).rules == [rule]


def test_iri_escapes_round_trip():
    t = Triple(Iri("http://ex/with space"), Iri(EX + "p"), Iri("http://ex/quote\"d"))
    assert parse(serialize(Document({}, [t]))).triples == [t]


@settings(max_examples=300, deadline=None, suppress_health_check=list(HealthCheck))
@given(documents())
def test_round_trip(doc):
    text = serialize(doc)
    back = parse(text)
    assert documents_isomorphic(doc, back)
    assert serialize(back) == text


@pytest.mark.parametrize("text", corpus())
def test_shipped_documents_round_trip(text):
    doc = parse(text)
    again = parse(serialize(doc))
    assert documents_isomorphic(doc, again)


def test_prefix_with_inner_dot_survives_round_trip():
    doc = parse("@prefix ma.th: <http://ex.org/m#> .\nma.th:a ma.th:b ma.th:c .\n")
    assert parse(serialize(doc)).prefixes == {"ma.th": "http://ex.org/m#"}


def test_prefix_namespace_with_escaped_control_character():
    doc = parse("@prefix p: <http://ex.org/\\u0002/> .\np:a p:b p:c .\n")
    text = serialize(doc)
    assert "\\u0002" in text
    assert parse(text) == doc
