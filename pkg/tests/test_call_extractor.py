from logic.call_extractor import class_from_type, extract_facts
from logic.island_lexer import load_lexicon
from models.fact_models import (
    TOPLEVEL_SCOPE,
    UNRESOLVED_CALLEE,
    ArgKind,
    DefKind,
    ReceiverKind,
)
from tests.dump_builder import (
    DRAWING_API_SNIPPET,
    binop,
    call,
    compound,
    decl_ref,
    float_lit,
    function,
    int_lit,
    member_call,
    member_ref,
    method,
    record,
    render,
    str_lit,
    subscript,
    this_ref,
    tu,
    unop,
    var,
    water,
)

CPP = load_lexicon("cpp")


def _indent(text: str, prefix: str) -> str:
    return "".join(prefix + line + "\n" for line in text.splitlines())


def test_member_variable_receiver_inside_method() -> None:
    dump = (
        "CXXMethodDecl 0x1 <line:40:1, line:44:1> line:40:19 draw 'void ()'\n"
        "`-CompoundStmt 0x2 <col:26, line:44:1>\n"
        + _indent(DRAWING_API_SNIPPET, "  ")
    )
    result = extract_facts(dump, "shapes.cpp", CPP)
    assert len(result.facts) == 1
    fact = result.facts[0]
    assert fact.callee == "drawCircle"
    assert fact.receiver_class == "DrawingAPI"
    assert fact.receiver_kind is ReceiverKind.MEMBER_VARIABLE
    assert fact.caller_scope == "draw"
    assert fact.caller_class == "CircleShape"
    assert [(d.name, d.class_name, d.kind) for d in result.defs] == [
        ("draw", "CircleShape", DefKind.MEMBER)
    ]


def test_snippet_without_definition_is_toplevel() -> None:
    result = extract_facts(DRAWING_API_SNIPPET, "shapes.cpp", CPP)
    (fact,) = result.facts
    assert fact.caller_scope == TOPLEVEL_SCOPE
    assert fact.caller_class == "CircleShape"
    assert fact.receiver_class == "DrawingAPI"


def test_named_object_receiver_with_argument() -> None:
    dump = render(
        tu(
            function(
                "main",
                member_call(
                    "read",
                    decl_ref("businessContact", "Contact"),
                    var("cin", "std::istream"),
                    arrow=False,
                ),
            )
        )
    )
    (fact,) = extract_facts(dump, "main.cpp", CPP).facts
    assert fact.callee == "read"
    assert fact.receiver_class == "Contact"
    assert fact.receiver_kind is ReceiverKind.NAMED_OBJECT
    assert [(a.kind, a.display) for a in fact.args] == [(ArgKind.VARIABLE, "cin")]


def test_implied_this_receiver() -> None:
    shape = record("CircleShape", method("draw"), method("resize"))
    dump = render(tu(shape, method("draw", member_call("resize", this_ref("CircleShape")), parent=shape)))
    (fact,) = extract_facts(dump, "c.cpp", CPP).facts
    assert fact.receiver_kind is ReceiverKind.THIS_IMPLIED
    assert fact.receiver_class == "CircleShape"
    assert fact.caller_class == "CircleShape"


def test_empty_stream() -> None:
    result = extract_facts("", "empty.cpp", CPP)
    assert result.facts == [] and result.defs == [] and result.warnings == []


def test_all_argument_kinds() -> None:
    dump = render(
        tu(
            function(
                "main",
                call(
                    "show",
                    var("Lname"),
                    str_lit("hello"),
                    int_lit(42),
                    subscript(var("vector"), int_lit(0)),
                    member_ref("size", var("box", "Box")),
                    call("next_id"),
                    binop("+", int_lit(2), int_lit(2)),
                    unop("++", decl_ref("k"), postfix=True),
                ),
            )
        )
    )
    result = extract_facts(dump, "args.cpp", CPP)
    show = next(f for f in result.facts if f.callee == "show")
    assert [(a.kind, a.display) for a in show.args] == [
        (ArgKind.VARIABLE, "Lname"),
        (ArgKind.STRING_LIT, '"hello"'),
        (ArgKind.NUMBER_LIT, "42"),
        (ArgKind.SUBSCRIPT, "vector[0]"),
        (ArgKind.MEMBER_VAR, "box.size"),
        (ArgKind.NESTED_CALL, "next_id()"),
        (ArgKind.BINARY_OP, "2+2"),
        (ArgKind.UNARY_OP, "k++"),
    ]
    assert show.args[4].object == "box"
    assert result.warnings == []


def test_prefix_unary_and_float() -> None:
    dump = render(tu(function("main", call("f", unop("-", decl_ref("x")), float_lit(2.5)))))
    (fact,) = extract_facts(dump, "u.cpp", CPP).facts
    assert [a.display for a in fact.args] == ["-x", "2.5"]


def test_member_variable_argument_through_this() -> None:
    shape = record("Box", method("grow"))
    dump = render(
        tu(shape, method("grow", call("scale", member_ref("width", this_ref("Box"))), parent=shape))
    )
    (fact,) = extract_facts(dump, "b.cpp", CPP).facts
    assert fact.args[0].kind is ArgKind.MEMBER_VAR
    assert fact.args[0].display == "this.width"
    assert fact.args[0].object == "this"


def test_nested_call_emits_both_facts() -> None:
    dump = render(tu(function("main", call("outer", call("inner", int_lit(1)), var("y")))))
    facts = extract_facts(dump, "n.cpp", CPP).facts
    assert [f.callee for f in facts] == ["outer", "inner"]
    assert facts[0].args[0].kind is ArgKind.NESTED_CALL
    assert facts[0].args[0].display == "inner(1)"
    assert [f.seq for f in facts] == [0, 1]
    # "y" sits under a cast after the nested call and belongs to outer
    assert {f.callee: [a.display for a in f.args] for f in facts} == {
        "outer": ["inner(1)", "y"],
        "inner": ["1"],
    }


def test_seq_is_per_definition() -> None:
    dump = render(
        tu(
            function("a", call("x"), call("y")),
            function("b", call("z")),
        )
    )
    facts = extract_facts(dump, "s.cpp", CPP).facts
    assert [(f.caller_scope, f.seq, f.callee) for f in facts] == [
        ("a", 0, "x"),
        ("a", 1, "y"),
        ("b", 0, "z"),
    ]


def test_function_pointer_call_is_unresolved() -> None:
    dump = render(tu(function("main", call("handler", int_lit(3), decl="ParmVar"))))
    result = extract_facts(dump, "fp.cpp", CPP)
    (fact,) = result.facts
    assert fact.callee == UNRESOLVED_CALLEE
    assert fact.warning and "handler" in fact.warning
    assert result.warnings == [fact.warning]
    assert [a.display for a in fact.args] == ["3"]


def test_static_method_is_free_definition() -> None:
    util = record("Util", method("helper", static=True))
    dump = render(tu(util, method("helper", call("puts", str_lit("x")), parent=util, static=True)))
    result = extract_facts(dump, "u.cpp", CPP)
    assert [(d.name, d.class_name, d.kind) for d in result.defs] == [("helper", None, DefKind.FREE)]
    assert result.facts[0].caller_class is None


def test_out_of_line_method_takes_class_from_parent_record() -> None:
    book = record("AddressBook", method("display_book"))
    dump = render(tu(book, method("display_book", call("puts", str_lit("x")), parent=book)))
    result = extract_facts(dump, "a.cpp", CPP)
    assert ("display_book", "AddressBook") in [(d.name, d.class_name) for d in result.defs]
    assert result.facts[0].caller_class == "AddressBook"


def test_unknown_receiver_warns() -> None:
    dump = render(tu(function("main", member_call("go", water("ParenListExpr")))))
    (fact,) = extract_facts(dump, "w.cpp", CPP).facts
    assert fact.callee == "go"
    assert fact.receiver_kind is ReceiverKind.NONE
    assert fact.receiver_class is None
    assert fact.warning


def test_water_between_land_lines_is_ignored() -> None:
    plain = tu(function("main", call("f", var("a"))))
    wrapped = tu(
        water("NamespaceDecl", function("main", water("ExprWithCleanups", call("f", water("ParenExpr", var("a")))))),
    )
    facts_plain = extract_facts(render(plain), "m.cpp", CPP).facts
    facts_wrapped = extract_facts(render(wrapped), "m.cpp", CPP).facts
    assert [(f.callee, [a.display for a in f.args]) for f in facts_plain] == [("f", ["a"])]
    assert [(f.callee, [a.display for a in f.args]) for f in facts_wrapped] == [("f", ["a"])]


def test_unclassifiable_argument_is_unknown() -> None:
    dump = render(tu(function("main", call("f", subscript(var("a"), water("CXXBoolLiteralExpr"))))))
    (fact,) = extract_facts(dump, "x.cpp", CPP).facts
    assert fact.args[0].display == "<unknown>"
    assert "unclassifiable" in (fact.warning or "")


def test_accepts_line_iterable() -> None:
    text = render(tu(function("main", call("f"))))
    from_text = extract_facts(text, "i.cpp", CPP)
    from_lines = extract_facts(iter(text.splitlines(True)), "i.cpp", CPP)
    assert from_text == from_lines


def test_class_from_type() -> None:
    assert class_from_type("class DrawingAPI *") == "DrawingAPI"
    assert class_from_type("const Contact &") == "Contact"
    assert class_from_type("std::vector<std::string>") == "vector"
    assert class_from_type("int") is None
    assert class_from_type("<bound member function type>") is None
    assert class_from_type("Contact *() const noexcept") is None


def test_compound_bodies_only_contribute_land() -> None:
    dump = render(tu(function("main", compound(call("f")), call("g"))))
    assert [f.callee for f in extract_facts(dump, "c.cpp", CPP).facts] == ["f", "g"]


ITERATOR_DUMP = """\
`-FunctionDecl 0x55d5c9a1a6f0 <line:8:1, line:12:1> line:8:6 show_all 'void (std::vector<Contact> &)'
  |-ParmVarDecl 0x55d5c9a1a5f8 <col:15, col:37> col:37 used book 'std::vector<Contact> &'
  `-CompoundStmt 0x55d5c9a1b310 <col:43, line:12:1>
    `-ForStmt 0x55d5c9a1b2e8 <line:9:5, line:11:5>
      |-DeclStmt 0x55d5c9a1aa88 <line:9:10, col:52>
      | `-VarDecl 0x55d5c9a1a958 <col:10, col:51> col:40 used it 'std::vector<Contact>::iterator':'__gnu_cxx::__normal_iterator<Contact *, std::vector<Contact>>' cinit
      |-<<<NULL>>>
      |-<<<NULL>>>
      |-<<<NULL>>>
      `-CompoundStmt 0x55d5c9a1b2d0 <line:10:5, line:11:5>
        `-CXXMemberCallExpr 0x55d5c9a1b2a8 <line:10:9, col:23> 'void'
          `-MemberExpr 0x55d5c9a1b278 <col:9, col:13> '<bound member function type>' ->display 0x55d5c9a0f3a8
            `-CXXOperatorCallExpr 0x55d5c9a1b240 <col:9, col:11> 'Contact *' '->'
              |-ImplicitCastExpr 0x55d5c9a1b228 <col:11> 'Contact *(*)() const noexcept' <FunctionToPointerDecay>
              | `-DeclRefExpr 0x55d5c9a1b1a8 <col:11> 'Contact *() const noexcept' lvalue CXXMethod 0x55d5c9a17f60 'operator->' 'Contact *() const noexcept'
              `-ImplicitCastExpr 0x55d5c9a1b190 <col:9> 'const __gnu_cxx::__normal_iterator<Contact *, std::vector<Contact>>' lvalue <NoOp>
                `-DeclRefExpr 0x55d5c9a1b158 <col:9> 'std::vector<Contact>::iterator':'__gnu_cxx::__normal_iterator<Contact *, std::vector<Contact>>' lvalue Var 0x55d5c9a1a958 'it' 'std::vector<Contact>::iterator':'__gnu_cxx::__normal_iterator<Contact *, std::vector<Contact>>'
"""


def test_iterator_receiver_is_pointee_class() -> None:
    (fact,) = extract_facts(ITERATOR_DUMP, "book.cpp", CPP).facts
    assert fact.callee == "display"
    assert fact.receiver_class == "Contact"
    assert fact.receiver_kind is ReceiverKind.NAMED_OBJECT
    assert fact.caller_scope == "show_all"
    assert fact.args == []
    assert fact.warning is None


SYSTEM_HEADER_DUMP = """\
TranslationUnitDecl 0x5581c0 <<invalid sloc>> <invalid sloc>
|-FunctionDecl 0x558290 </usr/include/stdio.h:356:1, col:48> col:12 used printf 'int (const char *, ...)' extern
| |-ParmVarDecl 0x5582a0 <col:20, col:44> col:44 __format 'const char *'
| `-FormatAttr 0x5582b0 <col:1> Implicit printf 1 2
|-ClassTemplateDecl 0x5583c0 </usr/include/c++/11/bits/stl_vector.h:389:3, line:1981:5> line:389:11 vector
| `-CXXRecordDecl 0x5583d0 <line:389:3, line:1981:5> line:389:11 class vector definition
|   `-CXXMethodDecl 0x5583e0 <line:1187:7, line:1198:7> line:1187:7 push_back 'void (const value_type &)'
|     `-CompoundStmt 0x5583f0 <col:7, line:1198:7>
|       `-CallExpr 0x558400 <line:1195:4, col:40> 'void'
|         `-ImplicitCastExpr 0x558410 <col:4> 'void (*)()' <FunctionToPointerDecay>
|           `-DeclRefExpr 0x558420 <col:4> 'void ()' lvalue Function 0x558430 '_M_realloc_insert' 'void ()'
|-FunctionDecl 0x558500 <main.cpp:2:1, col:17> col:6 used helper 'void ()'
`-FunctionDecl 0x558600 <line:4:1, line:9:1> line:4:5 main 'int ()'
  `-CompoundStmt 0x558610 <col:12, line:9:1>
    |-CallExpr 0x558620 <line:5:3, col:18> 'int'
    | |-ImplicitCastExpr 0x558630 <col:3> 'int (*)(const char *, ...)' <FunctionToPointerDecay>
    | | `-DeclRefExpr 0x558640 <col:3> 'int (const char *, ...)' lvalue Function 0x558290 'printf' 'int (const char *, ...)'
    | `-ImplicitCastExpr 0x558650 <col:10> 'const char *' <ArrayToPointerDecay>
    |   `-StringLiteral 0x558660 <col:10> 'const char [6]' lvalue "hello"
    |-CXXMemberCallExpr 0x558700 <line:6:3, col:20> 'void'
    | |-MemberExpr 0x558710 <col:3, col:9> '<bound member function type>' .push_back 0x5583e0
    | | `-DeclRefExpr 0x558720 <col:3> 'std::vector<int>':'std::vector<int, std::allocator<int>>' lvalue Var 0x558730 'items' 'std::vector<int>':'std::vector<int, std::allocator<int>>'
    | `-IntegerLiteral 0x558740 <col:18> 'int' 1
    `-CallExpr 0x558800 <line:7:3, col:10> 'void'
      `-ImplicitCastExpr 0x558810 <col:3> 'void (*)()' <FunctionToPointerDecay>
        `-DeclRefExpr 0x558820 <col:3> 'void ()' lvalue Function 0x558500 'helper' 'void ()'
"""


def test_system_header_declarations_are_not_definitions() -> None:
    result = extract_facts(SYSTEM_HEADER_DUMP, "main.cpp", CPP)
    assert [(d.name, d.class_name) for d in result.defs] == [("main", None)]
    assert [(f.caller_scope, f.callee, f.receiver_class) for f in result.facts] == [
        ("main", "printf", None),
        ("main", "push_back", "vector"),
        ("main", "helper", None),
    ]
    assert [a.display for a in result.facts[1].args] == ["1"]


def test_prototype_without_body_is_not_a_definition() -> None:
    dump = render(tu(function("helper"), function("main", call("helper"))))
    result = extract_facts(dump, "p.cpp", CPP)
    assert [d.name for d in result.defs] == ["main"]
    defined = render(tu(function("helper", definition=True), function("main", call("helper"))))
    assert [d.name for d in extract_facts(defined, "p.cpp", CPP).defs] == ["helper", "main"]
