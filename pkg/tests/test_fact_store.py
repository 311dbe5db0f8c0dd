import random
from pathlib import Path

import pytest

from logic.call_extractor import extract_facts
from logic.island_lexer import load_lexicon
from models.fact_models import (
    ArgKind,
    ArgValue,
    CallFact,
    DefKind,
    ExtractionResult,
    FunctionDef,
    ReceiverKind,
)
from services.fact_store import (
    CALLS_HEADER,
    FactFileError,
    decode_args,
    encode_args,
    fact_pair,
    read_facts,
    write_facts,
)
from tests.dump_builder import address_book_corpus

GET_CHOICE = CallFact(file="AddressBookMain.cpp", caller_scope="main", seq=0, callee="get_choice")


def _calls_lines(pair) -> list[str]:
    return pair.calls_path.read_text(encoding="utf-8").splitlines()


def test_call_without_receiver_or_args(tmp_path: Path) -> None:
    pair = write_facts(ExtractionResult(facts=[GET_CHOICE]), tmp_path)
    assert _calls_lines(pair) == [
        ",".join(CALLS_HEADER),
        "AddressBookMain.cpp,main,,0,get_choice,,none,0,,",
    ]
    assert read_facts(pair).facts == [GET_CHOICE]


def test_header_only_files_for_empty_result(tmp_path: Path) -> None:
    pair = write_facts(ExtractionResult(), tmp_path)
    assert pair.calls_path.read_text(encoding="utf-8") == ",".join(CALLS_HEADER) + "\n"
    assert pair.defs_path.read_text(encoding="utf-8") == "file,name,class,kind\n"
    assert read_facts(pair) == ExtractionResult()


def test_args_cell_for_two_variables(tmp_path: Path) -> None:
    fact = CallFact(
        file="Contact.cpp",
        caller_scope="display",
        caller_class="Contact",
        seq=0,
        callee="match",
        receiver_class="Contact",
        receiver_kind=ReceiverKind.THIS_IMPLIED,
        args=[
            ArgValue(kind=ArgKind.VARIABLE, display="Lname"),
            ArgValue(kind=ArgKind.VARIABLE, display="Fname"),
        ],
    )
    pair = write_facts(ExtractionResult(facts=[fact]), tmp_path)
    assert _calls_lines(pair)[1] == (
        "Contact.cpp,display,Contact,0,match,Contact,this_implied,2,Variable=Lname|Variable=Fname,"
    )


def test_escaping_of_separators() -> None:
    args = [
        ArgValue(kind=ArgKind.BINARY_OP, display="a|b"),
        ArgValue(kind=ArgKind.STRING_LIT, display='"C:\\dir"'),
        ArgValue(kind=ArgKind.BINARY_OP, display="x==y"),
    ]
    cell = encode_args(args)
    assert cell == 'BinaryOp=a\\|b|StringLit="C:\\\\dir"|BinaryOp=x==y'
    assert decode_args(cell) == args


def test_member_var_object_is_restored() -> None:
    (arg,) = decode_args("MemberVar=this.width")
    assert arg.object == "this"


def test_decode_rejects_unknown_kind() -> None:
    with pytest.raises(ValueError):
        decode_args("Lambda=x")
    with pytest.raises(ValueError):
        decode_args("nokind")


def test_bad_row_names_line_and_column(tmp_path: Path) -> None:
    pair = write_facts(ExtractionResult(facts=[GET_CHOICE, GET_CHOICE.copy(update={"seq": 1})]), tmp_path)
    lines = _calls_lines(pair)
    lines[2] = lines[2].replace(",1,", ",one,")
    pair.calls_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    with pytest.raises(FactFileError) as err:
        read_facts(pair)
    assert err.value.line == 3
    assert err.value.column == 4
    assert "line 3" in str(err.value)


def test_bad_receiver_kind_and_arg_count(tmp_path: Path) -> None:
    header = ",".join(CALLS_HEADER)
    pair = fact_pair(tmp_path)
    pair.defs_path.write_text("file,name,class,kind\n", encoding="utf-8")

    pair.calls_path.write_text(header + "\nf.cpp,main,,0,g,,someone,0,,\n", encoding="utf-8")
    with pytest.raises(FactFileError) as err:
        read_facts(pair)
    assert (err.value.line, err.value.column) == (2, 7)

    pair.calls_path.write_text(header + "\nf.cpp,main,,0,g,,none,2,Variable=a,\n", encoding="utf-8")
    with pytest.raises(FactFileError) as err:
        read_facts(pair)
    assert (err.value.line, err.value.column) == (2, 8)


def test_wrong_header_and_short_row(tmp_path: Path) -> None:
    pair = fact_pair(tmp_path)
    pair.defs_path.write_text("file,name,class,kind\n", encoding="utf-8")
    pair.calls_path.write_text("file,scope\n", encoding="utf-8")
    with pytest.raises(FactFileError, match="line 1"):
        read_facts(pair)
    pair.calls_path.write_text(",".join(CALLS_HEADER) + "\nf.cpp,main\n", encoding="utf-8")
    with pytest.raises(FactFileError, match="line 2"):
        read_facts(pair)


def test_member_def_without_class_is_rejected(tmp_path: Path) -> None:
    pair = fact_pair(tmp_path)
    pair.calls_path.write_text(",".join(CALLS_HEADER) + "\n", encoding="utf-8")
    pair.defs_path.write_text("file,name,class,kind\na.cpp,draw,,member\n", encoding="utf-8")
    with pytest.raises(FactFileError) as err:
        read_facts(pair)
    assert err.value.line == 2


def test_missing_file_raises_oserror(tmp_path: Path) -> None:
    with pytest.raises(OSError):
        read_facts(fact_pair(tmp_path / "nowhere"))


_KINDS = list(ArgKind)
_WORDS = ["a", "Lname", "x|y", "p\\q", "v,w", 'say "hi"', "k=1", "ünï", "n-1"]


def _random_arg(rng: random.Random) -> ArgValue:
    kind = rng.choice(_KINDS)
    if kind is ArgKind.MEMBER_VAR:
        owner = rng.choice(["this", "box", "a.b"])
        return ArgValue(kind=kind, display=f"{owner}.{rng.choice(_WORDS)}", object=owner)
    return ArgValue(kind=kind, display=rng.choice(_WORDS))


def _random_result(rng: random.Random) -> ExtractionResult:
    facts = []
    for seq in range(rng.randint(0, 6)):
        receiver_kind = rng.choice(list(ReceiverKind))
        facts.append(
            CallFact(
                file=rng.choice(["a.cpp", "b, c.cpp"]),
                caller_scope=rng.choice(["main", "<toplevel>", "run"]),
                caller_class=rng.choice([None, "Shape"]),
                seq=seq,
                callee=rng.choice(["draw", "<unresolved>", "push_back"]),
                receiver_class=None if receiver_kind is ReceiverKind.NONE else "Vec",
                receiver_kind=receiver_kind,
                args=[_random_arg(rng) for _ in range(rng.randint(0, 3))],
                warning=rng.choice([None, "receiver type unknown; use, quotes \"x\""]),
            )
        )
    defs = [
        FunctionDef(file="a.cpp", name=name, class_name=cls, kind=DefKind.MEMBER if cls else DefKind.FREE)
        for name, cls in rng.sample([("main", None), ("draw", "Shape"), ("run", None)], rng.randint(0, 3))
    ]
    return ExtractionResult(facts=facts, defs=defs)


def test_generated_results_survive_the_files(tmp_path: Path) -> None:
    rng = random.Random(20240601)
    for i in range(200):
        result = _random_result(rng)
        pair = write_facts(result, tmp_path / str(i))
        assert read_facts(pair) == result.canonical()


def test_output_is_deterministic(tmp_path: Path) -> None:
    lexicon = load_lexicon("cpp")
    corpus = address_book_corpus()
    for run in ("one", "two"):
        for name, dump in corpus.items():
            write_facts(extract_facts(dump, name, lexicon), tmp_path / run / name)
    for name in corpus:
        for file in ("calls.csv", "defs.csv"):
            first = (tmp_path / "one" / name / file).read_bytes()
            assert first == (tmp_path / "two" / name / file).read_bytes()
            assert b"\r\n" not in first


def test_no_temp_files_left_behind(tmp_path: Path) -> None:
    write_facts(ExtractionResult(facts=[GET_CHOICE]), tmp_path)
    assert sorted(p.name for p in tmp_path.iterdir()) == ["calls.csv", "defs.csv"]
