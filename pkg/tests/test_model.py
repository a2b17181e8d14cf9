import pytest
from hypothesis import given
from hypothesis import strategies as st

from multidimer.mapping import Attribution
from multidimer.model import (
    UNKNOWN,
    AnswerCodeGroup,
    Dimension,
    ModelError,
    classify_answer_code,
    dimension_values,
    format_utc,
    parse_utc,
    report_from_record,
)

from conftest import make_report


def test_classify_direct_hit():
    table = {"AC-FIXED": AnswerCodeGroup.WILL_BE_CORRECTED}
    assert classify_answer_code("AC-FIXED", table) is AnswerCodeGroup.WILL_BE_CORRECTED


def test_classify_absent_is_unknown():
    assert classify_answer_code(None, {"X": AnswerCodeGroup.NO_ACTION}) is AnswerCodeGroup.UNKNOWN


def test_classify_unconfigured_is_unknown():
    table = {"AC1": AnswerCodeGroup.ALREADY_CORRECTED}
    assert classify_answer_code("ZZ-9", table) is AnswerCodeGroup.UNKNOWN


def test_group_preimages_disjoint(vocabulary):
    table = vocabulary.answer_code_groups
    by_group = {}
    for code in table:
        by_group.setdefault(classify_answer_code(code, table), set()).add(code)
    groups = list(by_group.values())
    for i, left in enumerate(groups):
        for right in groups[i + 1:]:
            assert not left & right


def test_dimension_values_country():
    assert dimension_values(make_report(country="SE"), Dimension.COUNTRY) == {"SE"}


def test_dimension_values_absent_customer():
    assert dimension_values(make_report(customer=None), Dimension.CUSTOMER) == {UNKNOWN}


def test_dimension_values_components():
    attribution = Attribution(
        bug_id="B1",
        components=frozenset({"UI", "Core"}),
        files=frozenset({("mono", "src/ui/a.c"), ("mono", "src/core/b.c")}),
    )
    assert dimension_values(make_report(), Dimension.COMPONENT, attribution) == {"UI", "Core"}
    assert dimension_values(make_report(), Dimension.SOURCE_FILE, attribution) == {
        "mono/src/ui/a.c",
        "mono/src/core/b.c",
    }


def test_dimension_values_documents_one_per_ref():
    report = make_report(document_refs=("DOC-1", "DOC-2"))
    assert dimension_values(report, Dimension.DOCUMENT) == {"DOC-1", "DOC-2"}
    assert dimension_values(make_report(), Dimension.DOCUMENT) == {UNKNOWN}


@given(
    country=st.none() | st.text(min_size=1, max_size=3),
    customer=st.none() | st.text(min_size=1, max_size=5),
    docs=st.lists(st.text(min_size=1, max_size=4), max_size=3),
)
def test_dimension_values_total_and_deterministic(country, customer, docs):
    report = make_report(country=country, customer=customer, document_refs=tuple(docs))
    for dim in Dimension:
        first = dimension_values(report, dim)
        assert first, f"{dim} returned an empty set"
        assert first == dimension_values(report, dim)


def test_exactly_ten_dimensions():
    assert len(Dimension) == 10


def test_parse_utc_accepts_z_and_offset():
    assert parse_utc("2025-03-01T12:00:00Z") == parse_utc("2025-03-01T13:00:00+01:00")


def test_parse_utc_rejects_naive():
    with pytest.raises(ModelError):
        parse_utc("2025-03-01T12:00:00")


def test_format_round_trip():
    for text in ("2025-03-01T12:00:00Z", "2025-03-01T12:00:00.250000Z"):
        assert format_utc(parse_utc(text)) == text


def test_record_round_trip():
    report = make_report(
        answer_code="AC1",
        country="SE",
        document_refs=("DOC-1",),
        tracker_url="https://t.example/B1",
    )
    assert report_from_record(report.to_record()) == report


def test_record_rejects_unknown_fields():
    record = make_report().to_record()
    record["surprise"] = 1
    with pytest.raises(ModelError):
        report_from_record(record)


def test_record_requires_bug_id():
    record = make_report().to_record()
    record["bug_id"] = ""
    with pytest.raises(ModelError):
        report_from_record(record)


def test_vocabulary_validation():
    from multidimer.model import Vocabulary

    with pytest.raises(ModelError):
        Vocabulary(severities=("A", "A"))
    with pytest.raises(ModelError):
        Vocabulary(detection_phases=("x",), internal_phases=frozenset({"y"}))
    with pytest.raises(ModelError):
        Vocabulary(answer_code_groups={"C1": AnswerCodeGroup.UNKNOWN})


def test_vocabulary_json_round_trip(vocabulary):
    from multidimer.model import vocabulary_from_json

    assert vocabulary_from_json(vocabulary.to_json()) == vocabulary
