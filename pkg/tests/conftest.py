from datetime import datetime, timezone

import pytest

from multidimer.model import AnswerCodeGroup, BugReport, Vocabulary


def make_report(bug_id="B1", **overrides) -> BugReport:
    fields = dict(
        bug_id=bug_id,
        product_id="P1",
        release="R1",
        title=f"title of {bug_id}",
        observation_text="it broke",
        answer_text="",
        created_at=datetime(2025, 3, 1, 12, 0, 0, tzinfo=timezone.utc),
        status="Open",
        detection_phase="function-test",
        severity="B",
    )
    fields.update(overrides)
    return BugReport(**fields)


@pytest.fixture
def vocabulary() -> Vocabulary:
    return Vocabulary(
        answer_code_groups={
            "AC1": AnswerCodeGroup.ALREADY_CORRECTED,
            "AC2": AnswerCodeGroup.ALREADY_CORRECTED,
            "WC1": AnswerCodeGroup.WILL_BE_CORRECTED,
            "NA1": AnswerCodeGroup.NO_ACTION,
        },
        severities=("A", "B", "C"),
        detection_phases=("function-test", "system-test", "integration-test", "customer"),
        internal_phases=frozenset({"function-test", "system-test", "integration-test"}),
        statuses=("Open", "Answered", "Closed"),
    )


class ManualClock:
    """Injectable clock advanced explicitly by tests."""

    def __init__(self, start: datetime):
        self.now = start

    def __call__(self) -> datetime:
        return self.now

    def advance(self, delta) -> None:
        self.now = self.now + delta


@pytest.fixture
def manual_clock() -> ManualClock:
    return ManualClock(datetime(2025, 6, 1, 0, 0, 0, tzinfo=timezone.utc))
