"""
Session fixtures for evaluation tests: one engine shared by every case, reported at the end.
"""

from pathlib import Path

import pytest

from .evaluation_engine import EvaluationEngine

REPORT_PATH = Path(__file__).parent.parent / "reports" / "evaluation_summary.json"


@pytest.fixture(scope="session")
def evaluation_engine():
    engine = EvaluationEngine()
    yield engine
    if not engine.results:
        return
    summary = engine.summary()
    print(f"\nEvaluation summary: {summary.passed_cases}/{summary.total_cases} passed ({summary.pass_rate:.1%})")
    for result in engine.results:
        status = "PASS" if result.passed else "FAIL"
        print(f"   {status} {result.case_id}: {result.value} {result.comparison} {result.threshold}")
    print(f"   report: {engine.write_report(REPORT_PATH)}")
