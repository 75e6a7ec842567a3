"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Criterion 9 (the end-to-end timing bound) is checked over the summed
runtime of criteria 1-8, which is what the CLI `verify` command runs.
"""

import time


from qharm.verify import (
    CheckResult,
    criterion_bogolyubov,
    criterion_character_fourier,
    criterion_equivalence,
    criterion_inequalities,
    criterion_junta_level,
    criterion_mixing,
    criterion_operator_identities,
    criterion_spectral,
)

_ELAPSED: dict[str, float] = {}


def _report(tag: str, res: CheckResult):
    _ELAPSED[tag] = res.elapsed
    print(f"[{'PASS' if res.passed else 'FAIL'}] criterion {tag}: {res.name} "
          f"({res.elapsed:.1f}s) - {res.details}")
    assert res.passed, f"criterion {tag} failed: {res.details}"


def test_criterion_1_character_fourier_suite():
    _report("1", criterion_character_fourier())


def test_criterion_2_operator_identity_suite():
    _report("2", criterion_operator_identities())


def test_criterion_3_influence_globalness_equivalences():
    _report("3", criterion_equivalence())


def test_criterion_4_inequality_falsification():
    _report("4", criterion_inequalities())


def test_criterion_5_junta_level_bridge():
    _report("5", criterion_junta_level())


def test_criterion_6_spectral_suite():
    _report("6", criterion_spectral())


def test_criterion_7_mixing_decomposition():
    _report("7", criterion_mixing())


def test_criterion_8_bogolyubov_pipeline():
    _report("8", criterion_bogolyubov())


def test_criterion_9_end_to_end_budget():
    missing = {str(i) for i in range(1, 9)} - set(_ELAPSED)
    assert not missing, f"criteria {missing} did not run before the timing check"
    total = sum(_ELAPSED.values())
    print(f"[{'PASS' if total < 600 else 'FAIL'}] criterion 9: "
          f"full verify in {total:.1f}s (< 600s required)")
    assert total < 600
