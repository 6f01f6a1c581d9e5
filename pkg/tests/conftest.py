"""Shared pytest hooks: acceptance criteria get one summary line each."""

ACCEPTANCE_LABELS = {
    "test_criterion_1_stable_mm1_closed_form":
        "criterion 1 (stable M/M/1 vs closed-form equilibrium, 5 seeds)",
    "test_criterion_2_unstable_mm1_truncated":
        "criterion 2 (unstable M/M/1 with cycle caps, 5 seeds)",
    "test_criterion_3_two_queue_game":
        "criterion 3 (two-queue game solve + certification)",
    "test_criterion_4_observable_threshold":
        "criterion 4 (observable M/M/1 threshold equilibrium)",
    "test_criterion_4_observable_uniform_service":
        "criterion 4b (observable queue, uniform service variant)",
    "test_criterion_5_estimator_unbiasedness":
        "criterion 5 (cycle-sum estimator unbiasedness)",
    "test_criterion_6_control_variate_reduction":
        "criterion 6 (control-variate variance reduction)",
    "test_criterion_7_property_suites":
        "criterion 7 (projection/decomposition/determinism properties)",
    "test_criterion_8_per_signal_unbiasedness":
        "criterion 8 (per-signal estimator vs birth-death oracle)",
    "test_gamma0_sweep_certifies":
        "extra (step-size sweep of the two-queue game certifies)",
}

_outcomes = {}


def pytest_runtest_logreport(report):
    base = report.nodeid.split("::")[-1].split("[")[0]
    if base not in ACCEPTANCE_LABELS:
        return
    if report.when == "call":
        prev = _outcomes.get(base, "PASS")
        if report.failed:
            _outcomes[base] = "FAIL"
        elif report.skipped:
            _outcomes[base] = "SKIP" if prev == "PASS" else prev
        else:
            _outcomes[base] = prev
    elif report.when == "setup" and (report.failed or report.skipped):
        _outcomes[base] = "FAIL" if report.failed else "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for base, label in ACCEPTANCE_LABELS.items():
        if base in _outcomes:
            terminalreporter.write_line(
                "%s: %s" % (label, _outcomes[base]))
