import os

# Keep BLAS single-threaded for the whole session: the workload is many
# small matmuls interleaved with elementwise ops, and multithreaded BLAS
# spin-waits starve the main thread on small machines.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

try:
    import threadpoolctl

    threadpoolctl.threadpool_limits(1)
except ImportError:
    pass


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed"):
        for report in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in report.nodeid and "criterion" in report.nodeid:
                name = report.nodeid.split("::")[-1].replace("test_criterion_", "")
                lines.append((name, "PASS" if outcome == "passed" else "FAIL"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for name, verdict in sorted(lines):
            terminalreporter.write_line(f"{name}: {verdict}")
