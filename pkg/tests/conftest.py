import sys

from hypothesis import settings

settings.register_profile("repro", max_examples=100, derandomize=True, deadline=None, database=None)
settings.load_profile("repro")


def pytest_terminal_summary(terminalreporter):
    module = next((m for name, m in list(sys.modules.items()) if name.split(".")[-1] == "test_acceptance"), None)
    if module is None or not getattr(module, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.RESULTS):
        ok, detail = module.RESULTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'} - {detail}")
