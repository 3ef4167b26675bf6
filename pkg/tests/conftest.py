def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS, _line
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num, title, ok, detail in sorted(RESULTS):
        terminalreporter.write_line(_line(num, title, ok, detail))
