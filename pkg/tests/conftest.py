import pytest

from glauber_matching import graph


def suite_graphs():
    return {
        "K2": graph.complete(2),
        "P3": graph.path(3),
        "P4": graph.path(4),
        "P5": graph.path(5),
        "C3": graph.cycle(3),
        "C4": graph.cycle(4),
        "star5": graph.star(5),
        "star9": graph.star(9),
        "K4": graph.complete(4),
        "gnp8": graph.gnp(8, 0.5, 7),
    }


SUITE = suite_graphs()


@pytest.fixture(params=sorted(SUITE), ids=sorted(SUITE))
def suite_graph(request):
    return request.param, SUITE[request.param]


ACCEPTANCE_LINES: list[str] = []


def record_criterion(number, ok, detail):
    ACCEPTANCE_LINES.append(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
