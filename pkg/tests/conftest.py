import pytest

from nsac import config


def make_cfg(tmp_path=None, **over):
    """Small valid config; keyword overrides replace top-level keys."""
    raw = {
        "grid": {"dim": 1, "lx": 1.0, "nx": 64},
        "eps": 0.05,
        "mobility": "C1",
        "ic": {"preset": "uniform"},
        "t_end": 0.0,
        "viscosity": {"nu": 0.1, "lambda": 0.1, "k": 0.1},
    }
    raw.update(over)
    if tmp_path is not None:
        raw["output_dir"] = str(tmp_path)
    return config.build(raw)


@pytest.fixture
def cfg_factory(tmp_path):
    return lambda **over: make_cfg(tmp_path, **over)


def pytest_terminal_summary(terminalreporter):
    import acceptance_report

    if any(acceptance_report.RESULTS.values()):
        terminalreporter.section("acceptance criteria")
        for line in acceptance_report.summary_lines():
            terminalreporter.write_line(line)
