import os
import shutil
import subprocess
import sys
from pathlib import Path

import pytest

TESTS = Path(__file__).parent
FIXTURES = TESTS / "fixtures"
SHOPSYS = FIXTURES / "shopsys"
FOOD_SERVICE = FIXTURES / "foodservice" / "FoodServiceImpl.java"

sys.path.insert(0, str(TESTS))

GIT_ENV = dict(os.environ, GIT_AUTHOR_NAME="t", GIT_AUTHOR_EMAIL="t@example.com",
               GIT_COMMITTER_NAME="t", GIT_COMMITTER_EMAIL="t@example.com",
               GIT_CONFIG_GLOBAL=os.devnull, GIT_CONFIG_NOSYSTEM="1")


def git(cwd, *args, when=None):
    env = dict(GIT_ENV)
    if when:
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = when
    return subprocess.run(["git", *args], cwd=cwd, env=env, check=True,
                          capture_output=True, text=True).stdout


def make_repo(path: Path, tags=True) -> Path:
    """A two-release copy of the shopsys fixture.

    v1.0 (lightweight) lacks payment-service; v2.0 (annotated) is the full system.
    """
    path.mkdir(parents=True)
    git(path, "init", "-q", "-b", "main")
    shutil.copytree(SHOPSYS, path, dirs_exist_ok=True)
    pay = path / "payment-service"
    held = path.parent / (path.name + "-payment")
    shutil.move(pay, held)
    pom = path / "pom.xml"
    full_pom = pom.read_text()
    pom.write_text(full_pom.replace("<module>payment-service</module>", ""))
    git(path, "add", "-A")
    git(path, "commit", "-q", "-m", "first", when="2020-01-01T00:00:00Z")
    if tags:
        git(path, "tag", "v1.0")
    shutil.move(held, pay)
    pom.write_text(full_pom)
    git(path, "add", "-A")
    git(path, "commit", "-q", "-m", "second", when="2021-01-01T00:00:00Z")
    if tags:
        git(path, "tag", "-a", "v2.0", "-m", "release 2")
    return path


@pytest.fixture
def shop_repo(tmp_path):
    return make_repo(tmp_path / "origin")


@pytest.fixture
def tagless_repo(tmp_path):
    return make_repo(tmp_path / "plain", tags=False)


# -- acceptance reporting --------------------------------------------------------------

_criteria: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    number, title = marker
    entry = _criteria.setdefault(number, {"title": title, "outcomes": []})
    if report.when == "call" or report.outcome != "passed":
        entry["outcomes"].append(report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    marker = item.get_closest_marker("criterion")
    if marker is not None:
        outcome.get_result().criterion = tuple(marker.args)


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        entry = _criteria[number]
        outcomes = entry["outcomes"]
        if "failed" in outcomes:
            verdict = "FAIL"
        elif outcomes and all(o == "skipped" for o in outcomes):
            verdict = "SKIP"
        else:
            verdict = "PASS"
        terminalreporter.write_line(f"criterion {number}: {verdict}  {entry['title']}")
