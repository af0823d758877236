import json
import os
import subprocess
from pathlib import Path

import pytest


def git(repo: Path, *args: str, when: int | None = None) -> None:
    env = dict(os.environ, GIT_AUTHOR_NAME="Dev", GIT_AUTHOR_EMAIL="dev@example.com",
               GIT_COMMITTER_NAME="Dev", GIT_COMMITTER_EMAIL="dev@example.com",
               GIT_CONFIG_NOSYSTEM="1", HOME=str(repo))
    if when is not None:
        env["GIT_AUTHOR_DATE"] = env["GIT_COMMITTER_DATE"] = f"@{when} +0000"
    subprocess.run(["git", "-c", "commit.gpgsign=false", "-C", str(repo), *args],
                   check=True, env=env, capture_output=True)


# 2014-01-06T00:00:00Z
JAN_6_2014 = 1388966400
DAY = 86400


@pytest.fixture
def workspace(tmp_path: Path) -> dict:
    """Repo o/r with three commits a week apart and two issues."""
    repo = tmp_path / "repos" / "o" / "r"
    repo.mkdir(parents=True)
    git(repo, "init", "--quiet", "-b", "master")
    for i, n in enumerate((100, 250, 200)):
        (repo / "main.py").write_text("".join(f"x = {k}\n" for k in range(n)))
        git(repo, "add", "-A")
        git(repo, "commit", "--quiet", "-m", f"c{i}", when=JAN_6_2014 + i * 7 * DAY)
    issues = tmp_path / "issues" / "o" / "r" / "issues.json"
    issues.parent.mkdir(parents=True)
    issues.write_text(json.dumps([
        {"id": 1, "opened_at": "2014-01-07T00:00:00Z", "closed_at": "2014-01-15T00:00:00Z"},
        {"id": 2, "opened_at": "2014-01-14T00:00:00Z"},
    ]))
    settings = {
        "store_path": tmp_path / "store",
        "workdir": tmp_path / "work",
        "clone_url_template": f"file://{tmp_path}/repos/{{owner}}/{{name}}",
        "issues_dir": tmp_path / "issues",
        "api_base": "http://127.0.0.1:9",
        "now": "2014-02-03T00:00:00Z",
        "worker_count": 1,
    }
    return {"repo": repo, "issues": issues, "settings": settings}
