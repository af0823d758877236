import pytest

import repopulse


def test_analyze_weekly_kloc(workspace):
    series = repopulse.analyze(workspace["repo"], workspace["issues"], "week", metric="kloc",
                               now="2014-02-03T00:00:00Z")
    assert [s["start_date"] for s in series] == [
        "2014-01-06T00:00:00Z", "2014-01-13T00:00:00Z", "2014-01-20T00:00:00Z", "2014-01-27T00:00:00Z"]
    assert [s["kloc"] for s in series] == pytest.approx([0.1, 0.25, 0.2, 0.2])
    assert "density" not in series[0]
    assert series[0]["issues"] == {"open": 1, "closed": 0, "openCumulative": 1, "closedCumulative": 0}
    # Issue 1 closes on the 15th, inside the second week.
    assert series[1]["issues"] == {"open": 1, "closed": 1, "openCumulative": 1, "closedCumulative": 1}
    assert series[2]["issues"]["closedCumulative"] == 1


def test_analyze_csv_and_bad_arguments(workspace):
    text = repopulse.analyze(workspace["repo"], workspace["issues"], "month", format="csv",
                             now="2014-02-03T00:00:00Z")
    header = text.splitlines()[0]
    assert header.startswith("start_date,end_date,kloc")
    with pytest.raises(ValueError):
        repopulse.analyze(workspace["repo"], workspace["issues"], "fortnight")
    with pytest.raises(ValueError):
        repopulse.analyze(workspace["repo"], workspace["issues"], "week", now="soon")


def test_track_work_and_serve(workspace):
    svc = repopulse.Service(**workspace["settings"])
    record, created = svc.track("o", "r", "master")
    assert created and record["state"] == "pending"
    again, created = svc.track("o", "r", "master")
    assert not created and again["project_id"] == record["project_id"]
    assert svc.series(record["project_id"], "week") is None

    assert svc.work_once() == 1
    pid = record["project_id"]
    assert svc.project(pid)["state"] == "tracked"
    assert [p["project_id"] for p in svc.projects("tracked")] == [pid]

    for group_by in ("week", "month"):
        stored = svc.series(pid, group_by, "density")
        assert stored
        r = svc.request("GET", "/metrics/api/density/o/r/master", {"groupBy": group_by})
        assert r.status == 200
        assert r.json() == stored
        local = repopulse.analyze(workspace["repo"], workspace["issues"], group_by, metric="density",
                                  now=workspace["settings"]["now"])
        assert local == stored


def test_api_errors_and_veto(workspace):
    svc = repopulse.Service(**workspace["settings"])
    r = svc.request("GET", "/metrics/api/kloc/o/r/master", {"groupBy": "week"})
    assert r.status == 404 and r.json()["error"] == "project_not_found"
    assert r.headers["Access-Control-Allow-Origin"] == "*"
    r = svc.request("POST", "/other/requests/track", body='{"owner": "a", "name": "b", "branch": "main"}')
    assert r.status == 202
    pending = svc.projects("pending")
    assert len(pending) == 1
    failed = svc.veto(pending[0]["project_id"], "spam")
    assert failed["state"] == "failed" and failed["failure_reason"] == "spam"


def test_error_types(workspace):
    svc = repopulse.Service(**workspace["settings"])
    with pytest.raises(repopulse.StoreError):
        svc.track("bad owner", "x", "main")
    with pytest.raises(repopulse.ConfigError):
        repopulse.Service(**dict(workspace["settings"], refresh_interval="0"))
    assert issubclass(repopulse.StoreError, repopulse.Error)
