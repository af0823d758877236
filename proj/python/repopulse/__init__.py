"""Repository health metrics: size, issue density and spoilage over time.

Thin wrappers over the native core. Series and project records come back as
decoded JSON using the HTTP API's field names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from os import PathLike
from typing import Any, Mapping, Optional, Union

from ._core import ConfigError, Error, IngestError, Instance, MetricsError, StoreError
from ._core import analyze as _analyze

__all__ = [
    "ConfigError",
    "Error",
    "IngestError",
    "MetricsError",
    "Response",
    "Service",
    "StoreError",
    "analyze",
]

Pathish = Union[str, PathLike]


def analyze(
    repo: Pathish,
    issues: Pathish,
    group_by: str,
    metric: str = "all",
    format: str = "json",
    now: Optional[str] = None,
) -> Any:
    """Analyze a local clone. JSON output is decoded; CSV comes back as text."""
    text = _analyze(str(repo), str(issues), group_by, metric, format, now)
    return json.loads(text) if format == "json" else text


@dataclass
class Response:
    status: int
    headers: dict
    body: str

    def json(self) -> Any:
        return json.loads(self.body)


class Service:
    """A store plus the worker and API logic configured over it.

    Settings use config file keys (store_path, workdir, now, ...) and win over
    REPOPULSE_* environment variables.
    """

    def __init__(self, config: Optional[Pathish] = None, **settings: Any) -> None:
        self._core = Instance(None if config is None else str(config), {k: str(v) for k, v in settings.items()})

    @property
    def store_path(self) -> str:
        return self._core.store_path

    def track(self, owner: str, name: str, branch: str) -> tuple[dict, bool]:
        """Submit a tracking request. Returns the record and whether it is new."""
        text, created = self._core.track(owner, name, branch)
        return json.loads(text), created

    def projects(self, state: Optional[str] = None) -> list[dict]:
        return [json.loads(p) for p in self._core.projects(state)]

    def project(self, project_id: str) -> Optional[dict]:
        text = self._core.project(project_id)
        return None if text is None else json.loads(text)

    def series(self, project_id: str, group_by: str, metric: str = "all") -> Optional[list]:
        text = self._core.series(project_id, group_by, metric)
        return None if text is None else json.loads(text)

    def veto(self, project_id: str, reason: str = "rejected by operator") -> dict:
        return json.loads(self._core.veto(project_id, reason))

    def work_once(self) -> int:
        """Run queued analyses to completion; returns job attempts made."""
        return self._core.work_once()

    def request(
        self,
        method: str,
        path: str,
        query: Optional[Mapping[str, str]] = None,
        body: str = "",
        client: str = "python",
    ) -> Response:
        status, headers, text = self._core.handle(method, path, dict(query or {}), body, client)
        return Response(status, headers, text)
