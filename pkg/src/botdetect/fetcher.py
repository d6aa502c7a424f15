"""Fetch PR/issue comments from the GitHub REST API into corpus JSONL records.

Serial Link-header pagination, rate-limit aware (one reset-wait cycle),
transient failures retried with exponential backoff. The HTTP transport is
injectable so tests run fully offline.
"""

from __future__ import annotations

import json
import os
import re
import time
from dataclasses import dataclass, field
from typing import Callable, Iterator

import httpx

from botdetect.errors import (
    AuthRejected,
    IoFailure,
    NetworkFailure,
    RateLimitExhausted,
    RepoNotFound,
)

API_ROOT = "https://api.github.com"
PER_PAGE = 100
MAX_RETRIES = 3

_REPO_RE = re.compile(r"^[A-Za-z0-9_.\-]+/[A-Za-z0-9_.\-]+$")

# endpoint suffix and corpus `source` value per comment kind
ENDPOINTS = {
    "issue_comments": ("issues/comments", "issue"),
    "pr_review_comments": ("pulls/comments", "pull_request"),
}


@dataclass(frozen=True)
class FetchSpec:
    repository: str
    comment_kinds: tuple[str, ...] = ("issue_comments", "pr_review_comments")
    since: str | None = None
    max_comments: int = 1000
    auth_token: str | None = field(default=None, repr=False)

    def __post_init__(self):
        if not _REPO_RE.match(self.repository):
            raise ValueError(f"repository must be owner/name, got {self.repository!r}")
        if self.max_comments < 1:
            raise ValueError("max_comments must be >= 1")
        unknown = set(self.comment_kinds) - set(ENDPOINTS)
        if unknown:
            raise ValueError(f"unknown comment kinds: {sorted(unknown)}")


def spec_from_env(repository: str, **kwargs) -> FetchSpec:
    """Build a FetchSpec reading the auth token from GITHUB_TOKEN."""
    return FetchSpec(repository=repository, auth_token=os.environ.get("GITHUB_TOKEN"), **kwargs)


def _request(
    client: httpx.Client,
    url: str,
    params: dict | None,
    headers: dict,
    sleep: Callable[[float], None],
) -> httpx.Response:
    waited_for_reset = False
    attempts = 0
    while True:
        try:
            resp = client.get(url, params=params, headers=headers)
        except httpx.HTTPError as exc:
            attempts += 1
            if attempts > MAX_RETRIES:
                raise NetworkFailure(f"request failed after {MAX_RETRIES} retries: {exc}") from exc
            sleep(2.0 ** (attempts - 1))
            continue

        if resp.status_code >= 500:
            attempts += 1
            if attempts > MAX_RETRIES:
                raise NetworkFailure(
                    f"server error {resp.status_code} after {MAX_RETRIES} retries"
                )
            sleep(2.0 ** (attempts - 1))
            continue
        if resp.status_code == 404:
            raise RepoNotFound(f"not found: {url}")
        if resp.status_code in (401, 403, 429):
            if resp.headers.get("X-RateLimit-Remaining") == "0" or "Retry-After" in resp.headers:
                if waited_for_reset:
                    raise RateLimitExhausted("rate limit still exhausted after one reset wait")
                waited_for_reset = True
                sleep(_reset_wait(resp))
                continue
            raise AuthRejected(f"HTTP {resp.status_code} from {url}")
        if resp.status_code >= 400:
            raise NetworkFailure(f"unexpected HTTP {resp.status_code} from {url}")
        return resp


def _reset_wait(resp: httpx.Response) -> float:
    retry_after = resp.headers.get("Retry-After")
    if retry_after is not None:
        return max(0.0, float(retry_after))
    reset = resp.headers.get("X-RateLimit-Reset")
    if reset is not None:
        return max(0.0, float(reset) - time.time()) + 1.0
    return 60.0


def fetch_comments(
    spec: FetchSpec,
    transport: httpx.BaseTransport | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> Iterator[dict]:
    """Yield unlabeled comment records, capped at spec.max_comments."""
    headers = {"Accept": "application/vnd.github+json"}
    if spec.auth_token:
        headers["Authorization"] = f"Bearer {spec.auth_token}"
    emitted = 0
    with httpx.Client(base_url=API_ROOT, transport=transport, timeout=30.0) as client:
        for kind in ENDPOINTS:  # fixed endpoint order for deterministic emission
            if kind not in spec.comment_kinds:
                continue
            suffix, source = ENDPOINTS[kind]
            url = f"/repos/{spec.repository}/{suffix}"
            params: dict | None = {"per_page": PER_PAGE}
            if spec.since:
                params["since"] = spec.since
            while url is not None:
                resp = _request(client, url, params, headers, sleep)
                params = None  # subsequent page URLs already carry query params
                for item in resp.json():
                    user = item.get("user") or {}
                    record = {
                        "comment_id": str(item["id"]),
                        "account_id": str(user.get("login") or ""),
                        "text": item.get("body") or "",
                        "source": source,
                    }
                    if item.get("created_at"):
                        record["created_at"] = item["created_at"]
                    if not record["comment_id"] or not record["account_id"]:
                        continue
                    yield record
                    emitted += 1
                    if emitted >= spec.max_comments:
                        return
                url = resp.links.get("next", {}).get("url")


def write_unlabeled_jsonl(records, path) -> None:
    """One record per line in the corpus JSONL schema, label omitted."""
    try:
        with open(path, "w", encoding="utf-8") as fh:
            for rec in records:
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc
