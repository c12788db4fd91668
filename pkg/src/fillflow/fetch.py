"""Checkpointed, paginated fetch of raw fill records from a log endpoint.

Optional plumbing: all analytics run from files, this module only fills
them. The endpoint speaks a minimal JSON-RPC-style protocol: POST a body
``{"method": "getFillEvents", "params": {"fromBlock": a, "toBlock": b}}``
(inclusive bounds) and receive ``{"result": [<record>, ...]}`` where each
record is a fill object in the canonical wire schema.

The requested block range [from_block, to_block) is walked in ``page_size``
pages. After every completed page the checkpoint file is rewritten with the
last fully ingested block, so an interrupted run resumes from the next
block. Transient transport failures are retried with bounded exponential
backoff before the run fails (checkpoint intact).
"""

from __future__ import annotations

import json
import time
from pathlib import Path
from typing import Callable, Sequence

from .errors import DecodeError, FetchError

Transport = Callable[[str, int, int], Sequence[dict]]

DEFAULT_PAGE_SIZE = 1000
DEFAULT_MAX_RETRIES = 4
DEFAULT_BACKOFF = 0.5


def http_transport(endpoint: str, from_block: int, to_block: int) -> list[dict]:
    """Default transport over HTTP POST (requests)."""
    import requests

    response = requests.post(
        endpoint,
        json={"method": "getFillEvents",
              "params": {"fromBlock": from_block, "toBlock": to_block}},
        timeout=30,
    )
    response.raise_for_status()
    body = response.json()
    result = body.get("result")
    if not isinstance(result, list):
        raise DecodeError(f"endpoint returned no 'result' list: {body!r}")
    return result


def read_checkpoint(path) -> int | None:
    """Last fully ingested block, or None when no checkpoint exists."""
    path = Path(path)
    if not path.exists():
        return None
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    return int(doc["lastBlock"])


def write_checkpoint(path, last_block: int) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump({"lastBlock": last_block}, fh)
        fh.write("\n")


def fetch_event_logs(
    endpoint: str,
    from_block: int,
    to_block: int,
    page_size: int = DEFAULT_PAGE_SIZE,
    checkpoint_path=None,
    transport: Transport | None = None,
    max_retries: int = DEFAULT_MAX_RETRIES,
    backoff: float = DEFAULT_BACKOFF,
    sleep: Callable[[float], None] = time.sleep,
) -> list[dict]:
    """Fetch all raw records with blocks in [from_block, to_block).

    Resumes after the checkpointed block when a checkpoint file is present.
    Raises FetchError carrying the last completed block once retries are
    exhausted; DecodeError on malformed responses.
    """
    if page_size <= 0:
        raise ValueError("page size must be positive")
    transport = transport or http_transport

    last_done: int | None = None
    start = from_block
    if checkpoint_path is not None:
        last_done = read_checkpoint(checkpoint_path)
        if last_done is not None:
            start = max(start, last_done + 1)

    records: list[dict] = []
    page_start = start
    while page_start < to_block:
        page_end = min(page_start + page_size - 1, to_block - 1)
        attempt = 0
        while True:
            try:
                page = transport(endpoint, page_start, page_end)
                break
            except DecodeError:
                raise
            except Exception as exc:
                attempt += 1
                if attempt > max_retries:
                    raise FetchError(
                        f"page [{page_start}, {page_end}] failed after "
                        f"{max_retries} retries: {exc}",
                        last_block=last_done,
                    ) from exc
                sleep(backoff * 2 ** (attempt - 1))
        if not isinstance(page, (list, tuple)):
            raise DecodeError(f"transport returned {type(page).__name__}, expected a list")
        records.extend(page)
        last_done = page_end
        if checkpoint_path is not None:
            write_checkpoint(checkpoint_path, last_done)
        page_start = page_end + 1
    return records
