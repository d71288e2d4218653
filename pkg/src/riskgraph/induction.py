"""Schema induction from documents through a chat-completion service.

The default client is an offline replay/stub so the whole pipeline is
reproducible; the HTTP client speaks a minimal
{model, messages} -> {content} contract and is opt-in via configuration.
"""

from __future__ import annotations

import logging
import os
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol, Sequence

from .hierarchy import parse_hierarchy_text
from .ingest import Document
from .schema import SchemaLibrary

log = logging.getLogger(__name__)

_URL_RE_PATTERN = r"https?://\S+|www\.[^\s]+\.[^\s]+"
_DEFAULT_CLEAN_PATTERNS = (
    _URL_RE_PATTERN,
    r"(?im)^\s*(advertisement|sponsored content|subscribe now.*|click here.*)\s*$",
)


class TransportError(RuntimeError):
    pass


class AuthError(RuntimeError):
    pass


class UnparseableResponse(RuntimeError):
    def __init__(self, message: str, raw: str):
        super().__init__(message)
        self.raw = raw


class EmptyInput(ValueError):
    pass


def clean_text(raw: str, extra_patterns: Sequence[str] = ()) -> str:
    """Strip URLs, boilerplate marker lines, and repeated whitespace; idempotent."""
    import re

    text = raw
    for pattern in (*_DEFAULT_CLEAN_PATTERNS, *extra_patterns):
        text = re.sub(pattern, " ", text)
    lines = [" ".join(line.split()) for line in text.splitlines()]
    lines = [line for line in lines if line]
    return "\n".join(lines)


_FORMAT_BLOCK = """Event N
event: [Event Name]
event_id: evN
description: [Detailed Description]
participants: [Subevent 1] evN.1_P[Importance], [Subevent 2] evN.2_P[Importance], ...
Gate: [Gate]
Relations: [Event Relations]

Subevent N.1
subevent: [Subevent Name]
event_id: evN.1
description: [Detailed Description]
participants: [Subsubevent 1] evN.1.1_P[Importance], ...
Gate: [Gate]
Relations: [Event Relations]

Subsubevent N.1.1
subsubevent: [Subsubevent Name]
event_id: evN.1.1
description: [Detailed Description]
participants: [Subsubsubevent 1] evN.1.1.1_P[Importance], ...
Gate: [Gate]
Relations: [Event Relations]"""

_EXAMPLE_BLOCK = (Path(__file__).parent / "fixtures" / "lithium_recycling.txt").read_text(encoding="utf-8")

DEFAULT_TEMPLATE_TEXT = f"""Read the source paragraphs below and build a hierarchical event structure
for the supply chain scenario they describe.

### Source paragraphs ###
{{paragraphs}}

Each event block carries these fields:
- event: what happened (short noun phrase).
- event_id: a dotted identifier (ev1, ev1.1, ev1.1.1, ...).
- description: two or three sentences of detail.
- participants: the sub-events of this event, each written as
  "<sub-event name> <sub-event id>_P<importance>" with importance between 0 and 1
  (higher means more important).
- Gate: 'and' when every sub-event is required, 'or' when a subset suffices,
  'xor' when the sub-events are mutually exclusive.
- Relations: ordering pairs like ev1.1>ev1.2, meaning ev1.2 happens after ev1.1.
- Write 'xxxx' for any field that has no value.

Strictly use the exact following format for each event:
```
{_FORMAT_BLOCK}
```

Worked example of the expected output for a recycling-methods paragraph:
```
{_EXAMPLE_BLOCK}```

Work through the paragraphs step by step: pick out each concrete happening,
decide which larger event it belongs under, then assign ids, importances,
gates, and orderings before writing the blocks.
"""


@dataclass(frozen=True)
class PromptTemplate:
    text: str = DEFAULT_TEMPLATE_TEXT
    slot: str = "{paragraphs}"


DEFAULT_TEMPLATE = PromptTemplate()


def render_prompt(tmpl: PromptTemplate, paragraphs: Sequence[str]) -> str:
    if not paragraphs:
        raise EmptyInput("no paragraphs to render into the prompt")
    joined = "\n\n".join(paragraphs)
    if tmpl.slot not in tmpl.text:
        raise ValueError(f"template has no {tmpl.slot!r} slot")
    return tmpl.text.replace(tmpl.slot, joined)


class ChatClient(Protocol):
    def complete(self, messages: list[dict], *, key: str | None = None) -> str: ...


@dataclass
class StubChatClient:
    """Returns a fixed response; the offline default for tests and demos."""

    response: str

    def complete(self, messages: list[dict], *, key: str | None = None) -> str:
        return self.response


@dataclass
class ReplayChatClient:
    """Replays canned responses from ``<directory>/<key>.txt``."""

    directory: Path

    def complete(self, messages: list[dict], *, key: str | None = None) -> str:
        if key is None:
            raise TransportError("replay client needs a document key")
        path = Path(self.directory) / f"{key}.txt"
        if not path.exists():
            raise TransportError(f"no canned response at {path}")
        return path.read_text(encoding="utf-8")


@dataclass
class HttpChatClient:
    """Minimal chat API client: POST {model, messages} -> {content}."""

    endpoint: str
    model: str
    timeout: float = 60.0
    retries: int = 2
    api_key_env: str = "CHAT_API_KEY"

    def complete(self, messages: list[dict], *, key: str | None = None) -> str:
        import requests

        api_key = os.environ.get(self.api_key_env)
        if not api_key:
            raise AuthError(f"no credential in ${self.api_key_env}")
        last_error: Exception | None = None
        for attempt in range(self.retries + 1):
            try:
                response = requests.post(
                    self.endpoint,
                    json={"model": self.model, "messages": messages},
                    headers={"Authorization": f"Bearer {api_key}"},
                    timeout=self.timeout,
                )
                if response.status_code in (401, 403):
                    raise AuthError(f"endpoint rejected credential: {response.status_code}")
                response.raise_for_status()
                payload = response.json()
                content = payload.get("content")
                if not isinstance(content, str):
                    raise TransportError("response has no text content")
                return content
            except AuthError:
                raise
            except Exception as exc:
                last_error = exc
                if attempt < self.retries:
                    time.sleep(min(2.0 ** attempt, 5.0))
        raise TransportError(f"chat endpoint {self.endpoint} failed: {last_error}")


@dataclass(frozen=True)
class InducedSchema:
    library: SchemaLibrary
    raw_response: str
    warnings: tuple[str, ...]


def induce_schema(
    doc: Document,
    client: ChatClient,
    tmpl: PromptTemplate = DEFAULT_TEMPLATE,
    audit_dir: Path | str | None = None,
) -> InducedSchema:
    """Prompt the client with the document and parse the block-format reply.

    On a parse failure the raw response is persisted (when audit_dir is set)
    and attached to the raised UnparseableResponse.
    """
    prompt = render_prompt(tmpl, list(doc.paragraphs))
    raw = client.complete([{"role": "user", "content": prompt}], key=doc.id)
    warnings: list[str] = []
    try:
        library = parse_hierarchy_text(raw, warnings=warnings)
    except ValueError as exc:
        if audit_dir is not None:
            path = Path(audit_dir) / f"{doc.id}.raw.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(raw, encoding="utf-8")
            log.warning("unparseable response for %s persisted at %s", doc.id, path)
        raise UnparseableResponse(f"response for {doc.id} did not parse: {exc}", raw=raw) from exc
    if not library.events:
        if audit_dir is not None:
            path = Path(audit_dir) / f"{doc.id}.raw.txt"
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(raw, encoding="utf-8")
        raise UnparseableResponse(f"response for {doc.id} contained no event blocks", raw=raw)
    return InducedSchema(library=library, raw_response=raw, warnings=tuple(warnings))
