from .backends import HttpBackend, MockBackend, RecordingBackend, ReplayBackend, send_with_retry
from .labels import Status, ToxicityLabel
from .pipeline import ClassificationSummary, ClassifyConfig, classify_corpus, record_prelabels, summarize
from .prompts import (
    Context,
    PromptPayload,
    Stage,
    build_context,
    parse_binary_response,
    parse_subclass_response,
    render_prompt,
)
from .store import LabelStore

__all__ = [
    "ClassificationSummary", "ClassifyConfig", "Context", "HttpBackend", "LabelStore",
    "MockBackend", "PromptPayload", "RecordingBackend", "ReplayBackend", "Stage", "Status",
    "ToxicityLabel", "build_context", "classify_corpus", "parse_binary_response",
    "parse_subclass_response", "record_prelabels", "render_prompt", "send_with_retry", "summarize",
]
