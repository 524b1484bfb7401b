"""Toxicity analytics for streaming-chat logs.

Chat dumps are ingested into a normalized corpus, cheap rules divert trivially
non-toxic and bot messages, the rest go through a two-stage zero-shot LLM
classifier, and the resulting labels feed the statistical analysis.
"""

__version__ = "0.1.0"
