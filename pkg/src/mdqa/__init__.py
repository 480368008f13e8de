"""Toolkit for conversational multi-document QA pipelines.

Metrics (word/char ROUGE-L, keywords recall), prompt assembly with loss-mask
spans, pseudo-label merging, noisy-document screening and consensus ensembling.
"""

__version__ = "0.1.0"
