"""paramdoc: parameter-level API documentation toolkit.

Combines three content sources for blank documentation fields:
cross-document recommendation over an indexed corpus, a character-level
GRU encoder-decoder that translates api/parameter names into
descriptions, and value patterns mined from request logs. A small HTTP
service merges the sources and tracks recommendation acceptance.
"""

__version__ = "0.1.0"
