"""Retrieval-augmented verification of health claims.

The pipeline ingests reference documents, recalls candidate passages
through hybrid keyword/vector search, re-ranks them against the
embedding of a hypothetical answer, and asks a model for a verdict with
inline citations. An evaluation harness measures label quality and
model-graded answer quality over datasets.
"""

__version__ = "0.1.0"

from .answer import Label, PromptKind, Reference, Verdict
from .corpus import Chunk, CorpusStore, Document, chunk_document, make_document
from .errors import ClaimcheckError, GatewayError, ValidationError
from .gateway import HttpGateway, MockGateway, RoleConfig
from .keyword import Bm25Params, KeywordIndex, extract_keywords
from .retrieval import RetrievalConfig, Retriever
from .service import Detector, DetectResult, Runtime
from .vectors import VectorIndex, cosine

__all__ = [
    "__version__",
    "Bm25Params",
    "Chunk",
    "ClaimcheckError",
    "CorpusStore",
    "DetectResult",
    "Detector",
    "Document",
    "GatewayError",
    "HttpGateway",
    "KeywordIndex",
    "Label",
    "MockGateway",
    "PromptKind",
    "Reference",
    "RetrievalConfig",
    "Retriever",
    "RoleConfig",
    "Runtime",
    "ValidationError",
    "VectorIndex",
    "Verdict",
    "chunk_document",
    "cosine",
    "extract_keywords",
    "make_document",
]
