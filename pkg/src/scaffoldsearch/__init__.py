"""Search over per-line code candidates under grammar and symbol-table constraints."""
from .ingest import CodePiece, FormatError, Problem, Program, PseudoLine, load, score_program
from .scaffold import SYMTABLE, SYNTACTIC, Verifier, check_program, check_source
from .search import BACKOFF, NONE, SearchBudget, SearchResult, best_first, hierarchical_search, run

__version__ = "0.1.0"

__all__ = [
    "BACKOFF",
    "CodePiece",
    "FormatError",
    "NONE",
    "Problem",
    "Program",
    "PseudoLine",
    "SYMTABLE",
    "SYNTACTIC",
    "SearchBudget",
    "SearchResult",
    "Verifier",
    "best_first",
    "check_program",
    "check_source",
    "hierarchical_search",
    "load",
    "run",
    "score_program",
]
