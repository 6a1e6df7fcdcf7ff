"""Android malware knowledge graph toolkit."""

from .errors import (
    AndMalKgError,
    ApiError,
    InvalidReportError,
    MalformedTermError,
    NetworkError,
    NTriplesParseError,
    QueryParseError,
    ReportParseError,
    SchemaViolationError,
    UnknownClassError,
    UnknownPrefixError,
)
from .ingest import (
    CertInfo,
    FetchSelector,
    FixtureSource,
    IngestSummary,
    LiveSource,
    MalwareReport,
    VendorVerdict,
    YaraRuleInfo,
    fetch_reports,
    ingest_corpus,
    mint_iris,
    parse_report,
    report_from_record,
    report_to_triples,
    slug,
)
from .ns import ANDMAL, MALONT, PREFIXES, RDF_TYPE, andmal, malont
from .query import (
    CountAgg,
    Having,
    QueryAST,
    ResultTable,
    TriplePattern,
    Var,
    evaluate,
    format_results,
    parse_query,
    run_query,
)
from .rdf import (
    BlankNode,
    Graph,
    IRI,
    Literal,
    Triple,
    parse_ntriples,
    serialize_ntriples,
    serialize_turtle,
    term_to_ntriples,
)
from .schema import (
    ClassDef,
    PropertyDef,
    SchemaRegistry,
    Violation,
    build_schema,
    validate_hash_format,
    validate_individual,
)

__version__ = "0.1.0"

__all__ = [
    "ANDMAL",
    "MALONT",
    "PREFIXES",
    "RDF_TYPE",
    "AndMalKgError",
    "ApiError",
    "BlankNode",
    "CertInfo",
    "ClassDef",
    "CountAgg",
    "FetchSelector",
    "FixtureSource",
    "Graph",
    "Having",
    "IRI",
    "IngestSummary",
    "InvalidReportError",
    "Literal",
    "LiveSource",
    "MalformedTermError",
    "MalwareReport",
    "NTriplesParseError",
    "NetworkError",
    "PropertyDef",
    "QueryAST",
    "QueryParseError",
    "ReportParseError",
    "ResultTable",
    "SchemaRegistry",
    "SchemaViolationError",
    "Triple",
    "TriplePattern",
    "UnknownClassError",
    "UnknownPrefixError",
    "Var",
    "VendorVerdict",
    "Violation",
    "YaraRuleInfo",
    "andmal",
    "build_schema",
    "evaluate",
    "fetch_reports",
    "format_results",
    "ingest_corpus",
    "malont",
    "mint_iris",
    "parse_ntriples",
    "parse_query",
    "parse_report",
    "report_from_record",
    "report_to_triples",
    "run_query",
    "serialize_ntriples",
    "serialize_turtle",
    "slug",
    "term_to_ntriples",
    "validate_hash_format",
    "validate_individual",
]
