"""AndMalOnt/MalOnt2.0 class and property registry plus instance validation.

The registry is a fixed catalog: MalOnt2.0 contributes 15 base classes and
the five classic hash types under Hash; AndMalOnt adds 14 classes (six more
hash schemes, the HashDigestSize enumeration, and the File/report-metadata
classes), 16 object properties, and 31 data properties.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from datetime import datetime
from types import MappingProxyType
from typing import Mapping, Optional

from .errors import UnknownClassError
from .ns import (
    RDF_TYPE,
    XSD_ANYURI,
    XSD_DATETIME,
    XSD_INTEGER,
    XSD_STRING,
    andmal,
    malont,
)
from .rdf import Graph, IRI, Literal, term_to_ntriples


@dataclass(frozen=True)
class ClassDef:
    iri: str
    parent: Optional[str]
    ns: str  # "malont" or "andmal"


@dataclass(frozen=True)
class PropertyDef:
    iri: str
    domain: str
    range: str  # class IRI for object properties, datatype IRI for data properties
    kind: str  # "object" or "data"
    ns: str


@dataclass(frozen=True)
class Violation:
    subject: str
    rule: str
    detail: str


VIOLATION_RULES = frozenset(
    {
        "unknown-class",
        "unknown-property",
        "domain-mismatch",
        "range-mismatch",
        "datatype-mismatch",
        "bad-hash-format",
        "missing-type",
    }
)

_MALONT_BASE = (
    "AttackPattern",
    "Campaign",
    "Indicator",
    "Infrastructure",
    "Location",
    "Malware",
    "MalwareAnalysis",
    "MalwareFamily",
    "Organization",
    "Person",
    "Report",
    "System",
    "ThreatActor",
    "Time",
    "Vulnerability",
)

_MALONT_HASHES = ("MD5", "SHA1", "SHA256", "SSDeep", "VHash")

# (local name, parent local name or None, namespace)
_ANDMAL_CLASSES = (
    ("IMPHASH", "Hash"),
    ("TLSH", "Hash"),
    ("TELFHASH", "Hash"),
    ("GIMPHASH", "Hash"),
    ("SHA2", "Hash"),
    ("SHA3", "Hash"),
    ("HashDigestSize", "Hash"),
    ("File", None),
    ("MalwareReporter", None),
    ("AppPublisher", None),
    ("Certificate", None),
    ("Tag", None),
    ("VendorIntelligence", None),
    ("YaraRule", "MalwareAnalysis"),
)

# (name, domain local, range local, namespace); "ReportedFrom" keeps its
# capital R and hasReporter lives in the malont namespace.
_OBJECT_PROPERTIES = (
    ("contains", "File", "Malware", "andmal"),
    ("hasMalwareFamily", "Malware", "MalwareFamily", "andmal"),
    ("hasTag", "Malware", "Tag", "andmal"),
    ("hasReporter", "File", "MalwareReporter", "malont"),
    ("ReportedFrom", "File", "Location", "andmal"),
    ("hasHash", "File", "Hash", "andmal"),
    ("hasDigestSize", "Hash", "HashDigestSize", "andmal"),
    ("hasCertificate", "File", "Certificate", "andmal"),
    ("publishedBy", "Malware", "AppPublisher", "andmal"),
    ("signedWith", "AppPublisher", "Certificate", "andmal"),
    ("hasVendorIntel", "Malware", "VendorIntelligence", "andmal"),
    ("reportedByVendor", "VendorIntelligence", "Organization", "andmal"),
    ("detectedBy", "Malware", "YaraRule", "andmal"),
    ("hasAnalysis", "Malware", "MalwareAnalysis", "andmal"),
    ("targetsSystem", "Malware", "System", "andmal"),
    ("hasFile", "Malware", "File", "andmal"),
)

# (name, domain local, datatype IRI)
_DATA_PROPERTIES = (
    ("hasFileName", "File", XSD_STRING),
    ("hasFileSize", "File", XSD_INTEGER),
    ("hasFileType", "File", XSD_STRING),
    ("hasFilePath", "File", XSD_STRING),
    ("firstSeen", "File", XSD_DATETIME),
    ("lastSeen", "File", XSD_DATETIME),
    ("md5Value", "MD5", XSD_STRING),
    ("sha1Value", "SHA1", XSD_STRING),
    ("sha256Value", "SHA256", XSD_STRING),
    ("ssdeepValue", "SSDeep", XSD_STRING),
    ("vhashValue", "VHash", XSD_STRING),
    ("imphashValue", "IMPHASH", XSD_STRING),
    ("tlshValue", "TLSH", XSD_STRING),
    ("telfhashValue", "TELFHASH", XSD_STRING),
    ("gimphashValue", "GIMPHASH", XSD_STRING),
    ("digestBits", "HashDigestSize", XSD_INTEGER),
    ("tagLabel", "Tag", XSD_STRING),
    ("reporterAlias", "MalwareReporter", XSD_STRING),
    ("vendorName", "VendorIntelligence", XSD_STRING),
    ("verdict", "VendorIntelligence", XSD_STRING),
    ("detectionName", "VendorIntelligence", XSD_STRING),
    ("vendorLink", "VendorIntelligence", XSD_ANYURI),
    ("analysisDate", "VendorIntelligence", XSD_DATETIME),
    ("yaraRuleName", "YaraRule", XSD_STRING),
    ("yaraAuthor", "YaraRule", XSD_STRING),
    ("yaraDescription", "YaraRule", XSD_STRING),
    ("yaraReference", "YaraRule", XSD_STRING),
    ("thumbprintAlgorithm", "Certificate", XSD_STRING),
    ("certSerialNumber", "Certificate", XSD_STRING),
    ("certIssuer", "Certificate", XSD_STRING),
    ("countryCode", "Location", XSD_STRING),
)

DIGEST_SIZES = (224, 256, 384, 512)


class SchemaRegistry:
    """Immutable catalog of classes and properties with lookup helpers."""

    def __init__(
        self,
        classes: dict[str, ClassDef],
        object_properties: dict[str, PropertyDef],
        data_properties: dict[str, PropertyDef],
    ):
        self.classes: Mapping[str, ClassDef] = MappingProxyType(dict(classes))
        self.object_properties: Mapping[str, PropertyDef] = MappingProxyType(
            dict(object_properties)
        )
        self.data_properties: Mapping[str, PropertyDef] = MappingProxyType(
            dict(data_properties)
        )
        # value-carrying data property -> the hash class its format rules follow
        self.hash_value_properties: Mapping[str, str] = MappingProxyType(
            {
                andmal("md5Value"): malont("MD5"),
                andmal("sha1Value"): malont("SHA1"),
                andmal("sha256Value"): malont("SHA256"),
                andmal("ssdeepValue"): malont("SSDeep"),
                andmal("vhashValue"): malont("VHash"),
                andmal("imphashValue"): andmal("IMPHASH"),
                andmal("tlshValue"): andmal("TLSH"),
                andmal("telfhashValue"): andmal("TELFHASH"),
                andmal("gimphashValue"): andmal("GIMPHASH"),
            }
        )
        self.digest_size_individuals: Mapping[int, str] = MappingProxyType(
            {bits: andmal(f"bits{bits}") for bits in DIGEST_SIZES}
        )
        for cls in self.classes.values():
            self._check_acyclic(cls.iri)

    def _check_acyclic(self, iri: str) -> None:
        seen = set()
        cur: Optional[str] = iri
        while cur is not None:
            if cur in seen:
                raise UnknownClassError(f"cycle in class hierarchy at {cur}")
            seen.add(cur)
            parent = self.classes[cur].parent
            if parent is not None and parent not in self.classes:
                raise UnknownClassError(f"parent of {cur} is unregistered: {parent}")
            cur = parent

    def is_class(self, iri: str) -> bool:
        return iri in self.classes

    def is_subclass_of(self, child: str, ancestor: str) -> bool:
        """True iff ancestor is reachable from child by parent edges (reflexive)."""
        if child not in self.classes:
            raise UnknownClassError(f"unregistered class: {child}")
        if ancestor not in self.classes:
            raise UnknownClassError(f"unregistered class: {ancestor}")
        cur: Optional[str] = child
        while cur is not None:
            if cur == ancestor:
                return True
            cur = self.classes[cur].parent
        return False


def build_schema() -> SchemaRegistry:
    """Construct the fixed AndMalOnt + MalOnt2.0 registry."""
    classes: dict[str, ClassDef] = {}
    for name in _MALONT_BASE:
        classes[malont(name)] = ClassDef(malont(name), None, "malont")
    classes[malont("Hash")] = ClassDef(malont("Hash"), malont("Indicator"), "malont")
    for name in _MALONT_HASHES:
        classes[malont(name)] = ClassDef(malont(name), malont("Hash"), "malont")
    for name, parent in _ANDMAL_CLASSES:
        if parent is None:
            parent_iri = None
        elif parent in _MALONT_BASE or parent == "Hash":
            parent_iri = malont(parent)
        else:
            parent_iri = andmal(parent)
        classes[andmal(name)] = ClassDef(andmal(name), parent_iri, "andmal")

    def class_iri(local: str) -> str:
        candidate = malont(local)
        if candidate in classes:
            return candidate
        return andmal(local)

    object_properties: dict[str, PropertyDef] = {}
    for name, domain, rng, ns in _OBJECT_PROPERTIES:
        iri = malont(name) if ns == "malont" else andmal(name)
        object_properties[iri] = PropertyDef(
            iri, class_iri(domain), class_iri(rng), "object", ns
        )
    data_properties: dict[str, PropertyDef] = {}
    for name, domain, datatype in _DATA_PROPERTIES:
        iri = andmal(name)
        data_properties[iri] = PropertyDef(
            iri, class_iri(domain), datatype, "data", "andmal"
        )
    return SchemaRegistry(classes, object_properties, data_properties)


_HEX_RE = re.compile(r"^[0-9a-fA-F]+$")
_LOWER_HEX_RE = re.compile(r"^[0-9a-f]+$")

_SHA23_LENGTHS = {56: 224, 64: 256, 96: 384, 128: 512}


def validate_hash_format(
    registry: SchemaRegistry, kind: str, value: str, digest_bits: Optional[int] = None
) -> bool:
    """Check a hash value against the format rules for its class.

    kind is a class IRI.  For SHA2/SHA3 an accompanying digest size (bits)
    pins the expected hex length; without one, any of the four standard
    lengths is accepted.
    """
    local = _local_name(registry, kind)
    if local == "MD5":
        return len(value) == 32 and bool(_LOWER_HEX_RE.match(value))
    if local == "SHA1":
        return len(value) == 40 and bool(_HEX_RE.match(value))
    if local == "SHA256":
        return len(value) == 64 and bool(_HEX_RE.match(value))
    if local == "IMPHASH":
        return len(value) == 32 and bool(_HEX_RE.match(value))
    if local == "TLSH":
        if value.startswith("T1"):
            rest = value[2:]
            return len(rest) == 70 and bool(_HEX_RE.match(rest))
        return len(value) == 70 and bool(_HEX_RE.match(value))
    if local == "TELFHASH":
        return len(value) == 70 and bool(_HEX_RE.match(value))
    if local == "GIMPHASH":
        return len(value) == 64 and bool(_HEX_RE.match(value))
    if local in ("SHA2", "SHA3"):
        if not _HEX_RE.match(value):
            return False
        bits = _SHA23_LENGTHS.get(len(value))
        if bits is None:
            return False
        return digest_bits is None or digest_bits == bits
    if local in ("SSDeep", "VHash"):
        return bool(value) and value.isprintable()
    raise UnknownClassError(f"no hash format rules for class: {kind}")


def _local_name(registry: SchemaRegistry, kind: str) -> str:
    cls = registry.classes.get(kind)
    if cls is None:
        raise UnknownClassError(f"unregistered class: {kind}")
    if not registry.is_subclass_of(kind, malont("Hash")) or kind == malont("Hash"):
        raise UnknownClassError(f"not a concrete hash class: {kind}")
    return kind.rsplit("#", 1)[-1]


def _literal_value_ok(datatype: str, lexical: str) -> bool:
    if datatype == XSD_STRING:
        return True
    if datatype == XSD_INTEGER:
        return re.fullmatch(r"[+-]?\d+", lexical) is not None
    if datatype == XSD_DATETIME:
        try:
            datetime.fromisoformat(lexical.replace("Z", "+00:00"))
            return True
        except ValueError:
            return False
    if datatype == XSD_ANYURI:
        return re.match(r"^[A-Za-z][A-Za-z0-9+.\-]*:", lexical) is not None
    # unknown datatype tags cannot be checked, so they fail closed
    return False


def validate_individual(
    registry: SchemaRegistry, graph: Graph, subject
) -> list[Violation]:
    """All schema violations for one subject; empty means conformant.

    Checks: at least one type triple naming a registered class; only
    registered properties; object-property domain/range against the class
    hierarchy; data-property literals parse under their datatype tag; hash
    value properties satisfy the per-algorithm format rules.
    """
    violations: list[Violation] = []
    subj_str = term_to_ntriples(subject)
    type_triples = graph.match(s=subject, p=IRI(RDF_TYPE))
    subject_types: list[str] = []
    for t in type_triples:
        if isinstance(t.object, IRI) and registry.is_class(t.object.value):
            subject_types.append(t.object.value)
        else:
            violations.append(
                Violation(subj_str, "unknown-class", f"type is not a registered class: {term_to_ntriples(t.object)}")
            )
    if not type_triples:
        violations.append(Violation(subj_str, "missing-type", "no type triple"))

    for t in graph.match(s=subject):
        pred = t.predicate.value
        if pred == RDF_TYPE:
            continue
        if pred in registry.object_properties:
            prop = registry.object_properties[pred]
            if subject_types and not any(
                registry.is_subclass_of(st, prop.domain) for st in subject_types
            ):
                violations.append(
                    Violation(
                        subj_str,
                        "domain-mismatch",
                        f"{pred} requires a {prop.domain} subject",
                    )
                )
            if isinstance(t.object, Literal):
                violations.append(
                    Violation(subj_str, "range-mismatch", f"{pred} object is a literal")
                )
            else:
                object_types = [
                    ot.value
                    for ot in graph.types_of(t.object)
                    if isinstance(ot, IRI) and registry.is_class(ot.value)
                ]
                if not any(
                    registry.is_subclass_of(ot, prop.range) for ot in object_types
                ):
                    violations.append(
                        Violation(
                            subj_str,
                            "range-mismatch",
                            f"{pred} requires a {prop.range} object",
                        )
                    )
        elif pred in registry.data_properties:
            if not isinstance(t.object, Literal):
                violations.append(
                    Violation(
                        subj_str, "datatype-mismatch", f"{pred} value is not a literal"
                    )
                )
                continue
            lit = t.object
            if lit.language is None and not _literal_value_ok(lit.datatype, lit.lexical):
                violations.append(
                    Violation(
                        subj_str,
                        "datatype-mismatch",
                        f"{pred} value {lit.lexical!r} does not parse as {lit.datatype}",
                    )
                )
                continue
            hash_class = registry.hash_value_properties.get(pred)
            if hash_class is not None:
                if not validate_hash_format(registry, hash_class, lit.lexical):
                    violations.append(
                        Violation(
                            subj_str,
                            "bad-hash-format",
                            f"{pred} value {lit.lexical!r} fails the format rules",
                        )
                    )
        else:
            violations.append(
                Violation(subj_str, "unknown-property", f"unregistered property {pred}")
            )
    return violations
