"""Namespace IRIs and datatype constants shared across the toolkit."""

# "secuirty" is the spelling published with the AndMalOnt ontology; do not fix it.
ANDMAL = "http://secuirty.birzeit.edu/android_malware_ontology#"
MALONT = "http://idea.rpi.edu/malont#"

RDF_TYPE = "http://www.w3.org/1999/02/22-rdf-syntax-ns#type"

XSD = "http://www.w3.org/2001/XMLSchema#"
XSD_STRING = XSD + "string"
XSD_INTEGER = XSD + "integer"
XSD_DATETIME = XSD + "dateTime"
XSD_ANYURI = XSD + "anyURI"

# Prefix table used for Turtle output and bound on every new Graph.
PREFIXES = {
    "android_malware_ontology": ANDMAL,
    "malont": MALONT,
}

# Datatype tag (as used in property definitions) -> full XSD IRI.
DATATYPE_IRIS = {
    "string": XSD_STRING,
    "integer": XSD_INTEGER,
    "dateTime": XSD_DATETIME,
    "anyURI": XSD_ANYURI,
}


def andmal(local: str) -> str:
    return ANDMAL + local


def malont(local: str) -> str:
    return MALONT + local
