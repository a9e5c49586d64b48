"""Small helpers over xml.etree for namespace-aware parsing.

Core XACML elements are accepted either in the XACML 3.0 namespace or with
no namespace at all (requests in the wild frequently omit the default
xmlns); extension elements must be in the xacml4g namespace.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from xml.sax.saxutils import escape, quoteattr

from .uris import XACML3_NS, XACML4G_NS


def split_tag(tag: str) -> tuple[str, str]:
    """Return (namespace, local name) for an ElementTree tag."""
    if tag.startswith("{"):
        ns, _, local = tag[1:].partition("}")
        return ns, local
    return "", tag


def is_core(elem: ET.Element, local: str) -> bool:
    ns, name = split_tag(elem.tag)
    return name == local and ns in (XACML3_NS, "")


def is_ext(elem: ET.Element, local: str) -> bool:
    ns, name = split_tag(elem.tag)
    return name == local and ns == XACML4G_NS


def in_ext_ns(elem: ET.Element) -> bool:
    return split_tag(elem.tag)[0] == XACML4G_NS


def local_name(elem: ET.Element) -> str:
    return split_tag(elem.tag)[1]


def parse_xml(text: str, error_cls) -> ET.Element:
    """Parse ``text``, converting syntax errors to ``error_cls``."""
    try:
        return ET.fromstring(text)
    except ET.ParseError as exc:
        raise error_cls(f"not well-formed XML: {exc}") from exc


def text_of(elem: ET.Element) -> str:
    """Element text with surrounding whitespace stripped; '' when empty."""
    return (elem.text or "").strip()


def xml_escape(value: str) -> str:
    return escape(value)


def xml_attr(value: str) -> str:
    """Render an attribute value including the surrounding quotes."""
    return quoteattr(value)
