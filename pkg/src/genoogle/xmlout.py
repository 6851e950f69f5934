"""XML result documents.

Schema (attribute vocabulary follows BLAST XML where it fits):

    <genoogle version="...">
      <search databank="..." query-id="...">
        <params max-entry-distance="..." ... evalue-k="..."/>
        <hit seq-id="..." name="..." description="...">
          <hsp score="..." bit-score="..." e-value="..."
               query-from="..." query-to="..." hit-from="..." hit-to="...">
            <qseq>...</qseq><midline>...</midline><hseq>...</hseq>
          </hsp>
        </hit>
      </search>
    </genoogle>

Coordinates are 0-based half-open.  Scores are integers, bit scores use
4 decimal places, e-values scientific notation with 6 significant
digits; the decimal separator is always '.'.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import fields

from .model import SearchParams, SearchResult

XML_VERSION = "0.1.0"


def _param_attrs(params: SearchParams) -> dict[str, str]:
    attrs = {}
    for f in fields(params):
        value = getattr(params, f.name)
        attrs[f.name.replace("_", "-")] = (
            repr(value) if isinstance(value, float) else str(value)
        )
    return attrs


def results_element(results) -> ET.Element:
    """Build the document root for one or more search results."""
    if isinstance(results, SearchResult):
        results = [results]
    root = ET.Element("genoogle", {"version": XML_VERSION})
    for result in results:
        search = ET.SubElement(
            root, "search", {"databank": result.bank_name, "query-id": result.query_id}
        )
        ET.SubElement(search, "params", _param_attrs(result.params))
        for hit in result.hits:
            hit_el = ET.SubElement(
                search,
                "hit",
                {
                    "seq-id": str(hit.seq_id),
                    "name": hit.name,
                    "description": hit.description,
                },
            )
            for hsp in hit.hsps:
                hsp_el = ET.SubElement(
                    hit_el,
                    "hsp",
                    {
                        "score": str(hsp.score),
                        "bit-score": f"{hsp.bit_score:.4f}",
                        "e-value": f"{hsp.e_value:.5e}",
                        "query-from": str(hsp.query_start),
                        "query-to": str(hsp.query_end),
                        "hit-from": str(hsp.bank_start),
                        "hit-to": str(hsp.bank_end),
                    },
                )
                ET.SubElement(hsp_el, "qseq").text = hsp.aligned_query
                ET.SubElement(hsp_el, "midline").text = hsp.midline
                ET.SubElement(hsp_el, "hseq").text = hsp.aligned_bank
    return root


def write_results_xml(results, path) -> None:
    """Write the XML document for one or more search results."""
    root = results_element(results)
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)


def parse_results_xml(path) -> list[dict]:
    """Parse a results document back into plain dicts (round-trip aid)."""
    root = ET.parse(path).getroot()
    if root.tag != "genoogle":
        raise ValueError(f"unexpected root element {root.tag!r}")
    out = []
    for search in root.findall("search"):
        params_el = search.find("params")
        doc = {
            "databank": search.get("databank"),
            "query_id": search.get("query-id"),
            "params": dict(params_el.attrib) if params_el is not None else {},
            "hits": [],
        }
        for hit in search.findall("hit"):
            h = {
                "seq_id": int(hit.get("seq-id")),
                "name": hit.get("name"),
                "description": hit.get("description"),
                "hsps": [],
            }
            for hsp in hit.findall("hsp"):
                h["hsps"].append(
                    {
                        "score": int(hsp.get("score")),
                        "bit_score": float(hsp.get("bit-score")),
                        "e_value": float(hsp.get("e-value")),
                        "query_from": int(hsp.get("query-from")),
                        "query_to": int(hsp.get("query-to")),
                        "hit_from": int(hsp.get("hit-from")),
                        "hit_to": int(hsp.get("hit-to")),
                        "qseq": hsp.findtext("qseq") or "",
                        "midline": hsp.findtext("midline") or "",
                        "hseq": hsp.findtext("hseq") or "",
                    }
                )
            doc["hits"].append(h)
        out.append(doc)
    return out
