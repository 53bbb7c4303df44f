"""Versioned, human-inspectable persistence for trained models.

A bundle is a JSON document with sorted keys and probabilities rendered as
17-significant-digit decimal strings, which makes saves byte-deterministic
and load(save(x)) exact.  Every load re-checks the model invariants before
the model can be used.  docs/bundle_schema.json describes the layout.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .hmm import Hmm
from .mining import MiningConfig
from .parsing import ParsingPattern

FORMAT_VERSION = 1


class BundleError(ValueError):
    """Malformed, corrupt or incompatible bundle file."""


@dataclass(frozen=True)
class ModelBundle:
    hmm: Hmm
    pattern: ParsingPattern
    mining_config: MiningConfig
    provenance: str
    format_version: int = FORMAT_VERSION


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _matrix(rows: np.ndarray) -> list:
    return [[_fmt(x) for x in row] for row in rows]


def bundle_to_document(bundle: ModelBundle) -> dict:
    return {
        "format_version": bundle.format_version,
        "provenance": bundle.provenance,
        "mining_config": {
            "threshold": bundle.mining_config.threshold,
            "expected_kpi_count": bundle.mining_config.expected_kpi_count,
            "containment_support": bundle.mining_config.containment_support,
        },
        "hmm": {
            "states": list(bundle.hmm.states),
            "emissions": list(bundle.hmm.emissions),
            "ps": [_fmt(x) for x in bundle.hmm.ps],
            "pt": _matrix(bundle.hmm.pt),
            "pe": _matrix(bundle.hmm.pe),
        },
        "pattern": {
            "required_tokens": sorted(bundle.pattern.required_tokens),
            "trigger": bundle.pattern.trigger,
            "kpi_name": bundle.pattern.kpi_name,
            "trigger_aliases": list(bundle.pattern.trigger_aliases),
        },
    }


def save_bundle(bundle: ModelBundle, path) -> None:
    text = json.dumps(bundle_to_document(bundle), indent=2, sort_keys=True) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _get(node: dict, key: str, kind, path: str):
    if not isinstance(node, dict) or key not in node:
        raise BundleError(f"missing field at {path}.{key}")
    value = node[key]
    if kind is int and isinstance(value, bool):
        raise BundleError(f"bad type at {path}.{key}")
    if not isinstance(value, kind):
        raise BundleError(f"bad type at {path}.{key}")
    return value


def _float_vector(values, path: str) -> np.ndarray:
    if not isinstance(values, list):
        raise BundleError(f"expected array at {path}")
    try:
        return np.array([float(x) for x in values], dtype=float)
    except (TypeError, ValueError):
        raise BundleError(f"bad number in {path}") from None


def _float_matrix(values, path: str, width: int) -> np.ndarray:
    if not isinstance(values, list):
        raise BundleError(f"expected array at {path}")
    rows = []
    for i, row in enumerate(values):
        vec = _float_vector(row, f"{path}[{i}]")
        if len(vec) != width:
            raise BundleError(f"bad row length at {path}[{i}]")
        rows.append(vec)
    return np.array(rows, dtype=float)


def document_to_bundle(doc: dict) -> ModelBundle:
    version = _get(doc, "format_version", int, "$")
    if version != FORMAT_VERSION:
        raise BundleError(f"unsupported format_version {version}, expected {FORMAT_VERSION}")
    provenance = _get(doc, "provenance", str, "$")

    mc = _get(doc, "mining_config", dict, "$")
    mining_config = MiningConfig(
        threshold=_get(mc, "threshold", int, "$.mining_config"),
        expected_kpi_count=_get(mc, "expected_kpi_count", int, "$.mining_config"),
        containment_support=_get(mc, "containment_support", bool, "$.mining_config"),
    )

    hm = _get(doc, "hmm", dict, "$")
    states = tuple(_get(hm, "states", list, "$.hmm"))
    emissions = tuple(_get(hm, "emissions", list, "$.hmm"))
    ps = _float_vector(_get(hm, "ps", list, "$.hmm"), "$.hmm.ps")
    pt = _float_matrix(_get(hm, "pt", list, "$.hmm"), "$.hmm.pt", len(states))
    pe = _float_matrix(_get(hm, "pe", list, "$.hmm"), "$.hmm.pe", len(emissions))
    model = Hmm(states, emissions, ps, pt, pe)
    try:
        model.validate()
    except ValueError as exc:
        raise BundleError(f"invalid model in $.hmm: {exc}") from None

    pt_doc = _get(doc, "pattern", dict, "$")
    try:
        pattern = ParsingPattern(
            required_tokens=frozenset(_get(pt_doc, "required_tokens", list, "$.pattern")),
            trigger=_get(pt_doc, "trigger", str, "$.pattern"),
            kpi_name=_get(pt_doc, "kpi_name", str, "$.pattern"),
            trigger_aliases=tuple(_get(pt_doc, "trigger_aliases", list, "$.pattern")),
        )
    except ValueError as exc:
        raise BundleError(f"invalid pattern in $.pattern: {exc}") from None
    return ModelBundle(model, pattern, mining_config, provenance, version)


def load_bundle(path) -> ModelBundle:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise BundleError(f"not valid JSON: {exc}") from None
    return document_to_bundle(doc)
