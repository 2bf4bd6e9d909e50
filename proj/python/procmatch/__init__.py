"""Process model comparison and reference model merging."""

import json

from . import _procmatch
from ._procmatch import Error, Weights, levenshtein, name_similarity, normalize_name, validate_model

__all__ = ["Error", "Session", "Weights", "levenshtein", "name_similarity", "normalize_name", "validate_model"]


def _text(doc):
    return doc if isinstance(doc, str) else json.dumps(doc)


class Session:
    """Comparison session over two model documents (JSON text or dicts)."""

    def __init__(self, left, right, weights=None, name_threshold=0.9, _raw=None):
        if _raw is not None:
            self._s = _raw
        else:
            self._s = _procmatch.Session(_text(left), _text(right), weights or Weights(), name_threshold)

    @classmethod
    def from_json(cls, doc):
        return cls(None, None, _raw=_procmatch.Session.from_json(_text(doc)))

    def add_fact(self, left, right, equal, rationale=""):
        return json.loads(self._s.add_fact(left, right, equal, rationale))

    def add_facts(self, facts):
        self._s.add_facts(_text(facts))

    def retract_fact(self, fact_id):
        self._s.retract_fact(fact_id)

    def set_weights(self, weights):
        self._s.set_weights(weights)

    def recompute(self, scope="processes"):
        return json.loads(self._s.recompute(scope))

    def heatmap(self):
        return self._s.heatmap()

    def expectation_report(self, low=0.3, high=0.7):
        return json.loads(self._s.expectation_report(low, high))

    def commonality_table(self):
        return json.loads(self._s.commonality_table())

    def merge(self, annotations, decisions=None):
        return json.loads(self._s.merge(_text(annotations), "" if decisions is None else _text(decisions)))

    def to_json(self):
        return json.loads(self._s.to_json())

    @property
    def iterations(self):
        return self._s.iterations
