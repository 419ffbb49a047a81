"""Verification reports and their JSON-lines serialization.

Every checker returns a VerificationReport; the CLI streams them as one
canonical JSON object per line. Reports never contain wall-clock data,
so equal configurations produce byte-identical output.
"""

import json
from dataclasses import dataclass

REPORT_SCHEMA = {
    "type": "object",
    "required": [
        "suite",
        "instance_id",
        "verdict",
        "counterexample",
        "witness_histogram",
        "triples_checked",
        "regime",
        "seed",
    ],
    "properties": {
        "suite": {"type": "string"},
        "instance_id": {"type": "string"},
        "verdict": {"enum": ["PASS", "FAIL"]},
        "counterexample": {"type": ["object", "null"]},
        "witness_histogram": {
            "type": ["object", "null"],
            "additionalProperties": {"type": "integer"},
        },
        "triples_checked": {"type": "integer", "minimum": 0},
        "regime": {"enum": ["exhaustive", "sampled"]},
        "seed": {"type": ["integer", "null"]},
    },
    "additionalProperties": False,
}


@dataclass(frozen=True)
class VerificationReport:
    suite: str
    instance_id: str
    verdict: str  # "PASS" | "FAIL"
    counterexample: dict | None = None
    witness_histogram: dict | None = None
    triples_checked: int = 0
    regime: str = "exhaustive"
    seed: int | None = None

    @property
    def passed(self):
        return self.verdict == "PASS"

    def to_dict(self):
        hist = self.witness_histogram
        if hist is not None:
            hist = {str(k): hist[k] for k in sorted(hist)}
        return {
            "suite": self.suite,
            "instance_id": self.instance_id,
            "verdict": self.verdict,
            "counterexample": self.counterexample,
            "witness_histogram": hist,
            "triples_checked": self.triples_checked,
            "regime": self.regime,
            "seed": self.seed,
        }

    def to_json_line(self):
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def passed_report(suite, instance_id, *, histogram=None, triples=0,
                  regime="exhaustive", seed=None):
    return VerificationReport(suite, instance_id, "PASS", None, histogram,
                              triples, regime, seed)


def failed_report(suite, instance_id, counterexample, *, histogram=None,
                  triples=0, regime="exhaustive", seed=None):
    return VerificationReport(suite, instance_id, "FAIL", counterexample,
                              histogram, triples, regime, seed)
