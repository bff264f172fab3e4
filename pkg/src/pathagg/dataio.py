"""Dataset and model file formats.

Datasets are plain text, one `sequence<TAB>response` pair per line, with
`#`-prefixed comment lines, UTF-8, LF endings.  Models are a versioned JSON
document carrying the alphabet, topology, probability rows at full decimal
precision, visit caps, regression parameters, and metadata; a save/load
round trip is bit-exact.
"""

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (AlphabetError, InvalidInputError, ModelFormatError,
                     ParseError, PathAggError)
from .model import Alphabet, HmmParams, HmmTopology, VisitCaps
from .regression import RegressionParams
from .training import TrainedModel

MODEL_FORMAT = "pathagg-model"
MODEL_VERSION = 1


@dataclass(frozen=True)
class LabeledSequence:
    sequence: str
    response: float


@dataclass
class Dataset:
    """Labeled sequences with optional named train/tune/test splits."""

    examples: list
    splits: dict | None = None

    def __post_init__(self):
        for i, ex in enumerate(self.examples):
            if len(ex.sequence) == 0:
                raise InvalidInputError(f"example {i}: empty sequence")
            if not math.isfinite(ex.response):
                raise InvalidInputError(f"example {i}: non-finite response")
        if self.splits is not None:
            for name, idx in self.splits.items():
                for i in idx:
                    if not 0 <= i < len(self.examples):
                        raise InvalidInputError(f"split {name!r}: index {i} out of range")

    def __len__(self):
        return len(self.examples)

    def __getitem__(self, i):
        return self.examples[i]

    def __iter__(self):
        return iter(self.examples)

    def split(self, name):
        """The named split as a plain Dataset."""
        if self.splits is None or name not in self.splits:
            raise InvalidInputError(f"dataset has no split {name!r}")
        return Dataset([self.examples[i] for i in self.splits[name]])

    def characters(self):
        chars = set()
        for ex in self.examples:
            chars.update(ex.sequence)
        return chars


def load_dataset(path, alphabet=None):
    """Parse a TSV dataset file; unknown symbols raise when an alphabet is
    given."""
    examples = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.rstrip("\n")
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise ParseError(f"expected `sequence<TAB>response`, got {line!r}",
                                 line=lineno)
            seq, resp = parts
            if not seq:
                raise ParseError("empty sequence field", line=lineno)
            try:
                y = float(resp)
            except ValueError:
                raise ParseError(f"bad response value {resp!r}", line=lineno) from None
            if not math.isfinite(y):
                raise ParseError(f"non-finite response {resp!r}", line=lineno)
            if alphabet is not None:
                for c in seq:
                    if c not in alphabet.symbols:
                        raise AlphabetError(
                            f"line {lineno}: symbol {c!r} not in alphabet"
                        )
            examples.append(LabeledSequence(seq, y))
    if not examples:
        raise ParseError(f"no examples in {path}")
    return Dataset(examples)


def save_dataset(dataset, path, header=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        if header:
            for line in header.splitlines():
                fh.write(f"# {line}\n")
        for ex in dataset:
            fh.write(f"{ex.sequence}\t{ex.response!r}\n")


def _model_payload(model):
    topo = model.params.topology
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "alphabet": list(topo.alphabet.symbols),
        "state_count": topo.state_count,
        "start_distribution": topo.start_distribution.tolist(),
        "allowed_transitions": sorted(list(t) for t in topo.allowed_transitions),
        "counted_states": list(topo.counted_states),
        "state_labels": list(topo.state_labels),
        "transition": model.params.transition.tolist(),
        "emission": model.params.emission.tolist(),
        "caps": list(model.caps.caps),
        "regression": {
            "coefficients": model.regression.coefficients.tolist(),
            "intercept": model.regression.intercept,
            "sigma": model.regression.sigma,
        },
        "training_trace": [float(v) for v in model.training_trace],
        "meta": model.meta,
    }


def save_model(model, path):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_model_payload(model), fh, indent=1)
        fh.write("\n")


def load_model(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ModelFormatError(f"unreadable model file {path}: {e}") from None
    if not isinstance(doc, dict) or doc.get("format") != MODEL_FORMAT:
        raise ModelFormatError(f"{path} is not a {MODEL_FORMAT} file")
    if doc.get("version") != MODEL_VERSION:
        raise ModelFormatError(
            f"unsupported model version {doc.get('version')!r} "
            f"(this build reads version {MODEL_VERSION})"
        )
    try:
        topo = HmmTopology(
            alphabet=Alphabet(tuple(doc["alphabet"])),
            state_count=doc["state_count"],
            start_distribution=np.array(doc["start_distribution"]),
            allowed_transitions=frozenset(tuple(t) for t in doc["allowed_transitions"]),
            counted_states=tuple(doc["counted_states"]),
            state_labels=tuple(doc["state_labels"]),
        )
        params = HmmParams(topo, np.array(doc["transition"]), np.array(doc["emission"]))
        caps = VisitCaps(tuple(doc["caps"]))
        reg = doc["regression"]
        regression = RegressionParams(
            coefficients=np.array(reg["coefficients"], dtype=float),
            intercept=reg["intercept"],
            sigma=reg["sigma"],
        )
    except KeyError as e:
        raise ModelFormatError(f"model file missing field {e.args[0]!r}") from None
    except PathAggError as e:
        raise ModelFormatError(f"model file violates invariants: {e}") from None
    return TrainedModel(
        params=params,
        caps=caps,
        regression=regression,
        training_trace=list(doc.get("training_trace", [])),
        meta=dict(doc.get("meta", {})),
    )
