"""Constrained switching linear systems: matrix set plus constraining automaton."""

import json
from dataclasses import dataclass, field

import numpy as np

from .automaton import Automaton
from .exceptions import CertError, DimensionMismatch, ParseError


@dataclass(frozen=True, eq=False)
class SystemSpec:
    """Matrices ``A_1..A_m`` (stored 0-based) and the automaton over labels ``1..m``."""

    matrices: np.ndarray = field(repr=False)
    automaton: Automaton

    def __post_init__(self):
        mats = np.array(self.matrices, dtype=float)
        if mats.ndim != 3 or mats.shape[1] != mats.shape[2]:
            raise DimensionMismatch(f"matrices must be an (m, n, n) stack, got shape {mats.shape}")
        if not np.all(np.isfinite(mats)):
            raise ParseError("matrices contain non-finite entries")
        if mats.shape[0] != self.automaton.alphabet_size:
            raise DimensionMismatch(
                f"{mats.shape[0]} matrices but the automaton uses {self.automaton.alphabet_size} labels"
            )
        mats.setflags(write=False)
        object.__setattr__(self, "matrices", mats)

    @property
    def n(self):
        return self.matrices.shape[1]

    @property
    def m(self):
        return self.matrices.shape[0]

    def product(self, word):
        """A_{w[-1]} ... A_{w[0]}: later labels multiply on the left."""
        M = np.eye(self.n)
        for lab in word:
            M = self.matrices[lab - 1] @ M
        return M

    def scaled(self, c):
        return SystemSpec(self.matrices * c, self.automaton)

    @classmethod
    def from_dict(cls, data):
        try:
            n = int(data["n"])
            raw = data["matrices"]
            auto = data["automaton"]
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"system file is missing a field: {exc}") from None
        mats = []
        for k, flat in enumerate(raw):
            arr = np.asarray(flat, dtype=float)
            if arr.size != n * n:
                raise DimensionMismatch(f"matrix {k + 1} has {arr.size} entries, expected {n * n}")
            mats.append(arr.reshape(n, n))
        if not mats:
            raise ParseError("system has no matrices")
        automaton = Automaton.from_dict(auto, alphabet_size=len(mats))
        return cls(np.array(mats), automaton)

    def to_dict(self):
        return {
            "n": self.n,
            "matrices": [[float(v) for v in A.ravel()] for A in self.matrices],
            "automaton": self.automaton.to_dict(),
        }


def load_system(path):
    """Read a system JSON file; malformed JSON is reported with its line number."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, line=exc.lineno) from None
    try:
        return SystemSpec.from_dict(data)
    except CertError as exc:
        raise type(exc)(f"{path}: {exc}") from None


def save_system(system, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(system.to_dict(), fh, indent=2)
        fh.write("\n")
