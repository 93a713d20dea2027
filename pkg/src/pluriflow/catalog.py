"""Built-in catalog of the reference Hermitian structures.

Entries are embedded in code so the command-line tool is self-contained.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .almostabelian import AlmostAbelianData
from .brackets import LieBracket
from .hermitian import HermitianFrame

__all__ = ["CatalogEntry", "catalog_names", "get_entry", "s_ab_data", "kodaira_bracket"]


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # "almost_abelian" | "nilpotent"
    data: object  # AlmostAbelianData or (LieBracket, HermitianFrame)
    expected: dict


def s_ab_data(a: float, b: float) -> AlmostAbelianData:
    """6-dimensional almost-abelian solvable family; SKT with k = 1 for a, b != 0."""
    A = np.array(
        [
            [-a / 2, 0.0, 0.0, 0.0],
            [0.0, 0.0, b, 0.0],
            [0.0, -b, 0.0, 0.0],
            [0.0, 0.0, 0.0, -a / 2],
        ]
    )
    return AlmostAbelianData.with_standard_j1(a, np.zeros(4), A)


def kodaira_bracket():
    """Heisenberg x R bracket mu(e1, e2) = e3 with block complex structure."""
    mu = LieBracket.from_entries(4, [(0, 1, 2, 1.0)])
    frame = HermitianFrame.pairwise(4)
    return mu, frame


def _ten_dim(v_tail: float) -> AlmostAbelianData:
    blk = np.array([[0.0, -1.0], [1.0, 0.0]])
    j1 = np.zeros((8, 8))
    for i in range(0, 8, 2):
        j1[i : i + 2, i : i + 2] = blk
    A = np.diag([-1.0] * 6 + [0.0] * 2)
    v = np.zeros(8)
    v[6] = v[7] = v_tail
    return AlmostAbelianData(2.0, v, A, j1)


def _entries():
    yield CatalogEntry(
        name="kodaira",
        kind="nilpotent",
        data=kodaira_bracket(),
        expected={"terminal": "FIXED_POINT", "tr_P_limit": -0.5},
    )
    yield CatalogEntry(
        name="shrink10",
        kind="almost_abelian",
        data=_ten_dim(0.0),
        expected={"case": "vi", "kind": "SHRINKING", "alpha": 1.0, "T": 0.5, "k": 3},
    )
    yield CatalogEntry(
        name="steady10",
        kind="almost_abelian",
        data=_ten_dim(1.0),
        expected={"case": "v", "kind": "STEADY", "alpha": 0.0, "k": 3},
    )
    yield CatalogEntry(
        name="s_ab(1, pi/2)",
        kind="almost_abelian",
        data=s_ab_data(1.0, np.pi / 2),
        expected={"case": "iii", "unimodular": True, "kind": "EXPANDING", "alpha": -0.25, "k": 1},
    )


_CATALOG = {e.name: e for e in _entries()}
_SAB_RE = re.compile(r"s_ab\(\s*([^,]+)\s*,\s*([^)]+)\s*\)")


def _num(tok: str) -> float:
    tok = tok.strip().replace(" ", "")
    ns = {"pi": np.pi}
    if not re.fullmatch(r"[0-9pi+\-*/.()]+", tok):
        raise ValueError(f"cannot parse numeric token {tok!r}")
    return float(eval(tok, {"__builtins__": {}}, ns))  # noqa: S307 - charset-restricted arithmetic


def catalog_names():
    return sorted(_CATALOG)


def get_entry(name: str) -> CatalogEntry:
    name = name.strip()
    if name in _CATALOG:
        return _CATALOG[name]
    m = _SAB_RE.fullmatch(name)
    if m:
        a, b = _num(m.group(1)), _num(m.group(2))
        return CatalogEntry(
            name=name,
            kind="almost_abelian",
            data=s_ab_data(a, b),
            expected={"case": "iii", "kind": "EXPANDING", "alpha": -a * a / 4},
        )
    raise KeyError(f"unknown catalog entry {name!r}; available: {', '.join(catalog_names())}")
