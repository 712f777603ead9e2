"""CSS codes from chain complexes.

Qubits sit on the cells of one level ``i``. X-checks are the ``(i-1)``-cells
(rows of ``H_X`` are rows of the boundary of level ``i``) and Z-checks are the
``(i+1)``-cells (rows of ``H_Z`` are columns of the boundary of level
``i+1``). Z-type errors are i-chains whose X-syndrome is their boundary;
X-type errors are detected by the coboundary.

Throughout, ``side`` names the Pauli type of an error or logical operator:
``"Z"`` errors are seen by ``H_X`` and are trivial when they lie in the row
space of ``H_Z``, and symmetrically for ``"X"``.
"""

from __future__ import annotations

import json
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import gf2
from .complexes import ChainComplex, _incidence, _pairs

__all__ = ["CssCode", "LogicalBasis", "from_complex", "load_artifact"]


def _side(side: str) -> str:
    side = side.upper()
    if side not in ("X", "Z"):
        raise ValueError(f"side must be 'X' or 'Z', got {side!r}")
    return side


class LogicalBasis:
    """Paired logical operators: ``x[i] . z[j] = delta_ij`` (mod 2)."""

    def __init__(self, x: np.ndarray, z: np.ndarray):
        self.x = x
        self.z = z

    @property
    def k(self) -> int:
        return self.x.shape[0]

    def of(self, side: str) -> np.ndarray:
        return self.x if _side(side) == "X" else self.z

    def pairing(self) -> np.ndarray:
        return gf2.matmul(self.x, self.z.T)


class CssCode:
    """CSS code with checks ``h_x`` and ``h_z`` on ``n`` qubits."""

    def __init__(
        self,
        h_x: sp.csr_array,
        h_z: sp.csr_array,
        qubit_level: int | None = None,
        complex: ChainComplex | None = None,
    ):
        if h_x.shape[1] != h_z.shape[1]:
            raise ValueError("H_X and H_Z act on different qubit counts")
        self.h_x = sp.csr_array(h_x, dtype=np.uint8)
        self.h_z = sp.csr_array(h_z, dtype=np.uint8)
        self.qubit_level = qubit_level
        self.complex = complex

    @property
    def n(self) -> int:
        return self.h_x.shape[1]

    def checks(self, side: str) -> sp.csr_array:
        """Checks that detect errors of type ``side``."""
        return self.h_x if _side(side) == "Z" else self.h_z

    def stabilizers(self, side: str) -> sp.csr_array:
        """Stabilizers of the same Pauli type as ``side``."""
        return self.h_z if _side(side) == "Z" else self.h_x

    @cached_property
    def rank_x(self) -> int:
        return gf2.rank(self.h_x)

    @cached_property
    def rank_z(self) -> int:
        return gf2.rank(self.h_z)

    @property
    def k(self) -> int:
        return self.n - self.rank_x - self.rank_z

    def commutes(self) -> bool:
        return not gf2.matmul(self.h_x, self.h_z.T).any()

    @cached_property
    def _rowspace_x(self) -> gf2.RowSpace:
        return gf2.RowSpace(self.h_x)

    @cached_property
    def _rowspace_z(self) -> gf2.RowSpace:
        return gf2.RowSpace(self.h_z)

    def _rowspace(self, side: str) -> gf2.RowSpace:
        return self._rowspace_z if _side(side) == "Z" else self._rowspace_x

    def syndrome(self, error, side: str) -> np.ndarray:
        """Violated checks of an error of type ``side`` (a vector or stack of rows)."""
        e = gf2.as_bits(error)
        if e.shape[-1] != self.n:
            raise ValueError(f"error has length {e.shape[-1]}, code has {self.n} qubits")
        h = self.checks(side)
        if e.ndim == 1:
            return gf2.matmul(h, e)
        return gf2.matmul(h, e.T).T

    def is_logical_failure(self, residual, side: str) -> bool | np.ndarray:
        """True when a syndrome-free residual is not a product of stabilizers."""
        r = gf2.as_bits(residual)
        if self.syndrome(r, side).any():
            raise ValueError("residual has a nonzero syndrome")
        return ~self._rowspace(side).contains(r) if r.ndim > 1 else not self._rowspace(side).contains(r)

    @cached_property
    def logicals(self) -> LogicalBasis:
        """Symplectically paired logical basis (deterministic for a fixed code).

        Cycles of each side are reduced against the stabilizer row space; the
        echelon form of the residues picks ``k`` representatives. The Z side
        is then recombined so the overlap matrix with the X side is the
        identity.
        """
        if self.k == 0:
            raise ValueError("trivial code: k = 0")
        reps = {}
        for side in ("X", "Z"):
            cycles = gf2.kernel_basis(self.checks(side))
            residues = self._rowspace(side).residual(cycles)
            reps[side], _ = gf2.rref(residues)
        x, z = reps["X"], reps["Z"]
        if x.shape[0] != self.k or z.shape[0] != self.k:
            raise RuntimeError("logical representative count does not match k")
        overlap = gf2.matmul(x, z.T)
        inv = np.zeros_like(overlap)
        for j in range(self.k):
            col = gf2.solve(overlap, np.eye(self.k, dtype=np.uint8)[:, j])
            if col is None:
                raise RuntimeError("logical overlap matrix is singular")
            inv[:, j] = col
        z = gf2.matmul(inv.T, z)
        return LogicalBasis(x, z)

    def logical_basis(self) -> LogicalBasis:
        return self.logicals

    def anticommuting_logicals(self, residual, side: str) -> np.ndarray:
        """Overlap parity of a residual with every logical of the opposite type."""
        other = "X" if _side(side) == "Z" else "Z"
        ops = self.logicals.of(other)
        r = gf2.as_bits(residual)
        return gf2.matmul(r, ops.T) if r.ndim > 1 else gf2.matmul(ops, r)

    # --- serialization -----------------------------------------------------

    def to_dict(self, include_logicals: bool = True) -> dict:
        if self.complex is not None:
            out = self.complex.to_dict(self.qubit_level)
        else:
            out = {"dimension": None, "levels": None, "boundaries": None,
                   "qubit_level": self.qubit_level, "meta": {}}
        out["n"] = self.n
        out["h_x"] = {"shape": list(self.h_x.shape), "entries": _pairs(self.h_x)}
        out["h_z"] = {"shape": list(self.h_z.shape), "entries": _pairs(self.h_z)}
        if include_logicals and self.k > 0:
            lb = self.logicals
            out["logicals"] = {
                "x": [np.flatnonzero(v).tolist() for v in lb.x],
                "z": [np.flatnonzero(v).tolist() for v in lb.z],
            }
        return out

    def to_json(self, include_logicals: bool = True) -> str:
        return json.dumps(self.to_dict(include_logicals), separators=(",", ":"))


def from_complex(c: ChainComplex, qubit_level: int) -> CssCode:
    """Code with qubits on level ``qubit_level`` of ``c`` (``1 <= i <= D-1``)."""
    if not 1 <= qubit_level <= c.dimension - 1:
        raise ValueError(f"qubit level must lie in 1..{c.dimension - 1}")
    h_x = c.boundary(qubit_level)
    h_z = c.boundary(qubit_level + 1).T.tocsr()
    return CssCode(h_x, h_z, qubit_level, c)


def load_artifact(data: dict | str) -> CssCode:
    """Rebuild a code from its JSON artifact (dict or JSON text)."""
    if isinstance(data, str):
        data = json.loads(data)
    if data.get("boundaries") is not None:
        c = ChainComplex.from_dict(data)
        return from_complex(c, int(data["qubit_level"]))
    try:
        hx, hz = data["h_x"], data["h_z"]
        h_x = _incidence(*hx["shape"], hx["entries"])
        h_z = _incidence(*hz["shape"], hz["entries"])
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed code artifact: {exc}") from exc
    return CssCode(h_x, h_z, data.get("qubit_level"))
