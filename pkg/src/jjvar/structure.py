"""Periodic atomic structures and their analysis.

Extended-XYZ parsing, minimum-image bond graphs from species-pair distance
cutoffs, oxide-region identification with stoichiometry, lateral-grid surface
detection, and the small gas-exposure arithmetic (ideal-gas reference count,
effective oxidation time).

Minimum-image handling is restricted to orthorhombic cells; triclinic
periodic cells are rejected.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .constants import BOLTZMANN_KB

__all__ = [
    "DEFAULT_CUTOFFS",
    "SPECIES",
    "AtomicStructure",
    "BondGraph",
    "ConfigurationError",
    "OxideRegion",
    "ParseError",
    "effective_time",
    "ideal_gas_count",
    "mic_distances",
    "neighbor_graph",
    "oxide_region",
    "parse_xyz",
    "read_structure",
    "stoichiometry",
    "surface_sites",
    "to_xyz",
]

SPECIES = ("Al", "O", "H")

# Species-pair bond cutoffs (A), from covalent-radius sums.  Pairs not listed
# (H-H) are never bonded.  All overridable per call.
DEFAULT_CUTOFFS = {
    ("Al", "Al"): 3.0,
    ("Al", "O"): 2.2,
    ("Al", "H"): 2.0,
    ("O", "O"): 1.6,
    ("O", "H"): 1.2,
}

_LATTICE_RE = re.compile(r'Lattice="([^"]*)"')


class ParseError(ValueError):
    """Malformed structure file; carries the offending 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line
        self.message = message


class ConfigurationError(ValueError):
    """Geometry/cutoff combination the analysis cannot honour."""


@dataclass(frozen=True)
class AtomicStructure:
    """Atoms in a cell: species labels, Cartesian positions (A), periodicity."""

    cell: np.ndarray  # (3, 3), rows are lattice vectors
    pbc: tuple[bool, bool, bool]
    species: tuple[str, ...]
    positions: np.ndarray  # (n, 3)

    def __post_init__(self) -> None:
        cell = np.asarray(self.cell, dtype=float)
        pos = np.asarray(self.positions, dtype=float).reshape(-1, 3)
        object.__setattr__(self, "cell", cell)
        object.__setattr__(self, "positions", pos)
        if cell.shape != (3, 3) or not np.all(np.isfinite(cell)):
            raise ValueError("cell must be a finite 3x3 matrix")
        if abs(np.linalg.det(cell)) <= 0:
            raise ValueError("cell volume must be positive")
        if not np.all(np.isfinite(pos)):
            raise ValueError("positions must be finite")
        if len(self.species) != len(pos):
            raise ValueError("species and positions length mismatch")
        bad = sorted({s for s in self.species if s not in SPECIES})
        if bad:
            raise ValueError(f"unknown species {bad}; allowed: {SPECIES}")

    def __len__(self) -> int:
        return len(self.species)

    @property
    def is_orthorhombic(self) -> bool:
        off = self.cell - np.diag(np.diag(self.cell))
        return bool(np.all(np.abs(off) < 1e-9 * max(1.0, np.abs(self.cell).max())))

    def indices_of(self, species: str) -> np.ndarray:
        return np.array([i for i, s in enumerate(self.species) if s == species], dtype=int)


def parse_xyz(text: str) -> AtomicStructure:
    """Parse a single-frame extended-XYZ string.

    Line 1 holds the atom count, line 2 a comment that may carry
    Lattice="ax ay az bx by bz cx cy cz"; without it the cell is an
    orthorhombic bounding box with 10 A padding and the structure is
    flagged non-periodic.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError(1, "missing atom count")
    try:
        natoms = int(lines[0].strip())
    except ValueError:
        raise ParseError(1, f"bad atom count {lines[0].strip()!r}") from None
    if natoms < 1:
        raise ParseError(1, f"atom count must be positive, got {natoms}")
    if len(lines) < 2:
        raise ParseError(2, "missing comment line")

    comment = lines[1]
    match = _LATTICE_RE.search(comment)
    cell = None
    if match:
        fields = match.group(1).split()
        if len(fields) != 9:
            raise ParseError(2, f"Lattice needs 9 numbers, got {len(fields)}")
        try:
            cell = np.array([float(f) for f in fields]).reshape(3, 3)
        except ValueError:
            raise ParseError(2, "unparseable Lattice entry") from None

    species: list[str] = []
    coords: list[list[float]] = []
    for offset in range(natoms):
        lineno = 3 + offset
        if lineno - 1 >= len(lines) or not lines[lineno - 1].strip():
            raise ParseError(lineno, f"expected atom row {offset + 1} of {natoms}")
        tokens = lines[lineno - 1].split()
        if len(tokens) < 4:
            raise ParseError(lineno, f"need 'species x y z', got {lines[lineno - 1]!r}")
        label = tokens[0].capitalize()
        if label not in SPECIES:
            raise ParseError(lineno, f"unknown species {tokens[0]!r}")
        try:
            xyz = [float(t) for t in tokens[1:4]]
        except ValueError:
            raise ParseError(lineno, f"unparseable coordinate in {lines[lineno - 1]!r}") from None
        species.append(label)
        coords.append(xyz)

    for extra in range(3 + natoms, len(lines) + 1):
        if extra - 1 < len(lines) and lines[extra - 1].strip():
            raise ParseError(extra, "trailing content after declared atoms")

    positions = np.array(coords)
    if cell is not None:
        pbc = (True, True, True)
    else:
        extent = positions.max(axis=0) - positions.min(axis=0)
        cell = np.diag(extent + 10.0)
        pbc = (False, False, False)
    return AtomicStructure(cell=cell, pbc=pbc, species=tuple(species), positions=positions)


def to_xyz(structure: AtomicStructure, comment: str = "") -> str:
    """Extended-XYZ serialization; inverse of parse_xyz for periodic cells."""
    parts = [str(len(structure))]
    lattice = " ".join(f"{x:.10f}" for x in structure.cell.reshape(-1))
    tags = []
    if any(structure.pbc):
        tags.append(f'Lattice="{lattice}"')
    if comment:
        tags.append(comment)
    parts.append(" ".join(tags))
    for s, p in zip(structure.species, structure.positions):
        parts.append(f"{s} {p[0]:.10f} {p[1]:.10f} {p[2]:.10f}")
    return "\n".join(parts) + "\n"


def read_structure(path: str | Path) -> AtomicStructure:
    path = Path(path)
    try:
        return parse_xyz(path.read_text())
    except ParseError as exc:
        raise ParseError(exc.line, f"{path.name}: {exc.message}") from None


def _cell_lengths(structure: AtomicStructure) -> np.ndarray:
    return np.abs(np.diag(structure.cell))


def _require_mic_cell(structure: AtomicStructure) -> None:
    if any(structure.pbc) and not structure.is_orthorhombic:
        raise ConfigurationError(
            "minimum-image convention supports orthorhombic cells only; "
            "got a triclinic periodic cell"
        )


def _mic_vectors(structure: AtomicStructure, origin: np.ndarray, targets: np.ndarray) -> np.ndarray:
    delta = targets - origin
    lengths = _cell_lengths(structure)
    for ax in range(3):
        if structure.pbc[ax]:
            delta[:, ax] -= lengths[ax] * np.round(delta[:, ax] / lengths[ax])
    return delta


def mic_distances(structure: AtomicStructure, i: int, indices: Sequence[int]) -> np.ndarray:
    """Minimum-image distances from atom i to the given atom indices."""
    _require_mic_cell(structure)
    idx = np.asarray(indices, dtype=int)
    delta = _mic_vectors(structure, structure.positions[i], structure.positions[idx])
    return np.linalg.norm(delta, axis=1)


def _normalize_cutoffs(cutoffs: Mapping | None) -> dict[tuple[str, str], float]:
    merged = dict(DEFAULT_CUTOFFS)
    if cutoffs:
        for key, value in cutoffs.items():
            a, b = key
            if a not in SPECIES or b not in SPECIES:
                raise ConfigurationError(f"unknown species pair {key!r}")
            if not value > 0:
                raise ConfigurationError(f"cutoff for {key!r} must be positive, got {value}")
            merged[tuple(sorted((a, b)))] = float(value)
    return {tuple(sorted(k)): float(v) for k, v in merged.items()}


class BondGraph:
    """Symmetric distance-cutoff adjacency under the minimum-image convention."""

    def __init__(
        self,
        structure: AtomicStructure,
        neighbors: list[list[tuple[int, float]]],
        cutoffs: dict[tuple[str, str], float],
    ):
        self.structure = structure
        self.cutoffs = cutoffs
        self._neighbors = neighbors

    def __len__(self) -> int:
        return len(self._neighbors)

    def neighbors(self, i: int) -> list[tuple[int, float]]:
        """(index, distance) pairs sorted by atom index."""
        return self._neighbors[i]

    def neighbors_of_species(self, i: int, species: str) -> list[tuple[int, float]]:
        kinds = self.structure.species
        return [(j, d) for j, d in self._neighbors[i] if kinds[j] == species]

    def edge_set(self) -> set[tuple[int, int]]:
        return {(i, j) for i, nbrs in enumerate(self._neighbors) for j, _ in nbrs if i < j}


def neighbor_graph(structure: AtomicStructure, cutoffs: Mapping | None = None) -> BondGraph:
    """Build the bond graph; deterministic, ordered by atom index.

    Raises ConfigurationError when a cutoff reaches half the cell length on a
    periodic axis (the minimum-image distance would be ambiguous).
    """
    _require_mic_cell(structure)
    cut = _normalize_cutoffs(cutoffs)
    rmax = max(cut.values())
    lengths = _cell_lengths(structure)
    for ax in range(3):
        if structure.pbc[ax] and rmax >= 0.5 * lengths[ax]:
            raise ConfigurationError(
                f"cutoff {rmax} A >= half cell length {0.5 * lengths[ax]} A on periodic axis {ax}"
            )

    n = len(structure)
    kind = np.array([SPECIES.index(s) for s in structure.species])
    cut_matrix = np.zeros((len(SPECIES), len(SPECIES)))
    for (a, b), r in cut.items():
        ia, ib = SPECIES.index(a), SPECIES.index(b)
        cut_matrix[ia, ib] = cut_matrix[ib, ia] = r

    neighbors: list[list[tuple[int, float]]] = [[] for _ in range(n)]
    pos = structure.positions
    chunk = 256
    for start in range(0, n, chunk):
        stop = min(start + chunk, n)
        delta = pos[start:stop, None, :] - pos[None, :, :]
        for ax in range(3):
            if structure.pbc[ax]:
                delta[:, :, ax] -= lengths[ax] * np.round(delta[:, :, ax] / lengths[ax])
        dist = np.sqrt(np.sum(delta * delta, axis=2))
        thresh = cut_matrix[kind[start:stop][:, None], kind[None, :]]
        mask = dist <= thresh
        mask[np.arange(stop - start), np.arange(start, stop)] = False
        for row in range(stop - start):
            js = np.nonzero(mask[row])[0]
            neighbors[start + row] = [(int(j), float(dist[row, j])) for j in js]
    return BondGraph(structure, neighbors, cut)


@dataclass(frozen=True)
class OxideRegion:
    """z-interval holding the oxide, its member atoms and composition."""

    z_lo: float
    z_hi: float
    members: tuple[int, ...]
    n_al: int
    n_o: int
    n_h: int

    def __post_init__(self) -> None:
        if not self.z_lo < self.z_hi:
            raise ValueError(f"empty z-interval [{self.z_lo}, {self.z_hi}]")


def oxide_region(
    structure: AtomicStructure, graph: BondGraph | None = None, padding: float = 0.5
) -> OxideRegion:
    """Locate the oxide as the z-interval spanning all O atoms plus padding.

    Membership is interval-based (robust against under-coordinated amorphous
    edges); `graph` is accepted for interface parity and unused.
    """
    del graph
    z = structure.positions[:, 2]
    o_idx = structure.indices_of("O")
    if o_idx.size == 0:
        raise ValueError("structure contains no O atoms; cannot locate an oxide region")
    z_lo = float(z[o_idx].min() - padding)
    z_hi = float(z[o_idx].max() + padding)
    members = tuple(int(i) for i in np.nonzero((z >= z_lo) & (z <= z_hi))[0])
    kinds = [structure.species[i] for i in members]
    return OxideRegion(
        z_lo=z_lo,
        z_hi=z_hi,
        members=members,
        n_al=kinds.count("Al"),
        n_o=kinds.count("O"),
        n_h=kinds.count("H"),
    )


def stoichiometry(region: OxideRegion) -> tuple[float, float]:
    """(x, h_at%) with x = N_O / N_Al and at.% counting H in the denominator."""
    if region.n_al < 1:
        raise ValueError("oxide region contains no Al; stoichiometry undefined")
    x = region.n_o / region.n_al
    total = region.n_al + region.n_o + region.n_h
    return x, 100.0 * region.n_h / total


def surface_sites(
    structure: AtomicStructure,
    region: OxideRegion,
    depth: float = 2.0,
    bin_width: float = 4.0,
) -> frozenset[int]:
    """Oxide atoms within `depth` of their lateral cell's local top surface.

    The xy plane is gridded into bin_width x bin_width cells; each cell's
    surface height is the max z of its oxide members, and a member is a
    surface site iff z >= height - depth.
    """
    if not depth > 0:
        raise ValueError(f"depth must be positive, got {depth}")
    if not bin_width > 0:
        raise ValueError(f"bin width must be positive, got {bin_width}")
    if not region.members:
        raise ValueError("empty oxide region")
    members = np.array(region.members, dtype=int)
    pos = structure.positions[members]
    lengths = _cell_lengths(structure)

    keys = np.zeros((len(members), 2), dtype=int)
    for axis in range(2):
        coords = pos[:, axis]
        if structure.pbc[axis]:
            span = lengths[axis]
            wrapped = np.mod(coords, span)
        else:
            span = coords.max() - coords.min()
            wrapped = coords - coords.min()
        nbins = max(1, int(math.ceil(span / bin_width))) if span > 0 else 1
        keys[:, axis] = np.minimum((wrapped / bin_width).astype(int), nbins - 1)

    heights: dict[tuple[int, int], float] = {}
    for (kx, ky), z in zip(map(tuple, keys), pos[:, 2]):
        key = (int(kx), int(ky))
        if key not in heights or z > heights[key]:
            heights[key] = float(z)

    sites = [
        int(atom)
        for atom, (kx, ky), z in zip(members, map(tuple, keys), pos[:, 2])
        if z >= heights[(int(kx), int(ky))] - depth
    ]
    return frozenset(sites)


def effective_time(n_sim: float, n_ref: float, t_sim: float) -> float:
    """Effective exposure time t_sim * n_sim / n_ref (same unit as t_sim).

    A simulation loaded with n_sim gas molecules where the reference pressure
    corresponds to n_ref molecules in the same volume runs effectively
    n_sim / n_ref times longer than its wall-clock trajectory.
    """
    if not n_ref > 0:
        raise ValueError(f"reference molecule count must be positive, got {n_ref}")
    return t_sim * n_sim / n_ref


def ideal_gas_count(pressure: float, volume: float, temperature: float) -> float:
    """Ideal-gas molecule count N = P V / (k_B T); volume in A^3, pressure in Pa.

    Note: for 1500 Pa in the 34.17 x 34.17 x 78.26 A^3 growth cell at 300 K
    this evaluates to ~3.31e-2, which differs from the 8.46e-3 reference
    count quoted for the same conditions in the gas-exposure bookkeeping
    (see README); both values are kept, neither is silently adjusted.
    """
    if not (pressure > 0 and volume > 0 and temperature > 0):
        raise ValueError("pressure, volume and temperature must all be positive")
    return pressure * (volume * 1e-30) / (BOLTZMANN_KB * temperature)
