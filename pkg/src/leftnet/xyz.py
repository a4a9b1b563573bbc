"""Multi-frame XYZ text format with optional per-atom force columns.

Frames look like::

    3
    energy=-1.25 optional free-form comment
    O  0.0 0.0 0.0   0.1 0.0 0.0
    H  0.9 0.0 0.0  -0.1 0.0 0.0
    H  0.0 0.9 0.0   0.0 0.0 0.0

The three trailing columns (force labels) are optional but must be used
consistently within a frame.  Floats are emitted with 17 significant
digits so write -> parse is lossless for float64.
"""

import math
import re
from dataclasses import dataclass

import numpy as np

from .datagen import PotentialSample
from .errors import ParseError, UnknownElement

ELEMENTS = (
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne",
    "Na", "Mg", "Al", "Si", "P", "S", "Cl", "Ar", "K", "Ca",
    "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn",
    "Ga", "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr",
    "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd", "In", "Sn",
    "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd",
    "Pm", "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb",
    "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt", "Au", "Hg",
    "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th",
    "Pa", "U", "Np", "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm",
    "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs", "Mt", "Ds",
    "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
)

SYMBOL_TO_Z = {sym: z for z, sym in enumerate(ELEMENTS, start=1)}

_ENERGY_KEY = re.compile(r"(?:^|\s)energy=(\S+)")


def symbol_for(z: int) -> str:
    if not 1 <= z <= len(ELEMENTS):
        raise UnknownElement(f"no element with atomic number {z}")
    return ELEMENTS[z - 1]


@dataclass(frozen=True)
class XyzFrameRecord:
    """One molecule: geometry plus optional energy/force labels."""

    atomic_numbers: tuple[int, ...]
    positions: np.ndarray  # (n, 3), Å
    energy: float | None = None
    forces: np.ndarray | None = None  # (n, 3) or None
    comment: str = ""

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        object.__setattr__(self, "positions", pos)
        n = len(self.atomic_numbers)
        if pos.shape != (n, 3):
            raise ValueError(f"positions shape {pos.shape} != ({n}, 3)")
        if not np.all(np.isfinite(pos)):
            raise ValueError("non-finite coordinates")
        if self.forces is not None:
            f = np.asarray(self.forces, dtype=float)
            object.__setattr__(self, "forces", f)
            if f.shape != (n, 3):
                raise ValueError(f"forces shape {f.shape} != ({n}, 3)")
            if not np.all(np.isfinite(f)):
                raise ValueError("non-finite forces")

    @property
    def num_atoms(self) -> int:
        return len(self.atomic_numbers)


def _parse_float(token: str, what: str, line_no: int) -> float:
    try:
        value = float(token)
    except ValueError:
        raise ParseError(f"bad {what} {token!r}", line_no) from None
    if not math.isfinite(value):
        raise ParseError(f"non-finite {what} {token!r}", line_no)
    return value


def _parse_comment(comment: str, line_no: int) -> float | None:
    m = _ENERGY_KEY.search(comment)
    if m is None:
        return None
    return _parse_float(m.group(1), "energy", line_no)


def parse_xyz(text: str) -> list[XyzFrameRecord]:
    """Parse concatenated XYZ frames; raises ParseError/UnknownElement."""
    lines = text.splitlines()
    frames: list[XyzFrameRecord] = []
    k = 0
    while True:
        # frames may be separated by stray blank lines
        while k < len(lines) and not lines[k].strip():
            k += 1
        if k >= len(lines):
            return frames
        count_no = k + 1
        try:
            n_atoms = int(lines[k].strip())
        except ValueError:
            raise ParseError(
                f"expected atom count, got {lines[k].strip()!r}",
                count_no) from None
        if n_atoms < 1:
            raise ParseError(f"atom count must be >= 1, got {n_atoms}",
                             count_no)
        if k + 1 >= len(lines):
            raise ParseError("missing comment line", count_no)
        comment = lines[k + 1].strip()
        energy = _parse_comment(comment, k + 2)
        body = lines[k + 2:k + 2 + n_atoms]
        if len(body) < n_atoms:
            raise ParseError(
                f"frame declares {n_atoms} atoms but only "
                f"{len(body)} atom lines remain", count_no)
        numbers, coords, forces = [], [], []
        with_forces: bool | None = None
        for offset, raw in enumerate(body):
            line_no = k + 3 + offset
            parts = raw.split()
            if len(parts) not in (4, 7):
                raise ParseError(
                    f"expected 'symbol x y z [fx fy fz]', got {len(parts)} "
                    "fields", line_no)
            has_f = len(parts) == 7
            if with_forces is None:
                with_forces = has_f
            elif with_forces != has_f:
                raise ParseError("inconsistent force columns within a frame",
                                 line_no)
            sym = parts[0].capitalize()
            if sym not in SYMBOL_TO_Z:
                raise UnknownElement(f"unknown element symbol {parts[0]!r}",
                                     line_no)
            numbers.append(SYMBOL_TO_Z[sym])
            coords.append([_parse_float(t, "coordinate", line_no)
                           for t in parts[1:4]])
            if has_f:
                forces.append([_parse_float(t, "force", line_no)
                               for t in parts[4:7]])
        frames.append(XyzFrameRecord(
            atomic_numbers=tuple(numbers),
            positions=np.asarray(coords, dtype=float),
            energy=energy,
            forces=np.asarray(forces, dtype=float) if with_forces else None,
            comment=comment))
        k += 2 + n_atoms


def format_xyz(frames: list[XyzFrameRecord]) -> str:
    """Inverse of parse_xyz up to whitespace (floats are %.17g)."""
    out: list[str] = []
    for frame in frames:
        out.append(str(frame.num_atoms))
        comment = frame.comment
        if frame.energy is not None and "energy=" not in comment:
            tag = f"energy={frame.energy:.17g}"
            comment = f"{tag} {comment}".strip()
        out.append(comment)
        for i, z in enumerate(frame.atomic_numbers):
            cols = [f"{symbol_for(z):2s}"]
            cols += [f"{v:.17g}" for v in frame.positions[i]]
            if frame.forces is not None:
                cols += [f"{v:.17g}" for v in frame.forces[i]]
            out.append(" ".join(cols))
    return "\n".join(out) + "\n"


def sample_to_frame(sample: PotentialSample) -> XyzFrameRecord:
    return XyzFrameRecord(atomic_numbers=tuple(sample.atomic_numbers),
                          positions=sample.positions,
                          energy=sample.energy,
                          forces=sample.forces)
