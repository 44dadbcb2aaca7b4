"""Per-class size, shape and attribute priors for synthetic scenes."""
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Tuple

from ssg_toolkit.core.hierarchy import load_hypernyms

Range = Tuple[float, float]

HYPERNYM_FILE = Path(__file__).parent / "data" / "hypernyms.tsv"

FLOOR = "floor"
SURFACE = "surface"
WALL = "wall"
STRUCTURE = "structure"


@dataclass(frozen=True)
class ClassPrior:
    """How instances of one class are shaped, placed and described."""
    name: str
    primitive: str
    placement: str
    width: Range = (0.5, 0.5)
    depth: Range = (0.5, 0.5)
    height: Range = (0.5, 0.5)
    supports: bool = False
    colors: Tuple[str, ...] = ()
    materials: Tuple[str, ...] = ()
    shapes: Tuple[str, ...] = ()
    states: Tuple[str, ...] = ()


# Order matters: a vocabulary of size k uses the first k entries.
CLASS_PRIORS: Tuple[ClassPrior, ...] = (
    ClassPrior("floor", "plane", STRUCTURE, colors=("brown", "white"), materials=("wooden", "stone")),
    ClassPrior("wall", "box", STRUCTURE, colors=("white", "yellow"), materials=("stone",)),
    ClassPrior("table", "table", FLOOR, (0.9, 1.4), (0.6, 0.9), (0.7, 0.78), True,
               ("brown", "white", "black"), ("wooden", "metal", "glass"), ("rectangular",)),
    ClassPrior("chair", "chair", FLOOR, (0.42, 0.5), (0.42, 0.5), (0.85, 1.0), False,
               ("black", "brown", "red", "blue"), ("wooden", "metal", "plastic"), ("square",)),
    ClassPrior("cabinet", "box", FLOOR, (0.6, 1.0), (0.4, 0.55), (0.8, 1.0), True,
               ("white", "brown"), ("wooden", "metal"), ("rectangular",), ("open", "closed")),
    ClassPrior("couch", "box", FLOOR, (1.6, 2.0), (0.8, 0.95), (0.4, 0.45), True,
               ("blue", "green", "red", "black"), ("fabric", "leather"), ("rectangular", "L-shaped")),
    ClassPrior("cup", "cylinder", SURFACE, (0.07, 0.09), (0.07, 0.09), (0.09, 0.12), False,
               ("white", "red", "blue"), ("ceramic", "glass"), ("cylindrical",), ("full", "empty")),
    ClassPrior("bottle", "cylinder", SURFACE, (0.07, 0.09), (0.07, 0.09), (0.25, 0.32), False,
               ("green", "blue", "white"), ("glass", "plastic"), ("cylindrical",), ("full", "empty")),
    ClassPrior("book", "box", SURFACE, (0.15, 0.22), (0.2, 0.28), (0.02, 0.05), False,
               ("red", "blue", "green", "yellow"), ("paper",), ("rectangular",)),
    ClassPrior("picture", "box", WALL, (0.4, 0.8), (0.02, 0.03), (0.3, 0.5), False,
               ("black", "white", "brown"), ("wooden", "glass"), ("rectangular", "square")),
    ClassPrior("pillow", "box", SURFACE, (0.35, 0.45), (0.35, 0.45), (0.1, 0.15), False,
               ("white", "yellow", "red", "blue"), ("fabric",), ("square",)),
    ClassPrior("box", "box", SURFACE, (0.2, 0.35), (0.2, 0.3), (0.15, 0.25), False,
               ("brown", "white"), ("paper", "plastic"), ("rectangular",), ("open", "closed")),
    ClassPrior("lamp", "cylinder", SURFACE, (0.15, 0.2), (0.15, 0.2), (0.35, 0.5), False,
               ("white", "black"), ("metal", "glass"), ("cylindrical",), ("on", "off")),
    ClassPrior("bag", "box", FLOOR, (0.3, 0.45), (0.15, 0.25), (0.3, 0.45), False,
               ("black", "brown", "red"), ("fabric", "leather"), ("rectangular",), ("full", "empty")),
    ClassPrior("desk", "table", FLOOR, (1.0, 1.4), (0.6, 0.75), (0.72, 0.76), True,
               ("white", "brown", "black"), ("wooden", "metal"), ("rectangular", "L-shaped")),
    ClassPrior("bed", "box", FLOOR, (1.4, 1.8), (1.9, 2.1), (0.45, 0.55), True,
               ("white", "blue"), ("fabric", "wooden"), ("rectangular",), ("tidy", "messy")),
    ClassPrior("shelf", "box", FLOOR, (0.6, 1.0), (0.3, 0.4), (1.6, 2.0), True,
               ("white", "brown", "black"), ("wooden", "metal"), ("rectangular",)),
    ClassPrior("plant", "cylinder", FLOOR, (0.3, 0.45), (0.3, 0.45), (0.6, 1.2), False,
               ("green",), ("ceramic", "plastic"), ("round",)),
    ClassPrior("bowl", "cylinder", SURFACE, (0.15, 0.18), (0.15, 0.18), (0.09, 0.12), False,
               ("white", "blue", "red"), ("ceramic", "glass"), ("round",), ("full", "empty")),
    ClassPrior("tv", "box", WALL, (0.8, 1.2), (0.04, 0.06), (0.5, 0.7), False,
               ("black",), ("plastic", "metal"), ("flat",), ("on", "off")),
)

PRIORS_BY_NAME: Dict[str, ClassPrior] = {p.name: p for p in CLASS_PRIORS}


def builtin_hypernyms() -> Dict[str, str]:
    return load_hypernyms(HYPERNYM_FILE)
