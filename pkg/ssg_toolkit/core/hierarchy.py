"""Class hierarchies derived from a hypernym map."""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Mapping, Tuple, Union

from ssg_toolkit.utils.errors import CyclicHierarchy, DataError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClassHierarchy:
    """Ordered class labels, most specific first."""
    labels: Tuple[str, ...]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("ClassHierarchy needs at least one label")
        if len(set(self.labels)) != len(self.labels):
            raise ValueError(f"Repeated token in hierarchy {self.labels}")

    @property
    def label(self) -> str:
        """The annotated (most specific) class."""
        return self.labels[0]

    @property
    def depth(self) -> int:
        return len(self.labels)

    @classmethod
    def single(cls, label: str) -> "ClassHierarchy":
        return cls((label,))


def derive_hierarchy(label: str, hypernym_map: Mapping[str, str]) -> ClassHierarchy:
    """Follow hypernym links from ``label`` until a token without a parent."""
    chain = [label]
    seen = {label: 0}
    current = label
    while current in hypernym_map:
        current = hypernym_map[current]
        if current in seen:
            cycle = chain[seen[current]:] + [current]
            raise CyclicHierarchy(cycle)
        seen[current] = len(chain)
        chain.append(current)
    return ClassHierarchy(tuple(chain))


def load_hypernyms(path: Union[str, Path]) -> Dict[str, str]:
    """Parse a ``child<TAB>parent`` file into a hypernym map."""
    hypernyms: Dict[str, str] = {}
    text = Path(path).read_text(encoding="utf-8")
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in raw.split("\t") if p.strip()]
        if len(parts) != 2:
            raise DataError(f"{path}:{line_no}: expected 'child<TAB>parent', got {raw!r}")
        child, parent = parts
        if child in hypernyms and hypernyms[child] != parent:
            raise DataError(
                f"{path}:{line_no}: '{child}' already has parent '{hypernyms[child]}'"
            )
        hypernyms[child] = parent
    logger.info(f"Loaded {len(hypernyms)} hypernym links from {path}")
    return hypernyms
