"""Attribute taxonomy: static properties, states and affordances."""
from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, Optional


class AttributeKind(str, Enum):
    STATIC = "static"
    STATE = "state"
    AFFORDANCE = "affordance"


# Token -> category. Tokens not listed have no category.
ATTRIBUTE_CATEGORIES: Dict[str, str] = {
    # colors
    "black": "color", "brown": "color", "red": "color", "green": "color",
    "blue": "color", "yellow": "color", "white": "color",
    # shapes
    "rectangular": "shape", "round": "shape", "cylindrical": "shape",
    "square": "shape", "flat": "shape", "L-shaped": "shape",
    # materials
    "wooden": "material", "metal": "material", "plastic": "material",
    "glass": "material", "fabric": "material", "ceramic": "material",
    "paper": "material", "stone": "material", "leather": "material",
    # states
    "open": "state", "closed": "state", "on": "state", "off": "state",
    "full": "state", "empty": "state", "tidy": "state", "messy": "state",
    # affordances
    "sitting": "affordance", "lying": "affordance", "placing items on": "affordance",
    "opening": "affordance", "closing": "affordance", "turning on": "affordance",
    "turning off": "affordance", "filling": "affordance", "emptying": "affordance",
    "storing": "affordance", "walking on": "affordance",
}

# Ordinal brightness, darkest first.
BRIGHTNESS_RANK: Dict[str, int] = {
    "black": 0, "brown": 1, "red": 2, "green": 3, "blue": 4, "yellow": 5, "white": 6,
}

# State token -> affordances it enables.
STATE_AFFORDANCES: Dict[str, FrozenSet[str]] = {
    "closed": frozenset({"opening"}),
    "open": frozenset({"closing", "storing"}),
    "off": frozenset({"turning on"}),
    "on": frozenset({"turning off"}),
    "empty": frozenset({"filling"}),
    "full": frozenset({"emptying"}),
}

# Class -> affordances that hold in every state.
CLASS_AFFORDANCES: Dict[str, FrozenSet[str]] = {
    "chair": frozenset({"sitting"}),
    "couch": frozenset({"sitting", "lying"}),
    "bed": frozenset({"lying", "sitting"}),
    "table": frozenset({"placing items on"}),
    "desk": frozenset({"placing items on"}),
    "cabinet": frozenset({"placing items on"}),
    "shelf": frozenset({"placing items on"}),
    "floor": frozenset({"walking on"}),
}


@dataclass(frozen=True, order=True)
class Attribute:
    """A semantic label attached to a node."""
    kind: AttributeKind
    name: str

    def __post_init__(self):
        object.__setattr__(self, "kind", AttributeKind(self.kind))

    @property
    def category(self) -> Optional[str]:
        return ATTRIBUTE_CATEGORIES.get(self.name)

    @classmethod
    def static(cls, name: str) -> "Attribute":
        return cls(AttributeKind.STATIC, name)

    @classmethod
    def state(cls, name: str) -> "Attribute":
        return cls(AttributeKind.STATE, name)

    @classmethod
    def affordance(cls, name: str) -> "Attribute":
        return cls(AttributeKind.AFFORDANCE, name)


def attribute_of_category(attributes: Iterable[Attribute], category: str) -> Optional[str]:
    """Return the first attribute name of the given category, sorted for determinism."""
    names = sorted(a.name for a in attributes if a.category == category)
    return names[0] if names else None


def derive_affordances(label: str, attributes: Iterable[Attribute]) -> FrozenSet[Attribute]:
    """Affordances of a ``label`` instance given its current states."""
    names = set(CLASS_AFFORDANCES.get(label, frozenset()))
    for attribute in attributes:
        if attribute.kind is AttributeKind.STATE:
            names |= STATE_AFFORDANCES.get(attribute.name, frozenset())
    return frozenset(Attribute.affordance(n) for n in names)


def with_affordances(label: str, attributes: Iterable[Attribute]) -> FrozenSet[Attribute]:
    """Replace any affordances in ``attributes`` with ones derived from the states."""
    kept = frozenset(a for a in attributes if a.kind is not AttributeKind.AFFORDANCE)
    return kept | derive_affordances(label, kept)
