"""Exception hierarchy for the scene graph toolkit."""


class SceneGraphError(Exception):
    """Base class for every error raised by the toolkit."""


class CyclicHierarchy(SceneGraphError):
    """The hypernym map contains a cycle."""

    def __init__(self, cycle):
        self.cycle = tuple(cycle)
        super().__init__(f"Cyclic hypernym chain: {' -> '.join(self.cycle)}")


class UnknownNode(SceneGraphError):
    """A node id is not part of the graph."""


class UnknownInstance(SceneGraphError):
    """An instance id is not part of the scene."""


class DegeneratePair(SceneGraphError):
    """A pair query used the same instance twice."""


class EmptyPointSet(SceneGraphError):
    """An operation received a point set without points."""


class InfeasibleSpec(SceneGraphError):
    """Synthetic placement failed after the retry budget."""


class TooFewInstances(SceneGraphError):
    """The network needs at least two instances."""


class DomainError(SceneGraphError):
    """A numeric argument lies outside the function domain."""


class ShapeMismatch(SceneGraphError):
    """Scores and ground truth disagree in shape."""


class EmptyDataset(SceneGraphError):
    """Training was requested on an empty dataset."""


class EmptyIndex(SceneGraphError):
    """Retrieval was requested against an empty pool."""


class MissingGroundTruth(SceneGraphError):
    """A retrieval query has no ground-truth scene."""


class NoGroundTruthTriples(SceneGraphError):
    """Triplet recall is undefined for a graph without triples."""


class DataError(SceneGraphError):
    """An input file is malformed or inconsistent."""


class ConfigError(SceneGraphError):
    """Configuration validation failed."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("Invalid configuration:\n" + "\n".join(f"  {p}" for p in self.problems))
