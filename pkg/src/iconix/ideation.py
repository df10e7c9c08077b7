"""Multi-round concept ideation: expand, score, filter, rank.

Turns one input concept into a ranked list of concrete, visualizable
candidates via a searching / evaluation / reasoning loop that stops when
the top-5 stabilizes or the iteration cap is reached.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .errors import BackendUnavailable, EmptyPool

MAX_ITERATIONS = 5
TOP_SET_SIZE = 5

# Inclusive score ranges per psycholinguistic attribute.
SCALE_BOUNDS = {
    "concreteness": (1, 5),
    "familiarity": (1, 7),
    "imageability": (1, 7),
    "meaningfulness": (1, 9),
}

# Retention thresholds: high visual recognizability plus strong
# metaphorical connection.
CONCRETENESS_MIN = 4
FAMILIARITY_MIN = 5
IMAGEABILITY_MIN = 5
MEANINGFULNESS_MIN = 6


class ConceptSource(Enum):
    KNOWLEDGE_BASE = "knowledge_base"
    LANGUAGE_MODEL = "language_model"
    USER = "user"


class Category(Enum):
    CONCRETE_OBJECT = "concrete_object"
    ABSTRACT_NOUN = "abstract_noun"
    SUPERORDINATE_CATEGORY = "superordinate_category"
    INTANGIBLE_ACTION = "intangible_action"


@dataclass(frozen=True)
class Concept:
    label: str
    gloss: str = ""
    source: ConceptSource = ConceptSource.USER

    def __post_init__(self):
        normalized = self.label.strip().lower()
        if not normalized:
            raise ValueError("concept label must be non-empty")
        object.__setattr__(self, "label", normalized)


@dataclass(frozen=True)
class AttributeScores:
    concreteness: int
    familiarity: int
    imageability: int
    meaningfulness: int

    def __post_init__(self):
        for name, (lo, hi) in SCALE_BOUNDS.items():
            value = getattr(self, name)
            if not lo <= value <= hi:
                raise ValueError(f"{name}={value} outside {lo}..{hi}")

    def as_dict(self) -> dict:
        return {
            "c": self.concreteness,
            "f": self.familiarity,
            "i": self.imageability,
            "m": self.meaningfulness,
        }


def compute_aggregate(scores: AttributeScores) -> float:
    """Equal-weight mean of the four attributes, each min-max normalized
    to [0, 1] over its own scale.

    Evaluated as one integer numerator over 96 (the scales' common
    denominator) so mathematically equal aggregates compare exactly equal
    and ties break on the label, never on summation order.
    """
    numerator = (6 * (scores.concreteness - 1)
                 + 4 * (scores.familiarity - 1)
                 + 4 * (scores.imageability - 1)
                 + 3 * (scores.meaningfulness - 1))
    return numerator / 96.0


@dataclass(frozen=True)
class CandidateEntry:
    concept: Concept
    interpretation: str
    scores: AttributeScores
    category: Category
    aggregate: float

    def __post_init__(self):
        expected = compute_aggregate(self.scores)
        if abs(self.aggregate - expected) > 1e-9:
            raise ValueError(f"aggregate {self.aggregate} != recomputed {expected}")

    @classmethod
    def build(cls, concept: Concept, interpretation: str, scores: AttributeScores,
              category: Category) -> "CandidateEntry":
        return cls(concept=concept, interpretation=interpretation, scores=scores,
                   category=category, aggregate=compute_aggregate(scores))


@dataclass
class IdeationState:
    input: Concept
    iteration: int
    pool: list[CandidateEntry] = field(default_factory=list)
    top5_history: list[frozenset[str]] = field(default_factory=list)


def filter_constraints(pool: list[CandidateEntry]) -> list[CandidateEntry]:
    """Drop abstract nouns, superordinate categories and intangible actions."""
    return [e for e in pool if e.category is Category.CONCRETE_OBJECT]


def threshold_filter(pool: list[CandidateEntry]) -> list[CandidateEntry]:
    """Retain candidates clearing every attribute threshold."""
    return [
        e for e in pool
        if e.scores.concreteness >= CONCRETENESS_MIN
        and e.scores.familiarity >= FAMILIARITY_MIN
        and e.scores.imageability >= IMAGEABILITY_MIN
        and e.scores.meaningfulness >= MEANINGFULNESS_MIN
    ]


def aggregate_rank(pool: list[CandidateEntry]) -> list[CandidateEntry]:
    """Sort descending by aggregate score; ties break lexicographically."""
    return sorted(pool, key=lambda e: (-e.aggregate, e.concept.label))


def _rank_survivors(entries: list[CandidateEntry]) -> list[CandidateEntry]:
    return aggregate_rank(threshold_filter(filter_constraints(entries)))


def run_ideation(input_concept: Concept, expander, scorer,
                 max_iterations: int = MAX_ITERATIONS) -> IdeationState:
    """Run the expand/score/filter/rank loop until the top-5 stabilizes.

    `expander.expand_concepts(concept, known)` supplies new concepts;
    `scorer.score_attributes(candidate, base)` returns
    (AttributeScores, interpretation, Category). Each label is scored once
    and cached; low scorers never re-enter.
    """
    if max_iterations < 1:
        raise ValueError("max_iterations must be >= 1")
    scored: dict[str, CandidateEntry] = {}
    history: list[frozenset[str]] = []
    ranked: list[CandidateEntry] = []
    state = IdeationState(input=input_concept, iteration=0)
    for _ in range(max_iterations):
        known = set(scored) | {input_concept.label}
        try:
            fresh = expander.expand_concepts(input_concept, known)
            for concept in fresh:
                if concept.label in known:
                    continue
                scores, interpretation, category = scorer.score_attributes(
                    concept, input_concept)
                scored[concept.label] = CandidateEntry.build(
                    concept, interpretation, scores, category)
                known.add(concept.label)
        except BackendUnavailable as exc:
            exc.state = state
            raise
        ranked = _rank_survivors(list(scored.values()))
        top = frozenset(e.concept.label for e in ranked[:TOP_SET_SIZE])
        history.append(top)
        state = IdeationState(input=input_concept, iteration=len(history),
                              pool=ranked, top5_history=list(history))
        if len(history) >= 2 and history[-1] == history[-2]:
            break
    if not ranked:
        raise EmptyPool(
            f"no candidate for {input_concept.label!r} survived filtering",
            state=state)
    return state


def candidates_to_json(state: IdeationState) -> list[dict]:
    """Candidate table rows in rank order."""
    return [
        {
            "label": entry.concept.label,
            "gloss": entry.concept.gloss,
            "interpretation": entry.interpretation,
            "scores": entry.scores.as_dict(),
            "aggregate": entry.aggregate,
            "rank": rank,
        }
        for rank, entry in enumerate(state.pool, start=1)
    ]
