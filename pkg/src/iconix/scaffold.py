"""Semantic scaffold: relations bucketed into three dimensions, plus the
chained three-step prompt plan that drives exemplar generation."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

from .errors import BackendUnavailable, SelectionOutOfBucket, SubjectMismatch
from .ideation import Concept
from .imaging import Raster

# Per-dimension cap keeps the tree view legible.
BUCKET_CAP = 12


class RelationKind(Enum):
    HYPERNYM = "hypernym"
    HYPONYM = "hyponym"
    SYNONYM = "synonym"
    KIND_OF = "kind_of"
    INSTANCE_OF = "instance_of"
    PART_OF = "part_of"
    ATTRIBUTE_OF = "attribute_of"
    USED_FOR = "used_for"
    AT_LOCATION = "at_location"
    RELATED_TO = "related_to"
    SYMBOL_OF = "symbol_of"
    SIMILAR_TO = "similar_to"


class Dimension(Enum):
    TAXONOMIC = "taxonomic"
    CONSTITUTIVE = "constitutive"
    ASSOCIATIVE = "associative"


class RelationSource(Enum):
    CONCEPTNET = "conceptnet"
    LEXICON = "lexicon"
    WIKIDATA = "wikidata"


# Hierarchy -> taxonomic; parts and intrinsic properties -> constitutive;
# function, location and thematic links -> associative.
_DIMENSION_BY_KIND = {
    RelationKind.HYPERNYM: Dimension.TAXONOMIC,
    RelationKind.HYPONYM: Dimension.TAXONOMIC,
    RelationKind.SYNONYM: Dimension.TAXONOMIC,
    RelationKind.KIND_OF: Dimension.TAXONOMIC,
    RelationKind.INSTANCE_OF: Dimension.TAXONOMIC,
    RelationKind.PART_OF: Dimension.CONSTITUTIVE,
    RelationKind.ATTRIBUTE_OF: Dimension.CONSTITUTIVE,
    RelationKind.USED_FOR: Dimension.ASSOCIATIVE,
    RelationKind.AT_LOCATION: Dimension.ASSOCIATIVE,
    RelationKind.RELATED_TO: Dimension.ASSOCIATIVE,
    RelationKind.SYMBOL_OF: Dimension.ASSOCIATIVE,
    RelationKind.SIMILAR_TO: Dimension.ASSOCIATIVE,
}


def classify_relation(relation: RelationKind) -> Dimension:
    """Total mapping from relation kind to semantic dimension."""
    return _DIMENSION_BY_KIND[relation]


@dataclass(frozen=True)
class SemanticRelation:
    """Center-centric relation: `object` is what the subject relates to
    (for PART_OF the object is the part)."""

    subject: str
    relation: RelationKind
    object: str
    source: RelationSource = RelationSource.CONCEPTNET
    weight: float = 1.0

    def __post_init__(self):
        if self.subject.strip().lower() == self.object.strip().lower():
            raise ValueError(f"self-relation on {self.subject!r}")
        if self.weight < 0:
            raise ValueError(f"relation weight must be >= 0, got {self.weight}")


@dataclass
class Scaffold:
    center: Concept
    taxonomic: list[SemanticRelation] = field(default_factory=list)
    constitutive: list[SemanticRelation] = field(default_factory=list)
    associative: list[SemanticRelation] = field(default_factory=list)

    def bucket(self, dimension: Dimension) -> list[SemanticRelation]:
        return {
            Dimension.TAXONOMIC: self.taxonomic,
            Dimension.CONSTITUTIVE: self.constitutive,
            Dimension.ASSOCIATIVE: self.associative,
        }[dimension]


def build_scaffold(center: Concept, relations: Sequence[SemanticRelation],
                   cap: int = BUCKET_CAP) -> Scaffold:
    """Dedup, bucket, sort by weight and truncate the center's relations."""
    deduped: dict[tuple[RelationKind, str], SemanticRelation] = {}
    for rel in relations:
        if rel.subject.strip().lower() != center.label:
            raise SubjectMismatch(
                f"relation subject {rel.subject!r} != center {center.label!r}")
        key = (rel.relation, rel.object.strip().lower())
        kept = deduped.get(key)
        if kept is None or rel.weight > kept.weight:
            deduped[key] = rel
    scaffold = Scaffold(center=center)
    for rel in deduped.values():
        scaffold.bucket(classify_relation(rel.relation)).append(rel)
    for dimension in Dimension:
        bucket = scaffold.bucket(dimension)
        bucket.sort(key=lambda r: (-r.weight, r.object))
        del bucket[cap:]
    return scaffold


class View(Enum):
    COMPARATIVE = "comparative"
    MICROSCOPIC = "microscopic"
    MACROSCOPIC = "macroscopic"


VIEW_ORDER = (View.COMPARATIVE, View.MICROSCOPIC, View.MACROSCOPIC)

# Each view draws its selectable relations from exactly one dimension.
VIEW_DIMENSION = {
    View.COMPARATIVE: Dimension.TAXONOMIC,
    View.MICROSCOPIC: Dimension.CONSTITUTIVE,
    View.MACROSCOPIC: Dimension.ASSOCIATIVE,
}

# Fixed prompt templates; the selected relation objects are spliced in
# verbatim. The base clause alone is used when nothing is selected.
_PROMPT_CLAUSES = {
    View.COMPARATIVE: "of the kind",
    View.MICROSCOPIC: "depict parts",
    View.MACROSCOPIC: "set in context",
}


@dataclass(frozen=True)
class PromptStep:
    view: View
    prompt: str
    selected_relations: tuple[SemanticRelation, ...]
    conditions_on: int | None


@dataclass(frozen=True)
class PromptChain:
    steps: tuple[PromptStep, PromptStep, PromptStep]

    def __post_init__(self):
        if tuple(s.view for s in self.steps) != VIEW_ORDER:
            raise ValueError("prompt chain steps must follow the fixed view order")
        for index, step in enumerate(self.steps):
            expected = None if index == 0 else index - 1
            if step.conditions_on != expected:
                raise ValueError(f"step {index} must condition on {expected}")
            if not step.prompt:
                raise ValueError("prompts must be non-empty")


def render_prompt(center: Concept, view: View,
                  selected: Sequence[SemanticRelation]) -> str:
    base = f"a clean icon-style illustration of {center.label}"
    if not selected:
        return base
    objects = ", ".join(rel.object for rel in selected)
    return f"{base}; {_PROMPT_CLAUSES[view]}: {objects}"


def build_prompt_chain(scaffold: Scaffold,
                       selections: Mapping[View, Sequence[SemanticRelation]] | None = None,
                       prompt_edits: Mapping[View, str] | None = None) -> PromptChain:
    """Three chained prompts, one per view, each conditioning on the last.

    Selections must come from the bucket the view operationalizes.
    `prompt_edits` lets a caller replace a rendered prompt wholesale.
    """
    selections = selections or {}
    prompt_edits = prompt_edits or {}
    steps = []
    for index, view in enumerate(VIEW_ORDER):
        bucket = scaffold.bucket(VIEW_DIMENSION[view])
        chosen = tuple(selections.get(view, ()))
        for rel in chosen:
            if rel not in bucket:
                raise SelectionOutOfBucket(
                    f"{rel.relation.value}:{rel.object!r} is not in the "
                    f"{VIEW_DIMENSION[view].value} bucket required by {view.value}")
        prompt = prompt_edits.get(view) or render_prompt(scaffold.center, view, chosen)
        steps.append(PromptStep(view=view, prompt=prompt, selected_relations=chosen,
                                conditions_on=None if index == 0 else index - 1))
    return PromptChain(steps=(steps[0], steps[1], steps[2]))


def default_selections(scaffold: Scaffold, per_view: int = 3
                       ) -> dict[View, list[SemanticRelation]]:
    """Batch-mode fallback: top relations by weight from each bucket."""
    return {view: scaffold.bucket(VIEW_DIMENSION[view])[:per_view]
            for view in VIEW_ORDER}


@dataclass
class ExemplarResult:
    view: View
    image: Raster | None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.image is not None and self.error is None


def generate_exemplar_chain(chain: PromptChain, gen) -> list[ExemplarResult]:
    """Generate the three exemplars; steps 1-2 condition on the previous image.

    On backend failure the completed steps are returned and the remaining
    ones are marked failed.
    """
    results: list[ExemplarResult] = []
    condition: Raster | None = None
    failed: str | None = None
    for step in chain.steps:
        if failed is not None:
            results.append(ExemplarResult(view=step.view, image=None, error=failed))
            continue
        try:
            image = gen.generate(step.prompt, condition)
        except BackendUnavailable as exc:
            failed = str(exc) or "backend unavailable"
            results.append(ExemplarResult(view=step.view, image=None, error=failed))
            continue
        results.append(ExemplarResult(view=step.view, image=image))
        condition = image
    return results


def scaffold_to_json(scaffold: Scaffold) -> dict:
    def bucket_json(bucket: list[SemanticRelation]) -> list[dict]:
        return [
            {"relation": r.relation.value, "object": r.object,
             "weight": r.weight, "source": r.source.value}
            for r in bucket
        ]

    return {
        "center": scaffold.center.label,
        "taxonomic": bucket_json(scaffold.taxonomic),
        "constitutive": bucket_json(scaffold.constitutive),
        "associative": bucket_json(scaffold.associative),
    }


def chain_to_json(chain: PromptChain) -> dict:
    return {
        "steps": [
            {
                "view": step.view.value,
                "prompt": step.prompt,
                "selected_relations": [
                    {"relation": r.relation.value, "object": r.object,
                     "weight": r.weight, "source": r.source.value}
                    for r in step.selected_relations
                ],
                "conditions_on": step.conditions_on,
            }
            for step in chain.steps
        ]
    }


# ConceptNet edge labels -> relation kinds; unmapped kinds are dropped.
CONCEPTNET_RELATION_MAP = {
    "/r/IsA": RelationKind.KIND_OF,
    "/r/InstanceOf": RelationKind.INSTANCE_OF,
    "/r/PartOf": RelationKind.PART_OF,
    "/r/HasA": RelationKind.PART_OF,
    "/r/HasProperty": RelationKind.ATTRIBUTE_OF,
    "/r/UsedFor": RelationKind.USED_FOR,
    "/r/AtLocation": RelationKind.AT_LOCATION,
    "/r/RelatedTo": RelationKind.RELATED_TO,
    "/r/SymbolOf": RelationKind.SYMBOL_OF,
    "/r/Synonym": RelationKind.SYNONYM,
    "/r/SimilarTo": RelationKind.SIMILAR_TO,
}


def conceptnet_edges_to_relations(center_label: str, edges: Sequence[dict]
                                  ) -> list[SemanticRelation]:
    """Adapt ConceptNet /query edges to center-centric relations.

    Edges pointing at the center are inverted for part-whole so the object
    is always the part. Self-loops and unmapped relations are dropped.
    """
    center = center_label.strip().lower()
    out: list[SemanticRelation] = []
    for edge in edges:
        kind = CONCEPTNET_RELATION_MAP.get(edge.get("rel", {}).get("@id", ""))
        if kind is None:
            continue
        start = edge.get("start", {}).get("label", "").strip().lower()
        end = edge.get("end", {}).get("label", "").strip().lower()
        weight = float(edge.get("weight", 1.0))
        if start == center and end and end != center:
            other = end
        elif end == center and start and start != center and kind is RelationKind.PART_OF:
            other = start
        else:
            continue
        out.append(SemanticRelation(subject=center, relation=kind, object=other,
                                    source=RelationSource.CONCEPTNET, weight=weight))
    return out


def wikidata_relations(center_label: str) -> list[SemanticRelation]:
    """Stub for the optional Wikidata SPARQL source; returns nothing."""
    return []
