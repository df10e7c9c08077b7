"""End-to-end orchestration shared by the CLI and the session service.

One PipelineConfig carries every tunable; the stage functions wire the
module operations together with batch-mode defaults (top-ranked candidate,
top-3 relations per dimension, evenly spaced grid picks).
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields
from typing import Callable, Mapping, Sequence

from . import scaffold as scaffolding
from .backends import Backends, StyleVariant
from .backends.fixtures import RELATION_FIXTURE_SOURCE, RELATION_TABLE
from .errors import BackendUnavailable, InvalidConfig
from .grid import IconGrid, GridExport, assemble_grid, export_grid, restyle_grid
from .ideation import Concept, IdeationState, run_ideation
from .imaging import Raster
from .layering import LayeredIcon, build_layered_icon
from .scaffold import (
    ExemplarResult,
    PromptChain,
    Scaffold,
    SemanticRelation,
    View,
    build_prompt_chain,
    build_scaffold,
    default_selections,
    generate_exemplar_chain,
)
from .selection import ClusteringResult, ScatterExport, export_scatter, select_representatives
from .simplification import SimplificationSequence, run_simplification


@dataclass(frozen=True)
class PipelineConfig:
    delta: int = 5                 # checkpoint interval in simplifier steps
    epsilon: float = 0.02          # plateau threshold on checkpoint distances
    stable_required: int = 2       # consecutive quiet checkpoints before the gate
    max_steps: int = 200
    k: int = 9                     # clusters for representative selection
    columns: int = 3
    alpha: float = 0.5             # layer transparency
    seed: int = 42
    max_iterations: int = 5        # ideation rounds
    threshold: int = 128           # binarization cut
    bucket_cap: int = 12

    def __post_init__(self):
        checks = [
            (self.delta >= 1, "delta must be >= 1"),
            (self.epsilon > 0, "epsilon must be > 0"),
            (self.stable_required >= 1, "stable_required must be >= 1"),
            (self.max_steps >= self.delta, "max_steps must be >= delta"),
            (self.k >= 1, "k must be >= 1"),
            (1 <= self.columns <= 9, "columns must be in 1..9"),
            (0.0 <= self.alpha <= 1.0, "alpha must be in [0, 1]"),
            (self.max_iterations >= 1, "max_iterations must be >= 1"),
            (0 <= self.threshold <= 255, "threshold must be in 0..255"),
            (self.bucket_cap >= 1, "bucket_cap must be >= 1"),
        ]
        for ok, message in checks:
            if not ok:
                raise InvalidConfig(message)

    @classmethod
    def from_overrides(cls, overrides: Mapping | None = None) -> "PipelineConfig":
        overrides = dict(overrides or {})
        known = {f.name: f.type for f in fields(cls)}
        unknown = sorted(set(overrides) - set(known))
        if unknown:
            raise InvalidConfig(f"unknown config keys: {unknown}")
        coerced = {}
        for name, value in overrides.items():
            caster = float if name in ("epsilon", "alpha") else int
            try:
                coerced[name] = caster(value)
            except (TypeError, ValueError) as exc:
                raise InvalidConfig(f"bad value for {name}: {value!r}") from exc
        try:
            return cls(**coerced)
        except TypeError as exc:
            raise InvalidConfig(str(exc)) from exc

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


RelationProvider = Callable[[str], list[SemanticRelation]]


def fixture_relations(label: str) -> list[SemanticRelation]:
    """Offline relation source backed by the fixture tables."""
    rows = RELATION_TABLE.get(label.strip().lower(), [])
    return [
        SemanticRelation(subject=label.strip().lower(), relation=kind,
                         object=obj, source=RELATION_FIXTURE_SOURCE, weight=weight)
        for kind, obj, weight in rows
    ]


@dataclass
class PipelineResult:
    concept: Concept
    config: PipelineConfig
    ideation: IdeationState
    candidate: Concept
    scaffold: Scaffold
    chain: PromptChain
    exemplars: list[ExemplarResult]
    sequences: dict[View, SimplificationSequence] = field(default_factory=dict)
    clusterings: dict[View, ClusteringResult] = field(default_factory=dict)
    scatters: dict[View, ScatterExport] = field(default_factory=dict)
    layered: dict[View, list[tuple[int, LayeredIcon]]] = field(default_factory=dict)
    grid: IconGrid | None = None
    export: GridExport | None = None


def simplify_exemplar(image: Raster, backends: Backends,
                      config: PipelineConfig) -> SimplificationSequence:
    return run_simplification(
        image, backends, backends.perceptual_distance,
        checkpoint_interval=config.delta, epsilon=config.epsilon,
        stable_required=config.stable_required, max_steps=config.max_steps)


def cluster_sequence(seq: SimplificationSequence, backends: Backends,
                     config: PipelineConfig
                     ) -> tuple[ClusteringResult, ScatterExport]:
    features = [backends.extract_features(image) for _, image in seq.frames]
    clustering = select_representatives(seq, features, k=config.k, seed=config.seed)
    scatter = export_scatter(clustering, features,
                             steps=[step for step, _ in seq.frames])
    return clustering, scatter


def layer_representatives(seq: SimplificationSequence,
                          clustering: ClusteringResult,
                          backends: Backends,
                          config: PipelineConfig,
                          steps: Sequence[int] | None = None
                          ) -> list[tuple[int, LayeredIcon]]:
    """Layered icons for the representative frames (or explicit steps)."""
    if steps is None:
        chosen = [seq.frames[index][0] for index in clustering.representatives]
    else:
        chosen = sorted(int(s) for s in steps)
    out = []
    for step in chosen:
        icon = build_layered_icon(seq.frame_at(step), backends, alpha=config.alpha)
        out.append((step, icon))
    return out


def parse_styles(names: Sequence[str] | None) -> set[StyleVariant]:
    if not names:
        return {StyleVariant.OUTLINE}
    try:
        return {StyleVariant(name.strip().lower()) for name in names if name.strip()}
    except ValueError as exc:
        raise InvalidConfig(f"unknown style variant: {exc}") from exc


def run_pipeline(concept_label: str,
                 config: PipelineConfig,
                 backends: Backends,
                 relations: RelationProvider = fixture_relations,
                 styles: set[StyleVariant] | None = None,
                 candidate_label: str | None = None,
                 selections: Mapping[View, Sequence[SemanticRelation]] | None = None,
                 picks: Mapping[View, Sequence[int]] | None = None) -> PipelineResult:
    """Full batch run: ideate, scaffold, generate, simplify, cluster,
    layer, assemble, restyle, export."""
    styles = styles or {StyleVariant.OUTLINE}
    concept = Concept(label=concept_label)
    state = run_ideation(concept, backends, backends,
                         max_iterations=config.max_iterations)
    if candidate_label is None:
        candidate = state.pool[0].concept
    else:
        wanted = candidate_label.strip().lower()
        matches = [e.concept for e in state.pool if e.concept.label == wanted]
        if not matches:
            raise InvalidConfig(f"candidate {candidate_label!r} is not in the ranked pool")
        candidate = matches[0]
    built_scaffold = build_scaffold(candidate, relations(candidate.label),
                                    cap=config.bucket_cap)
    chain = build_prompt_chain(
        built_scaffold,
        selections if selections is not None else default_selections(built_scaffold))
    exemplars = generate_exemplar_chain(chain, backends)
    failed = [r for r in exemplars if not r.ok]
    if failed:
        raise BackendUnavailable(
            f"exemplar generation failed at {failed[0].view.value}: {failed[0].error}")
    result = PipelineResult(concept=concept, config=config, ideation=state,
                            candidate=candidate, scaffold=built_scaffold,
                            chain=chain, exemplars=exemplars)
    for exemplar in exemplars:
        seq = simplify_exemplar(exemplar.image, backends, config)
        if not seq.complete:
            raise BackendUnavailable(
                f"simplification failed for {exemplar.view.value}: {seq.error}")
        clustering, scatter = cluster_sequence(seq, backends, config)
        result.sequences[exemplar.view] = seq
        result.clusterings[exemplar.view] = clustering
        result.scatters[exemplar.view] = scatter
        view_picks = picks.get(exemplar.view) if picks else None
        result.layered[exemplar.view] = layer_representatives(
            seq, clustering, backends, config, steps=view_picks)
    grid = assemble_grid(result.layered, columns=config.columns, picks=picks,
                         concept=concept.label)
    grid = restyle_grid(grid, styles, backends)
    result.grid = grid
    result.export = export_grid(grid, styles)
    return result
