"""Session-based pipeline service with on-disk persistence.

One directory per session (state.json + artifacts/<sha256>.png); the
artifact store is append-only and content-addressed. Stage transitions
only advance one step at a time, except explicit rollback-and-redo to an
earlier completed stage, which invalidates downstream snapshots.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping

from .backends import Backends, StyleVariant
from .errors import (
    CorruptStore,
    InvalidConfig,
    NonMonotonicPicks,
    NotFound,
    SelectionOutOfBucket,
    StageOrderViolation,
)
from .grid import assemble_grid, default_pick_ranks, export_grid, restyle_grid
from .ideation import Concept, candidates_to_json, run_ideation
from .imaging import Raster, decode_png, encode_mask_png, encode_png
from .layering import build_layered_icon, layer_manifest
from .pipeline import (
    PipelineConfig,
    RelationProvider,
    cluster_sequence,
    fixture_relations,
    simplify_exemplar,
)
from .scaffold import (
    RelationKind,
    RelationSource,
    SemanticRelation,
    VIEW_DIMENSION,
    View,
    build_prompt_chain,
    build_scaffold,
    chain_to_json,
    default_selections,
    generate_exemplar_chain,
    scaffold_to_json,
)
from .simplification import sequence_manifest


class Stage(Enum):
    CREATED = "created"
    IDEATED = "ideated"
    SCAFFOLDED = "scaffolded"
    EXEMPLARS_READY = "exemplars_ready"
    SIMPLIFIED = "simplified"
    GRID_READY = "grid_ready"


STAGE_ORDER = list(Stage)

# Requestable stages in pipeline order, with their snapshot keys.
REQUEST_STAGES = {
    Stage.IDEATED: "ideate",
    Stage.SCAFFOLDED: "scaffold",
    Stage.EXEMPLARS_READY: "exemplars",
    Stage.SIMPLIFIED: "simplify",
    Stage.GRID_READY: "grid",
}


def stage_index(stage: Stage) -> int:
    return STAGE_ORDER.index(stage)


class ArtifactStore:
    """Append-only content-addressed PNG store under one directory."""

    def __init__(self, root: Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)

    def path(self, ref: str) -> Path:
        return self.root / f"{ref}.png"

    def put_bytes(self, data: bytes) -> str:
        ref = hashlib.sha256(data).hexdigest()
        target = self.path(ref)
        if not target.exists():
            tmp = target.with_suffix(f".{uuid.uuid4().hex}.tmp")
            tmp.write_bytes(data)
            os.replace(tmp, target)
        return ref

    def put_raster(self, img: Raster) -> str:
        return self.put_bytes(encode_png(img))

    def get_bytes(self, ref: str) -> bytes:
        target = self.path(ref)
        if not target.exists():
            raise NotFound(f"artifact {ref} not found")
        data = target.read_bytes()
        if hashlib.sha256(data).hexdigest() != ref:
            raise CorruptStore(f"artifact {ref} fails its checksum")
        return data

    def get_raster(self, ref: str) -> Raster:
        return decode_png(self.get_bytes(ref))

    def refs(self) -> list[str]:
        return sorted(p.stem for p in self.root.glob("*.png"))


@dataclass
class Session:
    id: str
    stage: Stage
    config: PipelineConfig
    snapshots: dict[str, dict] = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "stage": self.stage.value,
            "config": self.config.to_dict(),
            "snapshots": self.snapshots,
        }


class SessionManager:
    """Owns session state, persistence and per-session serialization."""

    def __init__(self, root: Path | str, backends: Backends | None = None,
                 relations: RelationProvider = fixture_relations):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self.backends = backends or Backends.from_env()
        self.relations = relations
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()

    # -- plumbing ------------------------------------------------------------

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _session_dir(self, session_id: str) -> Path:
        return self.root / session_id

    def store_for(self, session_id: str) -> ArtifactStore:
        return ArtifactStore(self._session_dir(session_id) / "artifacts")

    def persist(self, session: Session) -> None:
        directory = self._session_dir(session.id)
        directory.mkdir(parents=True, exist_ok=True)
        tmp_path = directory / "state.json.tmp"
        tmp_path.write_text(json.dumps(session.to_json(), indent=2, sort_keys=True))
        os.replace(tmp_path, directory / "state.json")

    def load(self, session_id: str) -> Session:
        state_path = self._session_dir(session_id) / "state.json"
        if not state_path.exists():
            raise NotFound(f"session {session_id} not found")
        try:
            raw = json.loads(state_path.read_text())
            session = Session(
                id=raw["id"],
                stage=Stage(raw["stage"]),
                config=PipelineConfig.from_overrides(raw["config"]),
                snapshots=raw.get("snapshots", {}),
            )
        except (KeyError, ValueError, InvalidConfig) as exc:
            raise CorruptStore(f"session {session_id} state is unreadable: {exc}") from exc
        store = self.store_for(session_id)
        for ref in self._referenced_artifacts(session):
            store.get_bytes(ref)  # checksum verification
        return session

    @staticmethod
    def _referenced_artifacts(session: Session) -> set[str]:
        refs: set[str] = set()

        def walk(node):
            if isinstance(node, dict):
                for key, value in node.items():
                    if key.endswith("_ref") and isinstance(value, str) and len(value) == 64:
                        refs.add(value)
                    else:
                        walk(value)
            elif isinstance(node, list):
                for item in node:
                    walk(item)

        walk(session.snapshots)
        grid_snapshot = session.snapshots.get("grid", {})
        for entry in grid_snapshot.get("manifest", {}).get("cells", []):
            if isinstance(entry, dict) and "png_ref" in entry:
                refs.add(entry["png_ref"])
        refs.update(grid_snapshot.get("sheets", {}).values())
        return refs

    # -- public API ------------------------------------------------------------

    def create_session(self, overrides: Mapping | None = None) -> Session:
        config = PipelineConfig.from_overrides(overrides)
        session = Session(id=uuid.uuid4().hex, stage=Stage.CREATED, config=config)
        self.persist(session)
        with self._registry_lock:
            self._sessions[session.id] = session
        return session

    def get_session(self, session_id: str) -> Session:
        with self._registry_lock:
            cached = self._sessions.get(session_id)
        if cached is not None:
            return cached
        session = self.load(session_id)
        with self._registry_lock:
            self._sessions.setdefault(session_id, session)
        return session

    def session_json(self, session_id: str) -> dict:
        with self._lock_for(session_id):
            return json.loads(json.dumps(self.get_session(session_id).to_json()))

    def advance(self, session_id: str, target: Stage, payload: Mapping | None) -> Session:
        """Run one stage body under the session lock.

        The request must target stage+1 or an earlier completed stage
        (rollback-and-redo, which drops all downstream snapshots).
        """
        if target not in REQUEST_STAGES:
            raise StageOrderViolation(f"{target.value} is not a requestable stage")
        with self._lock_for(session_id):
            session = self.get_session(session_id)
            current = stage_index(session.stage)
            wanted = stage_index(target)
            if wanted > current + 1:
                raise StageOrderViolation(
                    f"cannot move from {session.stage.value} to {target.value}")
            runner = getattr(self, f"_run_{REQUEST_STAGES[target]}")
            snapshot = runner(session, dict(payload or {}))
            session.snapshots[REQUEST_STAGES[target]] = snapshot
            for stage in STAGE_ORDER[wanted + 1:]:
                session.snapshots.pop(REQUEST_STAGES.get(stage, ""), None)
            session.stage = target
            self.persist(session)
            return session

    def restyle(self, session_id: str, variant_names: list[str]) -> Session:
        """Populate extra style variants on a finished grid (stage unchanged)."""
        with self._lock_for(session_id):
            session = self.get_session(session_id)
            if session.stage is not Stage.GRID_READY:
                raise StageOrderViolation("restyle requires a finished grid")
            try:
                variants = {StyleVariant(name) for name in variant_names}
            except ValueError as exc:
                raise InvalidConfig(f"unknown variant: {exc}") from exc
            grid = self._rebuild_grid(session)
            restyle_grid(grid, variants | {StyleVariant.OUTLINE}, self.backends)
            session.snapshots["grid"] = self._snapshot_grid(session, grid)
            self.persist(session)
            return session

    def artifact_bytes(self, session_id: str, ref: str) -> bytes:
        return self.store_for(session_id).get_bytes(ref)

    def scatter_json(self, session_id: str, view_name: str) -> dict:
        session = self.get_session(session_id)
        snapshot = session.snapshots.get("simplify")
        if snapshot is None or view_name not in snapshot:
            raise NotFound(f"no scatter data for view {view_name!r}")
        return snapshot[view_name]["scatter"]

    # -- stage bodies -----------------------------------------------------------

    def _run_ideate(self, session: Session, payload: dict) -> dict:
        concept = payload.get("concept", "")
        if not str(concept).strip():
            raise InvalidConfig("ideate requires a non-empty 'concept'")
        state = run_ideation(Concept(label=str(concept)), self.backends,
                             self.backends, max_iterations=session.config.max_iterations)
        return {
            "concept": state.input.label,
            "iterations": state.iteration,
            "top5_history": [sorted(s) for s in state.top5_history],
            "candidates": candidates_to_json(state),
        }

    def _run_scaffold(self, session: Session, payload: dict) -> dict:
        ideation = session.snapshots.get("ideate")
        if ideation is None:
            raise StageOrderViolation("scaffold requires a completed ideation")
        label = str(payload.get("candidate_label", "")).strip().lower()
        if not label:
            label = ideation["candidates"][0]["label"]
        known = {row["label"] for row in ideation["candidates"]}
        if label not in known:
            raise InvalidConfig(f"candidate {label!r} is not in the ranked pool")
        scaffold = build_scaffold(Concept(label=label), self.relations(label),
                                  cap=session.config.bucket_cap)
        return {"candidate": label, "scaffold": scaffold_to_json(scaffold)}

    def _scaffold_from_snapshot(self, session: Session):
        snapshot = session.snapshots.get("scaffold")
        if snapshot is None:
            raise StageOrderViolation("stage requires a completed scaffold")
        center = Concept(label=snapshot["candidate"])
        relations = []
        for bucket in ("taxonomic", "constitutive", "associative"):
            for row in snapshot["scaffold"][bucket]:
                relations.append(SemanticRelation(
                    subject=center.label,
                    relation=RelationKind(row["relation"]),
                    object=row["object"],
                    source=RelationSource(row["source"]),
                    weight=row["weight"],
                ))
        return build_scaffold(center, relations, cap=session.config.bucket_cap)

    def _run_exemplars(self, session: Session, payload: dict) -> dict:
        scaffold = self._scaffold_from_snapshot(session)
        if payload.get("selections") is not None:
            selections = {}
            for view_name, rows in payload["selections"].items():
                view = View(view_name)
                bucket = scaffold.bucket(VIEW_DIMENSION[view])
                chosen = []
                for row in rows:
                    matches = [r for r in bucket
                               if r.relation.value == row.get("relation")
                               and r.object == row.get("object")]
                    if not matches:
                        raise SelectionOutOfBucket(
                            f"{row} is not available in the {view.value} bucket")
                    chosen.append(matches[0])
                selections[view] = chosen
        else:
            selections = default_selections(scaffold)
        prompt_edits = None
        if payload.get("prompt_edits"):
            prompt_edits = {View(k): str(v) for k, v in payload["prompt_edits"].items()}
        chain = build_prompt_chain(scaffold, selections, prompt_edits)
        results = generate_exemplar_chain(chain, self.backends)
        store = self.store_for(session.id)
        exemplars = {}
        for result in results:
            exemplars[result.view.value] = {
                "image_ref": store.put_raster(result.image) if result.ok else None,
                "error": result.error,
            }
        return {"chain": chain_to_json(chain), "exemplars": exemplars}

    def _run_simplify(self, session: Session, payload: dict) -> dict:
        snapshot = session.snapshots.get("exemplars")
        if snapshot is None:
            raise StageOrderViolation("simplify requires generated exemplars")
        requested = payload.get("exemplar_views") or [v.value for v in View]
        store = self.store_for(session.id)
        out = {}
        for view_name in requested:
            view = View(view_name)
            entry = snapshot["exemplars"][view.value]
            if entry["image_ref"] is None:
                raise InvalidConfig(f"exemplar for {view.value} failed; regenerate first")
            source = store.get_raster(entry["image_ref"])
            seq = simplify_exemplar(source, self.backends, session.config)
            clustering, scatter = cluster_sequence(seq, self.backends, session.config)
            frame_refs = [store.put_raster(image) for _, image in seq.frames]
            out[view.value] = {
                "sequence": sequence_manifest(seq, entry["image_ref"], frame_refs),
                "representatives": [seq.frames[i][0] for i in clustering.representatives],
                "inertia": clustering.inertia,
                "scatter": scatter.to_json(),
            }
        return out

    def _run_grid(self, session: Session, payload: dict) -> dict:
        simplify_snapshot = session.snapshots.get("simplify")
        if simplify_snapshot is None:
            raise StageOrderViolation("grid requires completed simplification")
        columns = int(payload.get("columns") or session.config.columns)
        if not 1 <= columns <= 9:
            raise InvalidConfig("columns must be in 1..9")
        picks_payload = payload.get("picks") or {}
        store = self.store_for(session.id)
        per_view = {}
        picks: dict[View, list[int]] = {}
        for view_name, entry in simplify_snapshot.items():
            view = View(view_name)
            frame_map = {row["step"]: row["artifact_ref"]
                         for row in entry["sequence"]["frames"]}
            if view.value in picks_payload:
                steps = [int(s) for s in picks_payload[view.value]]
                if any(b <= a for a, b in zip(steps, steps[1:])):
                    raise NonMonotonicPicks(
                        f"{view.value} picks {steps} not strictly increasing")
                unknown = [s for s in steps if s not in frame_map]
                if unknown:
                    raise InvalidConfig(
                        f"{view.value} picks reference unknown steps {unknown}")
            else:
                reps = entry["representatives"]
                ranks = default_pick_ranks(len(reps), columns)
                steps = [reps[rank - 1] for rank in ranks]
            picks[view] = steps
            per_view[view] = [
                (step, build_layered_icon(store.get_raster(frame_map[step]),
                                          self.backends, alpha=session.config.alpha))
                for step in steps
            ]
        grid = assemble_grid(per_view, columns=columns, picks=picks,
                             concept=session.snapshots["ideate"]["concept"])
        restyle_grid(grid, {StyleVariant.OUTLINE}, self.backends)
        return self._snapshot_grid(session, grid)

    def _snapshot_grid(self, session: Session, grid) -> dict:
        store = self.store_for(session.id)
        export = export_grid(grid, grid.selected_variants)
        for cell in grid.cells.values():
            store.put_raster(cell.icon)
        sheets = {variant.value: store.put_raster(sheet)
                  for variant, sheet in export.sheets.items()}
        layers = {}
        for source in grid.sources.values():
            icon = source.icon
            frame_ref = store.put_raster(icon.base)
            mask_refs = [store.put_bytes(encode_mask_png(layer.mask))
                         for layer in icon.layers]
            layers[source.provenance.layers_ref] = layer_manifest(
                icon, frame_ref, mask_refs)
        manifest = dict(export.manifest)
        manifest["layers"] = layers
        return {
            "columns": grid.columns,
            "manifest": manifest,
            "sheets": sheets,
            "failures": {f"{k[0]}/{k[1]}/{k[2].value}": v
                         for k, v in grid.failures.items()},
        }

    def _rebuild_grid(self, session: Session):
        """Reconstruct the IconGrid from its snapshot (mocks are pure, so
        segmentation and styling reproduce the stored bytes exactly)."""
        snapshot = session.snapshots.get("grid")
        if snapshot is None:
            raise StageOrderViolation("no grid to restyle")
        simplify_snapshot = session.snapshots["simplify"]
        store = self.store_for(session.id)
        manifest = snapshot["manifest"]
        steps_by_view: dict[View, list[int]] = {}
        for cell in manifest["cells"]:
            view = View(cell["provenance"]["view"])
            steps = steps_by_view.setdefault(view, [])
            if cell["provenance"]["step"] not in steps:
                steps.append(cell["provenance"]["step"])
        per_view = {}
        picks = {}
        for view, steps in steps_by_view.items():
            frames = {row["step"]: store.get_raster(row["artifact_ref"])
                      for row in simplify_snapshot[view.value]["sequence"]["frames"]}
            ordered = sorted(steps)
            per_view[view] = [
                (step, build_layered_icon(frames[step], self.backends,
                                          alpha=session.config.alpha))
                for step in ordered
            ]
            picks[view] = ordered
        grid = assemble_grid(per_view, columns=snapshot["columns"], picks=picks,
                             concept=manifest["concept"])
        restyle_grid(grid, {StyleVariant(v) for v in manifest["variants"]},
                     self.backends)
        return grid
