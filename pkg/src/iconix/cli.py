"""Headless batch runner: one concept in, a full output tree out.

Runs the whole pipeline with batch defaults (top-ranked candidate, top-3
relations per dimension, evenly spaced grid picks) and writes the
candidate table, scaffold, exemplars, sequence manifests, scatter data,
grid manifest, sprite sheets and a small figure/CSV report.

Exit codes: 0 ok, 2 config, 3 backend, 4 empty pool, 5 I/O.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .backends import Backends, StyleVariant
from .errors import BackendError, EmptyPool, IconixError, InvalidConfig
from .ideation import candidates_to_json
from .imaging import encode_mask_png
from .layering import layer_manifest
from .pipeline import PipelineConfig, parse_styles, run_pipeline
from .report import (
    render_distance_figure,
    render_scatter_figure,
    write_candidates_csv,
    write_checkpoints_csv,
)
from .scaffold import chain_to_json, scaffold_to_json
from .service import ArtifactStore
from .simplification import sequence_manifest

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_BACKEND = 3
EXIT_EMPTY_POOL = 4
EXIT_IO = 5


@dataclass
class BatchSpec:
    concept: str
    out_dir: Path
    mock: bool = True
    columns: int = 3
    styles: set[StyleVariant] = field(default_factory=lambda: set(StyleVariant))
    seed: int = 42
    overrides: dict = field(default_factory=dict)


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def run_batch(spec: BatchSpec) -> int:
    config = PipelineConfig.from_overrides({
        **spec.overrides,
        "columns": spec.columns,
        "seed": spec.seed,
    })
    backends = Backends.all_mock() if spec.mock else Backends.from_env()
    result = run_pipeline(spec.concept, config, backends, styles=spec.styles)

    out = spec.out_dir
    out.mkdir(parents=True, exist_ok=True)
    store = ArtifactStore(out / "artifacts")
    report_dir = out / "report"
    report_dir.mkdir(exist_ok=True)
    (out / "exemplars").mkdir(exist_ok=True)
    (out / "sequences").mkdir(exist_ok=True)
    grid_dir = out / "grid"
    grid_dir.mkdir(exist_ok=True)

    candidate_rows = candidates_to_json(result.ideation)
    _dump_json(out / "candidate_table.json", candidate_rows)
    _dump_json(out / "scaffold.json", scaffold_to_json(result.scaffold))
    _dump_json(out / "prompt_chain.json", chain_to_json(result.chain))

    from .imaging import encode_png
    exemplar_refs = {}
    for exemplar in result.exemplars:
        png = encode_png(exemplar.image)
        exemplar_refs[exemplar.view] = store.put_bytes(png)
        (out / "exemplars" / f"{exemplar.view.value}.png").write_bytes(png)

    checkpoints_by_view = {}
    for view, seq in result.sequences.items():
        frame_refs = [store.put_raster(image) for _, image in seq.frames]
        manifest = sequence_manifest(seq, exemplar_refs[view], frame_refs)
        manifest["representatives"] = [
            seq.frames[i][0] for i in result.clusterings[view].representatives]
        _dump_json(out / "sequences" / f"{view.value}.json", manifest)
        _dump_json(out / f"scatter_{view.value}.json",
                   result.scatters[view].to_json())
        checkpoints_by_view[view.value] = seq.checkpoints
        render_scatter_figure(report_dir / f"scatter_{view.value}.png",
                              result.scatters[view].to_json(),
                              f"{result.candidate.label}: {view.value}")

    layers = {}
    for source in result.grid.sources.values():
        icon = source.icon
        frame_ref = store.put_raster(icon.base)
        mask_refs = [store.put_bytes(encode_mask_png(layer.mask))
                     for layer in icon.layers]
        layers[source.provenance.layers_ref] = layer_manifest(icon, frame_ref, mask_refs)
    manifest = dict(result.export.manifest)
    manifest["layers"] = layers
    _dump_json(grid_dir / "manifest.json", manifest)
    for variant, sheet in result.export.sheets.items():
        sheet_png = encode_png(sheet)
        store.put_bytes(sheet_png)
        (grid_dir / f"sprite_{variant.value}.png").write_bytes(sheet_png)

    write_candidates_csv(report_dir / "candidates.csv", candidate_rows)
    write_checkpoints_csv(report_dir / "checkpoints.csv", checkpoints_by_view)
    render_distance_figure(report_dir / "distances.png", checkpoints_by_view,
                           config.epsilon)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="iconix",
        description="Generate a dual-axis icon grid for a concept.")
    parser.add_argument("--concept", required=True, help="input concept label")
    parser.add_argument("--out", default="iconix_out", help="output directory")
    parser.add_argument("--mock", action="store_true",
                        help="use the deterministic offline mock backends")
    parser.add_argument("--columns", type=int, default=3,
                        help="grid columns (1-9, default 3)")
    parser.add_argument("--styles", default="outline,filled,color",
                        help="comma-separated variants to render")
    parser.add_argument("--seed", type=int, default=42, help="random seed")
    parser.add_argument("--config", default=None,
                        help="JSON file of config overrides")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = {}
        if args.config:
            try:
                overrides = json.loads(Path(args.config).read_text())
            except OSError as exc:
                print(f"error: cannot read config file: {exc}", file=sys.stderr)
                return EXIT_IO
            except ValueError as exc:
                raise InvalidConfig(f"config file is not valid JSON: {exc}") from exc
            if not isinstance(overrides, dict):
                raise InvalidConfig("config file must hold a JSON object")
        spec = BatchSpec(
            concept=args.concept,
            out_dir=Path(args.out),
            mock=args.mock,
            columns=args.columns,
            styles=parse_styles(args.styles.split(",")),
            seed=args.seed,
            overrides=overrides,
        )
        return run_batch(spec)
    except InvalidConfig as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except EmptyPool as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_EMPTY_POOL
    except BackendError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except IconixError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
