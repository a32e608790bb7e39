import argparse
import logging

from evsense.cli.common import EXIT_OK, FRAMES_FILE, LABELS_FILE, SCENE_SPEC_FILE
from evsense.exceptions import InvalidParameterError
from evsense.models.run_config import RunConfig
from evsense.models.scene_models import SceneSpec
from evsense.services.scene_service import SceneService
from evsense.storage.documents import write_labels
from evsense.storage.event_io import write_frames

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "gen-scene", parents=parents, argument_default=argparse.SUPPRESS,
        help="Render a procedural scene to FRM1 frames and a labels document",
    )
    parser.add_argument("--spec", help="SceneSpec JSON file")
    parser.add_argument("--random-scene", dest="random_scene", action="store_true",
                        help="Generate a random scene from --seed instead of --spec")
    parser.add_argument("--n-frames", dest="n_frames", type=int, help="Frames of a random scene (default: 20)")
    parser.add_argument("--width", type=int, help="Random scene width (default: 320)")
    parser.add_argument("--height", type=int, help="Random scene height (default: 240)")
    parser.add_argument("--max-objects", dest="max_objects", type=int, help="Random scene object limit (default: 3)")
    parser.add_argument("--fov-deg", dest="fov_deg", type=float, help="Override the scene field of view")
    parser.set_defaults(handler=run)


def load_scene(run_config: RunConfig) -> SceneSpec:
    if run_config.spec:
        with open(run_config.spec, "r", encoding="utf-8") as handle:
            spec = SceneSpec.model_validate_json(handle.read())
    elif run_config.random_scene:
        spec = SceneService().random_spec(
            run_config.seed, width=run_config.width, height=run_config.height,
            n_frames=run_config.n_frames, max_objects=run_config.max_objects,
            fov_deg=run_config.fov_deg if run_config.fov_deg is not None else 90.0,
        )
    else:
        raise InvalidParameterError("gen-scene needs --spec or --random-scene")

    if run_config.fov_deg is not None:
        spec = SceneSpec.model_validate({**spec.model_dump(), "fov_deg": run_config.fov_deg})
    return spec


def run(run_config: RunConfig) -> int:
    spec = load_scene(run_config)
    frames, labels = SceneService(workers=run_config.workers).generate_sequence(spec)

    out_dir = run_config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    write_frames(frames, out_dir / FRAMES_FILE)
    write_labels(labels, out_dir / LABELS_FILE)
    (out_dir / SCENE_SPEC_FILE).write_text(spec.model_dump_json(indent=2), encoding="utf-8")
    run_config.save()

    boxes = sum(len(record.boxes) for record in labels)
    print(f"{len(frames)} frames {frames.width}x{frames.height}, {boxes} boxes -> {out_dir}")
    return EXIT_OK
