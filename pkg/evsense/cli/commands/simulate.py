import argparse
import logging

from evsense.cli.common import (
    EVENTS_FILE,
    EXIT_OK,
    FRAMES_FILE,
    add_sensor_arguments,
    input_file,
    resolve_sensor_config,
    scene_spec_beside,
)
from evsense.models.run_config import RunConfig
from evsense.services.scene_service import SceneService
from evsense.services.transduction_service import TransductionService
from evsense.storage.event_io import read_frames, write_events

logger = logging.getLogger(__name__)


def register(subparsers, parents) -> None:
    parser = subparsers.add_parser(
        "simulate", parents=parents, argument_default=argparse.SUPPRESS,
        help="Transduce FRM1 frames into an EVT1 event stream under one sensor configuration",
    )
    parser.add_argument("--frames", help=f"FRM1 file, or a scene directory holding {FRAMES_FILE}")
    add_sensor_arguments(parser)
    parser.set_defaults(handler=run)


def run(run_config: RunConfig) -> int:
    config = resolve_sensor_config(run_config)
    frames_path = input_file(run_config.frames, FRAMES_FILE, "--frames")

    spec_path, scene = scene_spec_beside(frames_path)
    if scene is not None and scene.fov_deg != config.fov_deg:
        logger.info(f"Re-rendering {spec_path} at F_v={config.fov_deg}deg")
        frames, _ = SceneService(workers=run_config.workers).generate_sequence(scene, fov_deg=config.fov_deg)
    else:
        frames = read_frames(frames_path, fov_deg=scene.fov_deg if scene else config.fov_deg)

    stream = TransductionService(workers=run_config.workers).transduce_sequence(frames, config)

    out_dir = run_config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    write_events(stream, out_dir / EVENTS_FILE)
    run_config.save()

    stats = stream.stats()
    print(f"{config.id} ({config.describe()}): {stats.count} events "
          f"(+{stats.positive}/-{stats.negative}), {stats.events_per_second:.1f} events/s "
          f"-> {out_dir / EVENTS_FILE}")
    return EXIT_OK
