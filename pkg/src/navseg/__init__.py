"""Navigation segment representation for interactive multiview imaging.

Partitions a discretized viewpoint domain over a synthetic 3D scene into
segments, each stored as one coded reference view plus the extra scene
content its members reveal, then sizes, optimizes, simulates and serves
that representation.
"""

from .geometry import CameraIntrinsics, CameraPose
from .kernels import BACKEND
from .navdomain import NavigationDomain, distance, navigation_ball
from .partition import (
    CostParams,
    Partition,
    Segment,
    build_partition,
    lloyd_optimize,
    max_segments,
    partition_from_json,
    partition_to_json,
    select_num_segments,
)
from .presets import PRESETS, get_preset
from .render import ViewCache, render_view, visible_set
from .scene import SceneConfig, SceneModel, build_scene

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CameraIntrinsics",
    "CameraPose",
    "CostParams",
    "NavigationDomain",
    "PRESETS",
    "Partition",
    "SceneConfig",
    "SceneModel",
    "Segment",
    "ViewCache",
    "build_partition",
    "build_scene",
    "distance",
    "get_preset",
    "lloyd_optimize",
    "max_segments",
    "navigation_ball",
    "partition_from_json",
    "partition_to_json",
    "render_view",
    "select_num_segments",
    "visible_set",
    "__version__",
]
