"""texfusion: streaming texture-map reconstruction of a known, UV-mapped mesh
from posed RGB frames, plus hue-template classification of object instances.
"""

from . import errors
from .exposure import LumaStats, luma_stats, normalize_luma
from .fusion import (
    IncrementPatch,
    TextureAccumulator,
    blend_boundaries,
    extract_increment,
    merge_argmax,
    merge_mean,
    texel_score,
)
from .matcher import (
    Candidate,
    HueConfig,
    HueImage,
    HueTemplate,
    InstanceHypothesis,
    circular_hue_distance,
    classify_instances,
    color_inlier_fraction,
    expected_hue,
    hue_descriptor,
    make_template,
    sample_template_poses,
)
from .pipeline import (
    EvalReport,
    PipelineConfig,
    ReconstructionResult,
    run_detection_eval,
    run_reconstruction,
)
from .raster import (
    DepthBuffer,
    DiscontinuityMask,
    RasterConfig,
    TexelSampleMap,
    discontinuity_mask,
    focus_camera,
    project_points,
    project_vertex,
    rasterize_texture_space,
    render_biased_depth,
    render_color,
)
from .scene_io import (
    FrameRecord,
    Mesh,
    PinholeCamera,
    RigidPose,
    Vertex,
    load_mesh,
    load_sequence,
    look_at_pose,
    write_mesh,
)
from .synth import SceneSpec, generate_synthetic_scene

__version__ = "0.1.0"
