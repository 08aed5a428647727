"""Accelerator-deployment pipeline toolkit.

Graph compatibility passes, INT8 post-training quantization, YOLO-style
detection pre/post-processing, a two-stage pipeline benchmark harness and
mAP evaluation, backed by the C++ core.
"""

from orbitdet._core import (  # noqa: F401
    ConfigError,
    DomainError,
    GraphError,
    IoError,
    ShapeError,
    calibrate_graph,
    concat_channels,
    conv2d,
    decode_count,
    dequantize,
    detect_postprocess,
    estimate_cost,
    evaluate_detections,
    execute_graph,
    iou,
    leaky_relu,
    letterbox,
    load_ppm,
    load_tensor_f32,
    max_pool2d,
    measure_latency,
    mish,
    mish_array,
    partition_graph,
    quantize,
    rewrite_mish_to_leaky,
    run_benchmark,
    save_ppm,
    save_tensor,
    select_fraction_bits,
    upsample_nearest2x,
    validate_graph,
)

__all__ = [name for name in dir() if not name.startswith("_")]
