from __future__ import annotations

from typing import Any, Mapping, Sequence, Union

from src.dto.bev_dto import BoundingBox3D, ObjectClass
from src.dto.camera_dto import CameraCalibration
from src.dto.state_dto import PipelineState
from src.services.decoders import AffineMeanPoolDecoder


def _triple(value: Any, name: str) -> tuple[float, float, float]:
    if not isinstance(value, (list, tuple)) or len(value) != 3:
        raise ValueError(f"'{name}' must be a list of 3 numbers, got {value!r}")
    return float(value[0]), float(value[1]), float(value[2])


def calibration_from_dict(d: Mapping[str, Any]) -> CameraCalibration:
    missing = [k for k in ("coeffs", "width", "height") if k not in d]
    if missing:
        raise ValueError(f"Calibration is missing {', '.join(missing)}")
    coeffs = d["coeffs"]
    if not isinstance(coeffs, (list, tuple)):
        raise ValueError(f"'coeffs' must be a list, got {coeffs!r}")
    kwargs: dict[str, Any] = {
        "coeffs": tuple(float(a) for a in coeffs),
        "width": int(d["width"]),
        "height": int(d["height"]),
    }
    if d.get("epsilon") is not None:
        kwargs["epsilon"] = float(d["epsilon"])
    return CameraCalibration(**kwargs)


def calibration_to_dict(cal: CameraCalibration) -> dict[str, Any]:
    return {
        "coeffs": list(cal.coeffs),
        "width": cal.width,
        "height": cal.height,
        "epsilon": cal.epsilon,
    }


def box_from_dict(d: Mapping[str, Any]) -> BoundingBox3D:
    if not isinstance(d, Mapping):
        raise ValueError(f"Box entry must be an object, got {type(d).__name__}")
    missing = [k for k in ("center", "rotation", "size") if k not in d]
    if missing:
        raise ValueError(f"Box is missing {', '.join(missing)}")
    distance = d.get("distance")
    points = d.get("points")
    return BoundingBox3D(
        center=_triple(d["center"], "center"),
        rotation=_triple(d["rotation"], "rotation"),
        size=_triple(d["size"], "size"),
        class_label=ObjectClass(d.get("class") or ObjectClass.VEHICLE.value),
        sensor_distance=float(distance) if distance is not None else None,
        point_count=int(points) if points is not None else None,
    )


def box_to_dict(box: BoundingBox3D) -> dict[str, Any]:
    out: dict[str, Any] = {
        "center": list(box.center),
        "rotation": list(box.rotation),
        "size": list(box.size),
        "class": box.class_label.value,
    }
    if box.sensor_distance is not None:
        out["distance"] = box.sensor_distance
    if box.point_count is not None:
        out["points"] = box.point_count
    return out


def boxes_from_list(items: Any) -> list[BoundingBox3D]:
    if not isinstance(items, list):
        raise ValueError(f"Annotations must be a JSON array, got {type(items).__name__}")
    return [box_from_dict(item) for item in items]


def boxes_to_list(boxes: Sequence[BoundingBox3D]) -> list[dict[str, Any]]:
    return [box_to_dict(b) for b in boxes]


def decoder_from_dict(d: Mapping[str, Any]) -> AffineMeanPoolDecoder:
    weights = d.get("weights")
    if not isinstance(weights, (list, tuple)) or not weights:
        raise ValueError(f"Decoder 'weights' must be a non-empty list, got {weights!r}")
    return AffineMeanPoolDecoder(
        weights=tuple(float(w) for w in weights),
        bias=float(d.get("bias") or 0.0),
    )


def decoder_to_dict(decoder: AffineMeanPoolDecoder) -> dict[str, Any]:
    return {"weights": list(decoder.weights), "bias": decoder.bias}


def coerce_pipeline_state(resp: Union[PipelineState, Mapping[str, object]]) -> PipelineState:
    """Normalise what a compiled graph hands back into a PipelineState."""
    # Already typed
    if isinstance(resp, PipelineState):
        return resp

    # Unwrap common wrappers: {"output": {...}} or {"state": {...}}
    d = dict(resp)
    if isinstance(d.get("output"), dict):
        d = d["output"]
    if isinstance(d.get("state"), dict):
        d = d["state"]

    known = set(PipelineState.__dataclass_fields__)
    unknown = sorted(set(d) - known)
    if unknown:
        raise ValueError(f"Unexpected pipeline state keys: {', '.join(unknown)}")
    return PipelineState(**d)
