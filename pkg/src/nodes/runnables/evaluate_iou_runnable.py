from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.metrics import iou_at_ranges

logger = get_logger(__name__)


def evaluate_iou_runnable(state: PipelineState) -> PipelineState:
    """Score the binary map against the ground truth at every configured range."""
    if state.binary is None or state.ground_truth is None:
        raise ValueError("binary map and ground truth are required but not set in state")

    state.report = iou_at_ranges(state.binary, state.ground_truth, state.ranges)
    logger.info("Evaluated IoU", **state.report.to_percent_dict())
    return state
