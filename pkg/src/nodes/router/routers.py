from langgraph.constants import END

from src.dto.sampling_dto import SamplingStrategy
from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger

logger = get_logger(__name__)


def route_on_strategy(state: PipelineState) -> str:
    """
    Route the entry of the pipeline: coarse-to-fine sampling or a single dense pass.
    """
    nxt = (
        "dense_sampling_runnable"
        if SamplingStrategy(state.strategy) == SamplingStrategy.DENSE
        else "coarse_sampling_runnable"
    )
    logger.info("Routing on sampling strategy", strategy=SamplingStrategy(state.strategy).value, next=nxt)
    return nxt


def route_on_fine_sampling(state: PipelineState) -> str:
    """
    Route after the coarse pass. With fine sampling disabled the coarse logits are
    combined directly.
    """
    if state.sampling.fine_enabled:
        return "fine_sampling_runnable"
    logger.info("Fine sampling disabled, combining coarse logits only")
    return "combine_logits_runnable"


def route_on_ground_truth(state: PipelineState) -> str:
    """
    Route after binarisation: evaluate when a ground truth was supplied, otherwise end.
    """
    if state.ground_truth is not None:
        return "evaluate_iou_runnable"
    logger.info("No ground truth supplied, skipping evaluation")
    return END
