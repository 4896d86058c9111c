from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.metrics import binarize

logger = get_logger(__name__)


def binarize_runnable(state: PipelineState) -> PipelineState:
    if state.logits is None:
        raise ValueError("logits are required but not set in state")

    state.binary = binarize(state.logits, state.threshold)
    logger.info("Binarized logits", threshold=state.threshold, positive_cells=int(state.binary.values.sum()))
    return state
