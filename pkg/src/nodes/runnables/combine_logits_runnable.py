from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.sampling import combine

logger = get_logger(__name__)


def combine_logits_runnable(state: PipelineState) -> PipelineState:
    """Scatter coarse and fine logits onto the dense grid, fine first."""
    if state.coarse is None:
        raise ValueError("coarse result is required but not set in state")

    state.logits = combine(state.coarse.logits, state.fine, fill=state.sampling.background_logit)
    logger.debug("Combined logits", fine=state.fine is not None)
    return state
