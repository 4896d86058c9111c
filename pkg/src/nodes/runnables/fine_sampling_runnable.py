from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.sampling import fine_pass

logger = get_logger(__name__)


def fine_sampling_runnable(state: PipelineState) -> PipelineState:
    if state.coarse is None:
        raise ValueError("coarse result is required but not set in state")

    state.fine = fine_pass(
        state.coarse.anchors_kept,
        state.feature_map,
        state.calibration,
        state.sampling,
        state.grid,
        state.decoder,
        workers=state.workers,
    )
    return state
