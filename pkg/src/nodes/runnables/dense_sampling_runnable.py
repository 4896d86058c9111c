from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.sampling import dense_pass

logger = get_logger(__name__)


def dense_sampling_runnable(state: PipelineState) -> PipelineState:
    """Evaluate every grid cell in one pass."""
    logger.info("Running dense sampling", cells=state.grid.cells * state.grid.cells)
    state.logits = dense_pass(
        state.feature_map,
        state.calibration,
        state.sampling,
        state.grid,
        state.decoder,
        workers=state.workers,
    )
    return state
