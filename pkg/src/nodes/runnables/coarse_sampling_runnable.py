from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.services.sampling import coarse_pass

logger = get_logger(__name__)


def coarse_sampling_runnable(state: PipelineState) -> PipelineState:
    """Pull and decode the coarse anchors and keep the top-k of them."""
    logger.info(
        "Running coarse sampling",
        n_coarse=state.sampling.n_coarse,
        k=state.sampling.k,
        random_coarse=state.sampling.random_coarse,
    )
    state.coarse = coarse_pass(
        state.feature_map,
        state.calibration,
        state.sampling,
        state.grid,
        state.decoder,
        workers=state.workers,
    )
    return state
