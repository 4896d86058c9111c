from langgraph.constants import END
from langgraph.graph import StateGraph
from langgraph.graph.state import CompiledStateGraph

from src.converter.converters import coerce_pipeline_state
from src.dto.state_dto import PipelineState
from src.logging.logging import get_logger
from src.nodes.router.routers import route_on_fine_sampling, route_on_ground_truth, route_on_strategy
from src.nodes.runnables.binarize_runnable import binarize_runnable
from src.nodes.runnables.coarse_sampling_runnable import coarse_sampling_runnable
from src.nodes.runnables.combine_logits_runnable import combine_logits_runnable
from src.nodes.runnables.dense_sampling_runnable import dense_sampling_runnable
from src.nodes.runnables.evaluate_iou_runnable import evaluate_iou_runnable
from src.nodes.runnables.fine_sampling_runnable import fine_sampling_runnable

logger = get_logger(__name__)


def generate_bev_pipeline_workflow() -> CompiledStateGraph:
    graph = StateGraph(PipelineState)

    graph.add_node("coarse_sampling_runnable", coarse_sampling_runnable)
    graph.add_node("fine_sampling_runnable", fine_sampling_runnable)
    graph.add_node("combine_logits_runnable", combine_logits_runnable)
    graph.add_node("dense_sampling_runnable", dense_sampling_runnable)
    graph.add_node("binarize_runnable", binarize_runnable)
    graph.add_node("evaluate_iou_runnable", evaluate_iou_runnable)

    # Coarse-to-fine or a single dense pass
    graph.set_conditional_entry_point(
        route_on_strategy,
        ["coarse_sampling_runnable", "dense_sampling_runnable"],
    )

    graph.add_conditional_edges(
        "coarse_sampling_runnable",
        route_on_fine_sampling,
        ["fine_sampling_runnable", "combine_logits_runnable"],
    )
    graph.add_edge("fine_sampling_runnable", "combine_logits_runnable")
    graph.add_edge("combine_logits_runnable", "binarize_runnable")
    graph.add_edge("dense_sampling_runnable", "binarize_runnable")

    # Evaluation only runs when a ground truth is part of the state
    graph.add_conditional_edges(
        "binarize_runnable",
        route_on_ground_truth,
        ["evaluate_iou_runnable", END],
    )
    graph.add_edge("evaluate_iou_runnable", END)

    return graph.compile()


def run_bev_pipeline(state: PipelineState) -> PipelineState:
    """Invoke the compiled pipeline and hand back a typed state."""
    workflow = generate_bev_pipeline_workflow()
    result = coerce_pipeline_state(workflow.invoke(state))
    logger.info("BEV pipeline finished", **result.summary())
    return result
