"""Render the BEV pipeline graph as Mermaid source.

Usage
-----
▶ In a notebook / IPython console
    >>> from src.workflows.bev_pipeline_workflow_visualizer import show_graph
    >>> show_graph()

▶ From the shell (writes bev_pipeline_graph.mmd)
    $ python -m src.workflows.bev_pipeline_workflow_visualizer
"""

from __future__ import annotations

import pathlib
from typing import Final

from src.workflows.bev_pipeline_workflow import generate_bev_pipeline_workflow

MERMAID_FILENAME: Final[str] = "bev_pipeline_graph.mmd"


def mermaid_source() -> str:
    """Compile the graph and return its Mermaid description."""
    return generate_bev_pipeline_workflow().get_graph().draw_mermaid()


def show_graph() -> None:
    """Display the graph inline (for notebooks / IPython)."""
    from IPython.display import Markdown, display

    display(Markdown(f"```mermaid\n{mermaid_source()}\n```"))


def save_graph(path: str | pathlib.Path = MERMAID_FILENAME) -> pathlib.Path:
    """Write the Mermaid source to *path* and return the `Path` object."""
    p = pathlib.Path(path).expanduser().resolve()
    p.write_text(mermaid_source(), encoding="utf-8")
    return p


if __name__ == "__main__":
    from IPython import get_ipython

    if get_ipython():
        show_graph()
    else:
        out = save_graph()
        print(f"Graph written to {out}")
