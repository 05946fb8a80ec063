"""Quantum eraser simulations: orthodox coincidence optics and guided-wave trajectories.

Scenes are bench-language text; shipped scenes are available by name.

    >>> import eraser
    >>> runs = eraser.run_scene("walborn_fig2", n=2000)
"""

from ._core import (
    CompileError,
    InputError,
    ParseError,
    double_slit_closed_form,
    format_scene,
    render,
    run,
    scene_names,
    scene_text,
    validate,
    visibility,
)

__all__ = [
    "CompileError",
    "InputError",
    "ParseError",
    "double_slit_closed_form",
    "format_scene",
    "render",
    "run",
    "run_scene",
    "scene_names",
    "scene_text",
    "validate",
    "visibility",
]


def run_scene(name, seed=None, n=None):
    """Run a shipped scene by name."""
    return run(scene_text(name), name, seed=seed, n=n)
