"""Machine-verified bi-Lagrangian structures and Cherry flows.

The heavy lifting lives in the C++ core; this package re-exports the
compiled module. `run` drives the same engine as the command-line tool:

    code, report, table = bilag.run("verify-structure", "scenes/darboux2.scene")

`report` is the JSON report text, `table` the CSV table for commands that
emit one (empty otherwise), and `code` follows the CLI convention
(0 pass, 1 check failure, 2 unknown command).
"""

try:
    from ._core import (
        CheckFailure,
        DomainFailure,
        SceneBindError,
        SceneParseError,
        ToolkitError,
        commands,
        derivatives,
        evaluate,
        rotation_number,
        run,
    )
except ImportError:  # in-tree builds put the extension on sys.path directly
    from _core import (
        CheckFailure,
        DomainFailure,
        SceneBindError,
        SceneParseError,
        ToolkitError,
        commands,
        derivatives,
        evaluate,
        rotation_number,
        run,
    )

__all__ = [
    "CheckFailure",
    "DomainFailure",
    "SceneBindError",
    "SceneParseError",
    "ToolkitError",
    "commands",
    "derivatives",
    "evaluate",
    "rotation_number",
    "run",
]

__version__ = "0.1.0"
