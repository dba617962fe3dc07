from typing import Any, Dict, Optional

from facewalk.schemas.errors import ErrorResponse

messages = {
    "unknown-algorithm": (
        "Unknown algorithm `{algorithm}`; expected one of {known}."
    ),
    "unimplemented-algorithm": (
        "Algorithm `{algorithm}` is reserved but not implemented "
        "by this toolkit."
    ),
    "invalid-node": "Node `{node}` does not exist in a {size}-node graph.",
    "same-endpoints": "Source and destination must differ (got `{node}`).",
    "invalid-graph-file": "Could not read a graph from `{path}`: {reason}",
    "invalid-config": "Invalid experiment configuration: {reason}",
    "io-error": "Could not write `{path}`: {reason}",
    "generation-exhausted": (
        "Gave up generating connected graphs for n={n}, u={u} after "
        "{attempts} attempts."
    ),
    "step-budget-exceeded": (
        "The run did not become quiescent within {max_steps} steps "
        "({algorithm})."
    ),
    "non-planar": "The graph is not planar: {reason}",
    "not-delivered": (
        "{algorithm} reached quiescence without delivering from "
        "{source} to {dest}."
    ),
    "traceback-lost": (
        "The traceback from {dest} stopped at {node} without reaching "
        "{source}."
    ),
    "pair-accounting": (
        "Unbalanced tokens at quiescence: {spawns_l} L spawns, {spawns_r} R "
        "spawns, {annihilations} annihilations."
    ),
    "visited-twice": (
        "Node {node} handled a {hand} token of face {face} more than once."
    ),
    "directory-not-empty": (
        "{count} direction entries survived the end of the session."
    ),
}


def get_err(
    code: str,
    params: Optional[Dict[str, Any]] = None,
    field: Optional[str] = None,
) -> ErrorResponse:
    """Get an error model from a code.

    Args:
        code (str): The error code.
        params: The parameters to be used in the error message.
        field (Optional[str], optional): The field that caused the error.
            Defaults to None.

    Returns:
        ErrorResponse: The error model. The message is populated
            by using the code to look up the message in the messages dict.

    Raises:
        KeyError: If the code is not found in the messages dict.
    """
    message = messages[code]
    if params:
        message = message.format(**params)
    return ErrorResponse(
        message=message, code=code, field=field, params=params
    )
