import logging
from pathlib import Path
from typing import Optional, TextIO

from qirw.core.config import settings
from qirw.core.exceptions import EXIT_INPUT_ERROR, InputError, QirwError
from qirw.models.quasi_isometry import INFEASIBLE
from qirw.schemas.documents import WeightingDocument
from qirw.schemas.reports import PASS
from qirw.schemas.run import RunConfig
from qirw.services.instance_lab import generate, write_instance
from qirw.services.path_decomposition import require_valid
from qirw.services.quasi_isometry import measure_params, minimal_additive
from qirw.commands.inputs import load_instance
from qirw.utils.io import load_document
from qirw.utils.response import error_response, success_response


logger = logging.getLogger(__name__)


def _generator_params(config: RunConfig) -> dict:
    if config.generator == "pathlike":
        return {"n": config.n, "p": config.p, "q": config.q}
    if config.generator == "bounded_pw":
        return {"n": config.n, "k": config.k, "subdivision": config.p, "contraction": config.q}
    if config.generator == "comb":
        return {"m": config.m}
    raise InputError(f"unknown generator {config.generator!r}", data={"known": ["bounded_pw", "comb", "pathlike"]})


def cmd_generate(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """
    Write a generated instance; the same seed always gives the same file.
    """
    try:
        instance = generate(config.generator, config.seed, **_generator_params(config))
        require_valid(instance.decomposition)
        out = config.out or Path(settings.CORPUS_DIR) / config.generator / f"{config.seed}.json"
        write_instance(instance, out, expected=PASS)
    except QirwError as e:
        logger.error("generate failed: %s", e.detail)
        return error_response(message=e.detail, status_code=e.exit_code, data=e.data, stream=stream)
    except Exception as e:
        logger.exception("generate failed")
        return error_response(message=f"Error generating instance: {str(e)}", status_code=EXIT_INPUT_ERROR, stream=stream)
    return success_response(
        message="Instance generated",
        data={
            "path": str(out),
            "source_vertices": len(instance.g),
            "target_vertices": len(instance.h),
            "width": instance.decomposition.width,
        },
        stream=stream,
    )


def cmd_measure(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """
    Print the measured (C-1, C) parameters and the minimal additive constant.

    With --weights the additive constant is taken into the weighted target.
    """
    try:
        instance = load_instance(config)
        measured = measure_params(instance.phi)
        target = instance.phi
        if config.weights is not None:
            weighting = load_document(config.weights, WeightingDocument).to_domain(instance.h)
            target = instance.phi.onto(weighting)
        additive = minimal_additive(target)
    except QirwError as e:
        logger.error("measure failed: %s", e.detail)
        return error_response(message=e.detail, status_code=e.exit_code, data=e.data, stream=stream)
    except Exception as e:
        logger.exception("measure failed")
        return error_response(message=f"Error measuring map: {str(e)}", status_code=EXIT_INPUT_ERROR, stream=stream)

    if measured is INFEASIBLE:
        return error_response(
            message="Map is not a quasi-isometry", status_code=EXIT_INPUT_ERROR, data={"C": str(INFEASIBLE)}, stream=stream
        )
    return success_response(
        message="Map measured",
        data={
            "L": measured - 1,
            "C": measured,
            "additive": str(additive) if additive is INFEASIBLE else additive,
            "weighted": config.weights is not None,
        },
        stream=stream,
    )
