import logging
from pathlib import Path
from typing import Optional, TextIO

from qirw.core.exceptions import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    CertificationFailure,
    InvariantViolation,
    QirwError,
)
from qirw.schemas.documents import GraphDocument, VertexMapDocument
from qirw.schemas.reports import PASS, SynthesisReport
from qirw.schemas.run import RunConfig
from qirw.services.graph_core import to_dot
from qirw.services.instance_lab import certify, growth_row, write_growth_csv
from qirw.services.quasi_isometry import materialize_map
from qirw.services.weight_extension import SynthesisService
from qirw.commands.inputs import load_instance
from qirw.utils.checks import InvariantChecker
from qirw.utils.io import load_document, write_json, write_text
from qirw.utils.response import error_response, success_response


logger = logging.getLogger(__name__)

DEFAULT_REPORT = Path("report.json")


def cmd_synthesize(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """
    Synthesize weights for an instance and write the report.

    Args:

        config (RunConfig): input paths, profile, seed, output path and format.

    Returns:

        int: 0 when both the internal and the oracle certificate pass, 2 when either
        fails or a runtime-asserted guarantee breaks, 1 on input errors.
    """
    out = config.out or DEFAULT_REPORT
    service = SynthesisService(InvariantChecker(profile=config.profile, seed=config.seed))
    try:
        instance = load_instance(config)
        report = service.synthesize(instance.phi, instance.decomposition)
        write_json(out, report)
        weighting = report.weighting.to_domain(instance.h)
        if config.format == "dot":
            write_text(out.with_suffix(".dot"), to_dot(weighting))
        elif config.format == "materialized":
            mapped = materialize_map(instance.phi, weighting)
            write_json(
                out.with_suffix(".materialized.json"),
                {
                    "h": GraphDocument.from_domain(mapped.target_graph).model_dump(),
                    "phi": VertexMapDocument.from_domain(mapped).model_dump(by_alias=True),
                },
            )
        verdict = certify(instance, report)
        summary = {
            "report": str(out),
            "verdict": report.verdict,
            "oracle": verdict.model_dump(),
            "c_prime": report.c_prime,
            "w_bound": report.w_bound,
            "achieved_size": report.achieved_size,
        }
        if report.verdict != PASS or not verdict.passed:
            raise CertificationFailure("Synthesized weights did not certify", data=summary)
    except InvariantViolation as e:
        logger.error("synthesize failed after %s level(s): %s", len(service.levels), e.detail)
        failed = SynthesisReport.failed(config.profile, service.levels, e.detail, e.data)
        write_json(out, failed)
        return error_response(
            message=e.detail, status_code=e.exit_code, data={"report": str(out), "failure": failed.failure}, stream=stream
        )
    except QirwError as e:
        logger.error("synthesize failed: %s", e.detail)
        return error_response(message=e.detail, status_code=e.exit_code, data=e.data, stream=stream)
    except Exception as e:
        logger.exception("synthesize failed")
        return error_response(message=f"Error synthesizing weights: {str(e)}", status_code=EXIT_INPUT_ERROR, stream=stream)

    return success_response(message="Weights synthesized and certified", data=summary, stream=stream)


def cmd_certify(config: RunConfig, stream: Optional[TextIO] = None) -> int:
    """
    Re-check a report against its instance with the independent oracle.

    Returns:

        int: 0 on PASS, 2 on FAIL, 1 on input errors.
    """
    try:
        instance = load_instance(config)
        if config.report is None:
            return error_response(message="--report is required", status_code=EXIT_INPUT_ERROR, stream=stream)
        report = load_document(config.report, SynthesisReport)
        verdict = certify(instance, report)
        if config.format == "csv":
            write_growth_csv([growth_row(instance, report, verdict)], config.out or Path("growth.csv"), append=True)
        if not verdict.passed:
            raise CertificationFailure("Certification failed", data=verdict.model_dump())
    except QirwError as e:
        logger.error("certify failed: %s", e.detail)
        return error_response(message=e.detail, status_code=e.exit_code, data=e.data, stream=stream)
    except Exception as e:
        logger.exception("certify failed")
        return error_response(message=f"Error certifying report: {str(e)}", status_code=EXIT_INPUT_ERROR, stream=stream)

    return success_response(message="Certification passed", data=verdict.model_dump(), status_code=EXIT_OK, stream=stream)
