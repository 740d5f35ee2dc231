from qirw.core.exceptions import InputError
from qirw.models.instance import Instance
from qirw.schemas.documents import DecompositionDocument, GraphDocument, InstanceDocument, VertexMapDocument
from qirw.schemas.run import RunConfig
from qirw.utils.io import load_document


def load_instance(config: RunConfig) -> Instance:
    """The instance named by --instance, or assembled from --g --h --bags --phi."""
    if config.instance is not None:
        return load_document(config.instance, InstanceDocument).to_domain()
    missing = [flag for flag in ("g", "h", "bags", "phi") if getattr(config, flag) is None]
    if missing:
        raise InputError(
            "either --instance or all of --g --h --bags --phi are required",
            data={"missing": [f"--{flag}" for flag in missing]},
        )
    g = load_document(config.g, GraphDocument).to_domain()
    h = load_document(config.h, GraphDocument).to_domain()
    decomposition = load_document(config.bags, DecompositionDocument).to_domain(h)
    phi = load_document(config.phi, VertexMapDocument).to_domain(g, h)
    return Instance(g=g, h=h, decomposition=decomposition, phi=phi)
