"""
checkpoint.py

Binary checkpoints of trained teachers and student ensembles: the magic
"GDCK", a u32 version, a u64 length followed by a JSON metadata block, then
every parameter as raw little-endian float64 in the declared order
"""
import json
from dataclasses import dataclass, field

import numpy as np

from graphdistill.constants_harness import CHECKPOINT_MAGIC, CHECKPOINT_VERSION
from graphdistill.errors import FormatError
from graphdistill.log_utils import get_logger
from graphdistill.models import GCNTeacher, MLPStudent, StudentEnsemble
from graphdistill.numerics import Parameter
from graphdistill.os_utils import maybe_make_parent_dir

logger = get_logger(__file__)

KIND_TEACHER = "teacher"
KIND_ENSEMBLE = "ensemble"
CHECKPOINT_HEADER = np.dtype([("magic", "S4"), ("version", "<u4"), ("metadata_bytes", "<u8")])


@dataclass
class TeacherCheckpoint:
    teacher: GCNTeacher
    config: dict = field(default_factory=dict)
    best_epoch: int = None
    metadata: dict = field(default_factory=dict)

    kind = KIND_TEACHER

    @property
    def parameters(self):
        return self.teacher.parameters


@dataclass
class StudentEnsembleCheckpoint:
    ensemble: StudentEnsemble
    config: dict = field(default_factory=dict)
    method: str = "adagmlp"
    best_epoch: int = None
    metadata: dict = field(default_factory=dict)

    kind = KIND_ENSEMBLE

    @property
    def parameters(self):
        return self.ensemble.parameters


def _metadata(ckpt):
    metadata = {
        "kind": ckpt.kind,
        "config": ckpt.config,
        "best_epoch": ckpt.best_epoch,
        "extra": ckpt.metadata,
        "parameters": [{"id": p.id, "shape": list(p.shape)} for p in ckpt.parameters],
    }
    if ckpt.kind == KIND_TEACHER:
        metadata["architecture"] = ckpt.teacher.architecture
    else:
        ensemble = ckpt.ensemble
        metadata.update(
            method=ckpt.method,
            k=ensemble.k,
            students=[s.architecture for s in ensemble.students],
            alphas=ensemble.alphas.tolist(),
            alpha_bar=ensemble.alpha_bar.tolist(),
            combiner=ensemble.combiner,
        )
    return metadata


def save_checkpoint(ckpt, path):
    """Write ``ckpt`` to ``path``; parameters round-trip bit-exactly"""
    maybe_make_parent_dir(path)
    metadata = json.dumps(_metadata(ckpt)).encode("utf-8")
    header = np.zeros(1, dtype=CHECKPOINT_HEADER)
    header["magic"] = CHECKPOINT_MAGIC
    header["version"] = CHECKPOINT_VERSION
    header["metadata_bytes"] = len(metadata)
    logger.info(f"Writing {ckpt.kind} checkpoint to {path}")
    with open(path, "wb") as f:
        f.write(header.tobytes())
        f.write(metadata)
        for p in ckpt.parameters:
            f.write(np.ascontiguousarray(p.data, dtype="<f8").tobytes())


def _read_parameters(payload, offset, declared, path):
    parameters = {}
    for entry in declared:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape, dtype=np.int64))
        end = offset + 8 * count
        if end > len(payload):
            raise FormatError(f"{path} is truncated inside parameter {entry['id']}")
        values = np.frombuffer(payload, dtype="<f8", count=count, offset=offset)
        parameters[entry["id"]] = Parameter(entry["id"], values.reshape(shape).copy())
        offset = end
    if offset != len(payload):
        raise FormatError(f"{path} has {len(payload) - offset} trailing bytes")
    return parameters


def load_checkpoint(path):
    """Read a teacher or ensemble checkpoint written by ``save_checkpoint``"""
    with open(path, "rb") as f:
        payload = f.read()
    if len(payload) < CHECKPOINT_HEADER.itemsize:
        raise FormatError(f"{path} is too short to hold a checkpoint header")
    header = np.frombuffer(payload, dtype=CHECKPOINT_HEADER, count=1)[0]
    if header["magic"] != CHECKPOINT_MAGIC:
        raise FormatError(f"{path} does not start with {CHECKPOINT_MAGIC!r}")
    if header["version"] != CHECKPOINT_VERSION:
        raise FormatError(
            f"{path} has checkpoint version {header['version']}, "
            f"expected {CHECKPOINT_VERSION}"
        )
    start = CHECKPOINT_HEADER.itemsize
    end = start + int(header["metadata_bytes"])
    if end > len(payload):
        raise FormatError(f"{path} is truncated inside its metadata")
    try:
        metadata = json.loads(payload[start:end].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as error:
        raise FormatError(f"{path} has unreadable metadata: {error}")
    try:
        return _from_metadata(metadata, payload, end, path)
    except (KeyError, TypeError) as error:
        raise FormatError(f"{path} has incomplete metadata, missing or malformed {error}")


def _from_metadata(metadata, payload, offset, path):
    parameters = _read_parameters(payload, offset, metadata["parameters"], path)

    if metadata["kind"] == KIND_TEACHER:
        architecture = metadata["architecture"]
        n_layers = len(architecture["widths"]) - 1
        teacher = GCNTeacher(
            architecture["widths"],
            architecture["dropout"],
            weights=[parameters[f"teacher.W{l}"] for l in range(1, n_layers + 1)],
        )
        return TeacherCheckpoint(
            teacher, metadata["config"], metadata["best_epoch"], metadata["extra"]
        )
    if metadata["kind"] != KIND_ENSEMBLE:
        raise FormatError(f"{path} holds an unknown checkpoint kind {metadata['kind']!r}")

    students = []
    for key, architecture in enumerate(metadata["students"]):
        n_layers = len(architecture["widths"]) - 1
        layers = range(1, n_layers + 1)
        students.append(
            MLPStudent(
                architecture["widths"],
                architecture["dropout"],
                key=key,
                weights=[parameters[f"student{key}.W{l}"] for l in layers],
                biases=[parameters[f"student{key}.b{l}"] for l in layers],
            )
        )
    ensemble = StudentEnsemble(students, metadata["alphas"], metadata["combiner"])
    return StudentEnsembleCheckpoint(
        ensemble,
        metadata["config"],
        metadata["method"],
        metadata["best_epoch"],
        metadata["extra"],
    )
