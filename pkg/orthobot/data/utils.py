import json
import logging
import os

import numpy as np

from orthobot.exceptions import SpecError

logger = logging.getLogger(__name__)

CSV_FLOAT_FORMAT = "%.17g"


def load_spec(path):
    """
    Load a JSON spec file.

    :param path: Path of the JSON file, None for an empty spec
    :return: Dictionary of the spec
    """

    if path is None:
        return {}
    with open(path, "r") as spec_file:
        text = spec_file.read()
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as e:
        raise SpecError(
            f"malformed spec {path}: {e.msg} at line {e.lineno} column {e.colno}"
        )
    if not isinstance(spec, dict):
        raise SpecError(f"spec {path} must contain a JSON object")
    return spec


def parse_override(override):
    """
    Split a `key=value` override; the value is parsed as JSON when possible.

    :param override: String such as `ocp.lam=2.0`
    :return: Tuple of the dotted key and the value
    """

    key, separator, raw = override.partition("=")
    if not separator or not key:
        raise SpecError(f"override `{override}` must have the form key=value")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def update_return_dict(d, k, v):
    """update nested entries of a dictionary by dotted keys and return it"""
    if not (isinstance(k, list) and isinstance(v, list) and len(k) == len(v)):
        raise SpecError("`k` and `v` must be lists of equal length")

    for key, value in zip(k, v):
        target = d
        *parents, leaf = key.split(".")
        for parent in parents:
            target = target.setdefault(parent, {})
            if not isinstance(target, dict):
                raise SpecError(f"override `{key}` does not address an object")
        target[leaf] = value
    return d


def apply_overrides(spec, overrides):
    """
    Apply `key=value` overrides to a spec.

    :param spec: Dictionary of the spec
    :param overrides: Iterable of override strings
    :return: The updated spec
    """

    pairs = [parse_override(o) for o in overrides]
    for key, value in pairs:
        logger.debug(f"override {key} = {value}")
    return update_return_dict(spec, [k for k, _ in pairs], [v for _, v in pairs])


def get_dict_keys(d, k, section="spec"):
    """filter dictionary for relevant keys, rejecting unknown ones"""
    unknown = sorted(set(d) - set(k))
    if unknown:
        raise SpecError(f"unknown field(s) {unknown} in {section}")
    return {i: d[i] for i in k if i in d}


def output_path(prefix, suffix):
    """path for an artifact, creating the directory of the prefix"""
    path = f"{prefix}{suffix}"
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    return path


def write_csv(df, path):
    """write a dataframe with a header row and full float precision"""
    logger.info(f"writing {len(df)} rows to {path}")
    df.to_csv(path, index=False, float_format=CSV_FLOAT_FORMAT)
    return path


def _to_builtin(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(data, path):
    """write pretty-printed JSON"""
    logger.info(f"writing {path}")
    with open(path, "w") as json_file:
        json.dump(data, json_file, indent=2, default=_to_builtin)
        json_file.write("\n")
    return path
