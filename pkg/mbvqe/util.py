import os
from importlib import import_module
from pathlib import Path
from typing import Union


def class_from_dotted_string(dotted_string, base=None):
    module_name, _, class_name = dotted_string.rpartition(".")
    if not module_name:
        raise ImportError("Invalid dotted string: {}".format(dotted_string))

    found = getattr(import_module(module_name), class_name, None)
    if found is None:
        raise ImportError(
            "There is no class {} in module {}".format(class_name, module_name)
        )
    if base is not None and not (isinstance(found, type) and issubclass(found, base)):
        raise ImportError("{} is not a {}".format(dotted_string, base.__name__))
    return found


def write_artifact(directory, name: str, content: Union[str, bytes]) -> Path:
    """Write one output file next to a temporary copy and move it into place."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / name
    temporary = directory / ".{}.tmp".format(name)
    mode = "wb" if isinstance(content, bytes) else "w"
    with open(temporary, mode) as f:
        f.write(content)
    os.replace(temporary, path)
    return path
