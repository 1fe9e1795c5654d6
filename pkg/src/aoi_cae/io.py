"""JSON instance files."""

from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

from .model import SystemInstance, validate_instance


class InstanceLoadError(ValueError):
    """Unreadable, unparsable or invalid instance file.

    ``problems`` lists one message per issue, each prefixed with a field
    path or a ``line:column`` location.
    """

    def __init__(self, path, problems: list[str]):
        self.path = str(path)
        self.problems = problems
        super().__init__(f"{path}: " + "; ".join(problems))


def parse_instance(text: str, origin: str = "<string>") -> SystemInstance:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceLoadError(origin, [f"parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from exc
    try:
        instance = SystemInstance.from_dict(data)
    except (KeyError, TypeError) as exc:
        msg = exc.args[0] if exc.args else str(exc)
        raise InstanceLoadError(origin, [str(msg)]) from exc
    report = validate_instance(instance)
    if not report.ok:
        raise InstanceLoadError(origin, report.errors)
    return instance


def load_instance(path) -> SystemInstance:
    """Read, parse and validate an instance file.

    Raises ``FileNotFoundError`` for a missing file and
    :class:`InstanceLoadError` for everything else.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_instance(text, str(path))


def dump_instance(instance: SystemInstance) -> str:
    return json.dumps(instance.to_dict(), indent=2) + "\n"


def table1_path():
    return resources.files("aoi_cae.data").joinpath("table1.json")


def table1() -> SystemInstance:
    """The reference parameter set shipped with the package."""
    return parse_instance(table1_path().read_text(encoding="utf-8"), "table1.json")
