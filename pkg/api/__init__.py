# api/__init__.py
"""
명령 라우터 - 웹 라우터가 endpoint 를 등록하듯 서브커맨드 handler 를 등록한다.
main.py 가 모든 라우터를 argparse 파서에 포함(include)시킨다.
"""

from dataclasses import dataclass, field
from typing import Callable, Dict, List, Tuple

from models.errors import InvalidParameterError
from models.schemas import CommandOutput, RunConfig

Handler = Callable[[RunConfig], CommandOutput]


@dataclass(frozen=True)
class Command:
    name: str
    handler: Handler
    help: str = ""
    # 각 항목은 필수 필드 이름, "n|n_grid" 처럼 쓰면 둘 중 하나
    requires: Tuple[str, ...] = field(default_factory=tuple)

    def missing(self, config: RunConfig) -> List[str]:
        result = []
        for requirement in self.requires:
            options = requirement.split("|")
            if all(getattr(config, option) in (None, []) for option in options):
                result.append(" 또는 ".join(f"--{option.replace('_', '-')}" for option in options))
        return result


class CommandRouter:
    def __init__(self):
        self.commands: Dict[str, Command] = {}

    def command(self, name: str, *, help: str = "", requires: Tuple[str, ...] = ()):
        def decorator(fn: Handler) -> Handler:
            if name in self.commands:
                raise ValueError(f"명령 '{name}' 이 이미 등록되어 있습니다")
            self.commands[name] = Command(name=name, handler=fn, help=help or (fn.__doc__ or "").strip(), requires=requires)
            return fn
        return decorator


def grid_of(config: RunConfig) -> List[int]:
    """--n-grid 가 있으면 그것, 없으면 [--n]"""
    if config.n_grid:
        return list(config.n_grid)
    if config.n is None:
        raise InvalidParameterError("--n 또는 --n-grid 가 필요합니다")
    return [config.n]
