"""
Engine registry to select gate engines by configuration name.

This module maps the configuration strings "clear" and "tlwe-oracle" to engine
factories so the server, client and bench tools can build engines from flags or
environment variables.
"""

import logging
from typing import Callable, Dict, Optional

from .gate_engine import ClearEngine, GateEngine, TlweOracleEngine

logger = logging.getLogger(__name__)

EngineFactory = Callable[..., GateEngine]


class EngineRegistry:
    """A registry of gate engine factories."""

    def __init__(self):
        self._factories: Dict[str, EngineFactory] = {}

    def register_engine(self, name: str, factory: EngineFactory) -> None:
        """
        Register an engine factory under a configuration name.

        Args:
            name: The configuration string, e.g. 'clear'
            factory: A callable returning a GateEngine
        """
        if not callable(factory):
            raise TypeError(f"Engine factory for '{name}' must be callable")
        self._factories[name] = factory
        logger.debug("Registered engine '%s'", name)

    def get_engine(self, name: str) -> Optional[EngineFactory]:
        return self._factories.get(name)

    def available_engines(self) -> list[str]:
        return sorted(self._factories)

    def create_engine(self, name: str, **kwargs) -> GateEngine:
        """
        Build an engine by name.

        Args:
            name: The configuration string
            **kwargs: Passed to the factory (sk, sampler, gate_delay_ms, debug, ...)

        Returns:
            A new GateEngine

        Raises:
            ValueError: If no engine is registered under ``name``
        """
        factory = self.get_engine(name)
        if factory is None:
            raise ValueError(
                f"Unknown engine '{name}', expected one of {self.available_engines()}"
            )
        engine = factory(**kwargs)
        if isinstance(engine, TlweOracleEngine):
            logger.warning(
                "Engine '%s' holds the secret key; use for demonstrations only", name
            )
        logger.info("Created engine '%s'", name)
        return engine


def _clear_factory(*, sk=None, sampler=None, debug: bool = False, **kwargs) -> ClearEngine:
    return ClearEngine(**kwargs)


def _oracle_factory(*, sk=None, sampler=None, **kwargs) -> TlweOracleEngine:
    if sk is None:
        raise ValueError("The tlwe-oracle engine needs the secret key (insecure demo mode)")
    return TlweOracleEngine(sk, sampler, **kwargs)


# Create a singleton instance
_registry = EngineRegistry()
_registry.register_engine(ClearEngine.tag, _clear_factory)
_registry.register_engine(TlweOracleEngine.tag, _oracle_factory)

# Export convenience functions
register_engine = _registry.register_engine
get_engine = _registry.get_engine
available_engines = _registry.available_engines
create_engine = _registry.create_engine
