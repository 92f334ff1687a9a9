"""
Identity Registry

Catalogue of every identity the suites verify. Entries are keyed by their
reference id where one exists and carry a descriptive name that selects
the suite check; the name doubles as the id otherwise.
"""

import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Optional


logger = logging.getLogger(__name__)


DEFAULT_REGISTRY_PATH = Path(__file__).parent / "identity_registry.json"

TIERS = ['algebraic', 'derivative', 'curvature', 'transfer', 'finite_difference']


@dataclass(frozen=True)
class IdentityEntry:
    identity_id: str
    name: str
    suite: str
    description: str
    tier: str
    formula: str
    alternate: Optional[str] = None
    untested: Optional[str] = None


class IdentityRegistry:
    """
    Ordered catalogue of identities

    Suite order follows the "suites" list of the registry file; identities
    within a suite keep file order.
    """

    def __init__(self, registry_path: Optional[str] = None):
        self.registry_path = Path(registry_path) if registry_path else DEFAULT_REGISTRY_PATH
        self.version = ""
        self.suites: List[str] = []
        self.entries: Dict[str, IdentityEntry] = {}
        self._load_registry()

    def _load_registry(self):
        with open(self.registry_path, 'r', encoding='utf-8') as f:
            data = json.load(f)
        self.version = data.get("version", "")
        self.suites = list(data.get("suites", []))
        for identity_id, info in data.get("identities", {}).items():
            tier = info["tier"]
            if tier not in TIERS:
                raise ValueError(f"Invalid tier for {identity_id}: {tier}. Must be one of: {', '.join(TIERS)}")
            if info["suite"] not in self.suites:
                raise ValueError(f"Unknown suite for {identity_id}: {info['suite']}")
            self.entries[identity_id] = IdentityEntry(
                identity_id=identity_id,
                name=info.get("name", identity_id),
                suite=info["suite"],
                description=info["description"],
                tier=tier,
                formula=info.get("formula", ""),
                alternate=info.get("alternate"),
                untested=info.get("untested"),
            )
        logger.info(f"Loaded identity registry {self.version} with {len(self.entries)} identities")

    def get(self, identity_id: str) -> IdentityEntry:
        """
        Raises:
            KeyError: If the identity is not registered
        """
        if identity_id not in self.entries:
            raise KeyError(f"Unknown identity: {identity_id}")
        return self.entries[identity_id]

    def by_name(self, name: str) -> IdentityEntry:
        for entry in self.entries.values():
            if entry.name == name:
                return entry
        raise KeyError(f"Unknown identity: {name}")

    def for_suite(self, suite: str) -> List[IdentityEntry]:
        return [e for e in self.entries.values() if e.suite == suite]

    def ordered(self, suites: Optional[List[str]] = None) -> List[IdentityEntry]:
        selected = suites or self.suites
        return [e for s in self.suites if s in selected for e in self.for_suite(s)]

    def __contains__(self, identity_id: str) -> bool:
        return identity_id in self.entries

    def __len__(self) -> int:
        return len(self.entries)


_default_registry: Optional[IdentityRegistry] = None


def get_registry() -> IdentityRegistry:
    global _default_registry
    if _default_registry is None:
        _default_registry = IdentityRegistry()
    return _default_registry
