"""
Scenario files: the JSON documents the CLI consumes.

    {
      "name": "...",                      (optional)
      "players": [{"kind": "provider", "subscribers": 10, "revenue": 1, "demand": 1, "cost": 0.5},
                  {"kind": "peer", "upload": 4}],
      "analysis": "shapley | core | leastcore | deviate | dynamics | sweep",
      "options": {...},                   (optional)
      "sweep": {"axis": "providers", "start": 1, "stop": 3, "step": 1}   (sweep only)
    }

Unknown fields are rejected everywhere.
"""
import json
import logging
import math
from pathlib import Path
from typing import Annotated, List, Literal, Optional, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from core.exceptions import (ComputationError, ScenarioFileNotFound, ScenarioParseError,
                             ScenarioValidationError)
from game.model import Peer, PeerAssistedGame, PlayerKind, Provider, make_game

logger = logging.getLogger(__name__)

PROVIDER_FIELDS = ("subscribers", "revenue", "demand", "cost")
PEER_FIELDS = ("upload",)
COUNT_AXES = ("providers", "peers")

NonNegative = Annotated[float, Field(ge=0, allow_inf_nan=False)]


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ProviderSpec(StrictModel):
    kind: Literal["provider"]
    subscribers: NonNegative
    revenue: NonNegative
    demand: NonNegative
    cost: NonNegative

    def to_kind(self) -> Provider:
        return Provider(subscribers=self.subscribers, revenue_per_subscriber=self.revenue,
                        demand_per_subscriber=self.demand, server_cost_per_bandwidth=self.cost)


class PeerSpec(StrictModel):
    kind: Literal["peer"]
    upload: NonNegative

    def to_kind(self) -> Peer:
        return Peer(upload_capacity=self.upload)


PlayerSpec = Annotated[Union[ProviderSpec, PeerSpec], Field(discriminator="kind")]


class OptionsSpec(StrictModel):
    method: Literal["auto", "exact", "montecarlo"] = "auto"
    samples: Optional[int] = Field(default=None, ge=1)
    seed: Optional[int] = Field(default=None, ge=0, lt=1 << 64)
    tolerance: Optional[NonNegative] = None
    structure: Optional[List[Optional[int]]] = None
    initial: Optional[List[Optional[int]]] = None
    max_steps: Optional[int] = Field(default=None, ge=1)
    threshold: Optional[NonNegative] = None
    policy: Literal["round_robin", "random_order"] = "round_robin"


class SweepSpec(StrictModel):
    axis: str
    start: float = Field(allow_inf_nan=False)
    stop: float = Field(allow_inf_nan=False)
    step: float = Field(gt=0, allow_inf_nan=False)

    def values(self) -> List[float]:
        if self.stop < self.start:
            return []
        count = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return [self.start + k * self.step for k in range(count)]


class ScenarioSpec(StrictModel):
    name: Optional[str] = None
    players: List[PlayerSpec] = Field(min_length=1, max_length=64)
    analysis: Literal["shapley", "core", "leastcore", "deviate", "dynamics", "sweep"]
    options: OptionsSpec = Field(default_factory=OptionsSpec)
    sweep: Optional[SweepSpec] = None

    def provider_indices(self) -> List[int]:
        return [i for i, p in enumerate(self.players) if p.kind == "provider"]

    def peer_indices(self) -> List[int]:
        return [i for i, p in enumerate(self.players) if p.kind == "peer"]

    def player_kinds(self) -> List[PlayerKind]:
        return [p.to_kind() for p in self.players]


def check_axis(spec: ScenarioSpec, axis: str) -> None:
    if axis in COUNT_AXES:
        template = spec.provider_indices() if axis == "providers" else spec.peer_indices()
        if not template:
            raise ScenarioValidationError("sweep.axis", f"'{axis}' needs one {axis[:-1]} to replicate")
        return
    parts = axis.split(".")
    if len(parts) == 2 and parts[0] == "provider" and parts[1] in PROVIDER_FIELDS:
        if not spec.provider_indices():
            raise ScenarioValidationError("sweep.axis", f"'{axis}' needs at least one provider")
        return
    if len(parts) == 2 and parts[0] == "peer" and parts[1] in PEER_FIELDS:
        if not spec.peer_indices():
            raise ScenarioValidationError("sweep.axis", f"'{axis}' needs at least one peer")
        return
    if len(parts) == 3 and parts[0] == "players" and parts[1].isdigit():
        index = int(parts[1])
        if index >= len(spec.players):
            raise ScenarioValidationError("sweep.axis", f"player {index} does not exist")
        allowed = PROVIDER_FIELDS if spec.players[index].kind == "provider" else PEER_FIELDS
        if parts[2] in allowed:
            return
    raise ScenarioValidationError("sweep.axis", f"'{axis}' is not a numeric scenario parameter")


def check_sweep(spec: ScenarioSpec, sweep: SweepSpec) -> None:
    check_axis(spec, sweep.axis)
    values = sweep.values()
    if not values:
        raise ScenarioValidationError("sweep.grid", "the grid is empty")
    if sweep.axis in COUNT_AXES and any(v != int(v) or v < 0 for v in values):
        raise ScenarioValidationError("sweep.grid", f"'{sweep.axis}' needs non-negative whole numbers")
    if sweep.axis.split(".")[-1] in PROVIDER_FIELDS + PEER_FIELDS and any(v < 0 for v in values):
        raise ScenarioValidationError("sweep.grid", "parameter values must be non-negative")


def _check_assignment(spec: ScenarioSpec, field: str, assignment: Optional[List[Optional[int]]]) -> None:
    if assignment is None:
        return
    peers = spec.peer_indices()
    if len(assignment) != len(peers):
        raise ScenarioValidationError(field, f"expected one entry per peer ({len(peers)}), got {len(assignment)}")
    providers = set(spec.provider_indices())
    for entry in assignment:
        if entry is not None and entry not in providers:
            raise ScenarioValidationError(field, f"{entry} is not a provider index")


def _check_cross_fields(spec: ScenarioSpec) -> None:
    _check_assignment(spec, "options.structure", spec.options.structure)
    _check_assignment(spec, "options.initial", spec.options.initial)
    if spec.analysis == "sweep":
        if spec.sweep is None:
            raise ScenarioValidationError("sweep", "a sweep analysis needs a sweep section")
        check_sweep(spec, spec.sweep)


def parse_scenario(raw) -> ScenarioSpec:
    try:
        spec = ScenarioSpec.model_validate(raw)
    except ValidationError as e:
        first = e.errors()[0]
        field = ".".join(str(part) for part in first["loc"]) or "<root>"
        raise ScenarioValidationError(field, first["msg"]) from e
    _check_cross_fields(spec)
    return spec


def load_scenario(path) -> ScenarioSpec:
    path = Path(path)
    if not path.is_file():
        raise ScenarioFileNotFound(str(path))
    text = path.read_text(encoding="utf-8")
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(str(path), e.lineno, e.colno, e.msg) from e
    spec = parse_scenario(raw)
    logger.info(f"Loaded scenario {spec.name or path.name}: {len(spec.players)} players, analysis {spec.analysis}")
    return spec


def build_game(spec: ScenarioSpec) -> PeerAssistedGame:
    try:
        return make_game(spec.player_kinds())
    except ComputationError as e:
        raise ScenarioValidationError("players", str(e)) from e
