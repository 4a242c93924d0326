"""
Analysis dispatch: turns a validated scenario into a result payload, runs
parameter sweeps, and wraps both in the exit-code discipline of the CLI.
"""
import logging
import sys
import time
from pathlib import Path
from typing import Callable, Dict, List, Optional, Tuple

import click
import numpy as np
import pandas as pd

from analysis.results import (ResultDocument, check_output_path, summary_text, sweep_frame,
                              write_document, write_sweep_csv)
from core.config.settings import settings
from core.exceptions import ComputationError, ScenarioError, ScenarioValidationError
from data.scenario import (COUNT_AXES, ScenarioSpec, build_game, check_sweep,
                           load_scenario, parse_scenario)
from engine.dynamics import Policy, simulate
from engine.shapley import check_axioms, shapley_exact, shapley_montecarlo
from engine.stability import core_contains, core_nonempty, is_convex, least_core, provider_deviation
from game.model import PeerAssistedGame
from game.structure import CoalitionStructure

logger = logging.getLogger(__name__)

# core_contains lists every violated coalition; documents keep the worst ones
VIOLATION_LIMIT = 50


def _floats(values) -> List[float]:
    return [float(v) for v in values]


def analyze_shapley(game: PeerAssistedGame, spec: ScenarioSpec) -> dict:
    options = spec.options
    grand = game.worth(game.grand)
    use_exact = options.method == "exact" or (
        options.method == "auto" and game.n_players <= settings.EXACT_MAX_PLAYERS)
    if use_exact:
        phi = shapley_exact(game)
        return {
            "method": "exact",
            "grand_worth": grand,
            "payoffs": _floats(phi),
            "axioms": check_axioms(game, phi).as_dict(),
        }
    samples = options.samples or settings.DEFAULT_SAMPLES
    seed = settings.DEFAULT_SEED if options.seed is None else options.seed
    estimate = shapley_montecarlo(game, samples, seed)
    return {"method": "montecarlo", "grand_worth": grand, "estimate": estimate.as_dict()}


def analyze_core(game: PeerAssistedGame, spec: ScenarioSpec) -> dict:
    tol = settings.REPORT_TOL if spec.options.tolerance is None else spec.options.tolerance
    phi = shapley_exact(game)
    membership = core_contains(game, phi, tol)
    result = core_nonempty(game)
    witness_ok = None
    if result.witness is not None:
        witness_ok = core_contains(game, result.witness, settings.REPORT_TOL).is_member
    return {
        "grand_worth": game.worth(game.grand),
        "shapley": _floats(phi),
        "membership": membership.as_dict(limit=VIOLATION_LIMIT),
        "nonempty": result.nonempty,
        "witness": _floats(result.witness) if result.witness is not None else None,
        "witness_in_core": witness_ok,
        "balanced_value": result.balanced_value,
        "convex": is_convex(game) if game.n_players <= settings.AXIOM_MAX_PLAYERS else None,
    }


def analyze_least_core(game: PeerAssistedGame, spec: ScenarioSpec) -> dict:
    result = least_core(game)
    return {
        "grand_worth": game.worth(game.grand),
        "epsilon": result.epsilon,
        "witness": _floats(result.witness),
        "bisection_steps": result.iterations,
    }


def _structure(game: PeerAssistedGame, assignment) -> CoalitionStructure:
    if assignment is None:
        return CoalitionStructure.round_robin(game)
    return CoalitionStructure.from_assignment(game, assignment)


def analyze_deviation(game: PeerAssistedGame, spec: ScenarioSpec) -> dict:
    structure = _structure(game, spec.options.structure)
    report = provider_deviation(game, structure)
    payload = report.as_dict()
    payload["structure"] = structure.as_list()
    payload["grand_shapley"] = _floats(shapley_exact(game))
    return payload


def analyze_dynamics(game: PeerAssistedGame, spec: ScenarioSpec) -> dict:
    options = spec.options
    if options.initial is None:
        init = CoalitionStructure.unattached(game)
    else:
        init = CoalitionStructure.from_assignment(game, options.initial)
    trajectory = simulate(
        game,
        init,
        max_steps=options.max_steps or settings.DEFAULT_MAX_STEPS,
        threshold=settings.SWITCH_THRESHOLD if options.threshold is None else options.threshold,
        seed=settings.DEFAULT_SEED if options.seed is None else options.seed,
        policy=Policy(options.policy),
    )
    return trajectory.as_dict()


def apply_axis(spec: ScenarioSpec, axis: str, value: float) -> ScenarioSpec:
    """The scenario with `axis` set to `value`."""
    players = list(spec.players)
    if axis in COUNT_AXES:
        providers = [players[i] for i in spec.provider_indices()]
        peers = [players[i] for i in spec.peer_indices()]
        if axis == "providers":
            providers = [providers[0]] * int(value)
        else:
            peers = [peers[0]] * int(value)
        players = providers + peers
    else:
        parts = axis.split(".")
        field = parts[-1]
        if parts[0] == "players":
            targets = [int(parts[1])]
        else:
            targets = [i for i, p in enumerate(players) if p.kind == parts[0]]
        for i in targets:
            players[i] = players[i].model_copy(update={field: float(value)})
    return spec.model_copy(update={"players": players})


def sweep_point(spec: ScenarioSpec, axis_value: float) -> dict:
    game = build_game(spec)
    phi = shapley_exact(game)
    providers = game.provider_indices()
    peers = game.peer_indices()
    report = provider_deviation(game, CoalitionStructure.round_robin(game))
    peer_sum = float(np.sum(phi[peers])) if peers else 0.0
    logger.info(f"Sweep point {axis_value:g}: {len(providers)} providers, {len(peers)} peers")
    return {
        "axis_value": axis_value,
        "total_worth": game.worth(game.grand),
        "payoffs": _floats(phi),
        "provider_payoff_sum": float(np.sum(phi[providers])) if providers else 0.0,
        "peer_payoff_sum": peer_sum,
        "per_peer_payoff": peer_sum / len(peers) if peers else 0.0,
        "deviation": report.as_dict(),
    }


def _row(point: dict) -> dict:
    gains = [d["gain"] for d in point["deviation"]["providers"]]
    return {
        "axis_value": point["axis_value"],
        "total_worth": point["total_worth"],
        "provider_payoff_sum": point["provider_payoff_sum"],
        "peer_payoff_sum": point["peer_payoff_sum"],
        "per_peer_payoff": point["per_peer_payoff"],
        "max_deviation_gain": max(gains, default=0.0),
        "deviation_verdict": point["deviation"]["verdict"],
    }


def sweep(spec: ScenarioSpec, axis: Optional[str] = None,
          grid: Optional[Tuple[float, float, float]] = None) -> Tuple[ResultDocument, pd.DataFrame]:
    """One sub-payload per grid point plus the matching CSV table."""
    if axis is not None or grid is not None:
        spec = with_sweep(spec, axis, grid)
    if spec.sweep is None:
        raise ScenarioValidationError("sweep", "no sweep axis or grid given")
    check_sweep(spec, spec.sweep)

    started = time.perf_counter()
    points = [sweep_point(apply_axis(spec, spec.sweep.axis, value), value) for value in spec.sweep.values()]
    rows = [_row(point) for point in points]
    payload = {"axis": spec.sweep.axis, "points": points, "rows": rows}
    document = ResultDocument(scenario=spec, payload=payload, duration_seconds=time.perf_counter() - started)
    return document, sweep_frame(rows)


def with_sweep(spec: ScenarioSpec, axis: Optional[str],
               grid: Optional[Tuple[float, float, float]]) -> ScenarioSpec:
    raw = spec.model_dump(mode="json")
    current = raw.get("sweep") or {}
    if axis is not None:
        current["axis"] = axis
    if grid is not None:
        current.update(start=grid[0], stop=grid[1], step=grid[2])
    raw["sweep"] = current
    raw["analysis"] = "sweep"
    return parse_scenario(raw)


def parse_grid(text: str) -> Tuple[float, float, float]:
    parts = [p.strip() for p in text.split(",")] if text else []
    if len(parts) != 3:
        raise ScenarioValidationError("sweep.grid", f"expected 'start,stop,step', got '{text}'")
    try:
        start, stop, step = (float(p) for p in parts)
    except ValueError as e:
        raise ScenarioValidationError("sweep.grid", f"'{text}' is not numeric") from e
    return start, stop, step


def apply_overrides(spec: ScenarioSpec, overrides: Optional[Dict]) -> ScenarioSpec:
    updates = {k: v for k, v in (overrides or {}).items() if v is not None}
    if not updates:
        return spec
    raw = spec.model_dump(mode="json")
    raw["options"].update(updates)
    return parse_scenario(raw)


ANALYZERS: Dict[str, Callable[[PeerAssistedGame, ScenarioSpec], dict]] = {
    "shapley": analyze_shapley,
    "core": analyze_core,
    "leastcore": analyze_least_core,
    "deviate": analyze_deviation,
    "dynamics": analyze_dynamics,
}


def execute(spec: ScenarioSpec) -> ResultDocument:
    if spec.analysis == "sweep":
        document, _ = sweep(spec)
        return document
    game = build_game(spec)
    logger.info(f"Running {spec.analysis} on {game.n_players} players")
    started = time.perf_counter()
    payload = ANALYZERS[spec.analysis](game, spec)
    return ResultDocument(scenario=spec, payload=payload, duration_seconds=time.perf_counter() - started)


def _emit(document: ResultDocument, out_path: Optional[str]) -> None:
    text = write_document(document, out_path)
    if not out_path:
        sys.stdout.write(text)
    click.echo(summary_text(document.scenario, document.payload), err=True)


def _fail(error: Exception) -> int:
    if isinstance(error, ComputationError) and error.operation:
        logger.error(f"{error.operation} failed: {error}")
    else:
        logger.error(str(error))
    return error.exit_code


def run(spec_path: str, out_path: Optional[str] = None, overrides: Optional[Dict] = None) -> int:
    """Load, validate, compute and write; the exit code is 0, 1 (input) or 2 (computation)."""
    try:
        check_output_path(out_path)
        spec = apply_overrides(load_scenario(spec_path), overrides)
        document = execute(spec)
        _emit(document, out_path)
    except (ScenarioError, ComputationError) as e:
        return _fail(e)
    return 0


def run_sweep(spec_path: str, axis: Optional[str], grid: Optional[str], out_path: Optional[str] = None,
              csv_path: Optional[str] = None, overrides: Optional[Dict] = None) -> int:
    if csv_path is None and out_path:
        csv_path = str(Path(out_path).with_suffix(".csv"))
    try:
        check_output_path(out_path)
        check_output_path(csv_path)
        spec = apply_overrides(load_scenario(spec_path), overrides)
        document, frame = sweep(spec, axis, parse_grid(grid) if grid is not None else None)
        _emit(document, out_path)
        if csv_path:
            write_sweep_csv(frame, csv_path)
    except (ScenarioError, ComputationError) as e:
        return _fail(e)
    return 0
