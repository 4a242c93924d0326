"""
Main application entry point
"""
import logging
import sys
import os
from pathlib import Path

# Add src to path so we can import our modules
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import click
from core.config.settings import settings

# Setup logging; data goes to stdout, everything else to stderr
logging.basicConfig(
    level=settings.LOG_LEVEL,
    format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
    stream=sys.stderr,
)
logger = logging.getLogger(__name__)

SCENARIO_DIR = Path(__file__).parent / "data" / "scenarios"


@click.group()
@click.option('--verbose', is_flag=True, help='Log solver internals')
def cli(verbose):
    """Coalition Incentive Engine CLI"""
    if verbose:
        logging.getLogger().setLevel(logging.DEBUG)
    click.echo(f"🤝 {settings.APP_NAME} v{settings.VERSION}", err=True)
    click.echo("=" * 40, err=True)


@cli.command()
@click.argument('spec_path', type=click.Path(dir_okay=False))
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='Write the result document here')
@click.option('--seed', type=int, help='Override the scenario seed')
@click.option('--samples', type=int, help='Override the Monte Carlo sample count')
@click.option('--max-steps', type=int, help='Override the dynamics step limit')
def run(spec_path, out_path, seed, samples, max_steps):
    """Run the analysis named in a scenario file"""
    from analysis.runner import run as run_scenario

    code = run_scenario(spec_path, out_path, {"seed": seed, "samples": samples, "max_steps": max_steps})
    if code == 0:
        click.echo("✅ Analysis completed!", err=True)
    else:
        click.echo(f"❌ Analysis failed (exit {code})", err=True)
    sys.exit(code)


@cli.command()
@click.argument('spec_path', type=click.Path(dir_okay=False))
@click.option('--axis', help="'providers', 'peers', 'provider.<field>', 'peer.upload' or 'players.<i>.<field>'")
@click.option('--grid', help="start,stop,step")
@click.option('--out', 'out_path', type=click.Path(dir_okay=False), help='Write the result document here')
@click.option('--csv', 'csv_path', type=click.Path(dir_okay=False), help='Write the sweep table here')
@click.option('--seed', type=int, help='Override the scenario seed')
def sweep(spec_path, axis, grid, out_path, csv_path, seed):
    """Sweep one scenario parameter over a grid"""
    from analysis.runner import run_sweep

    code = run_sweep(spec_path, axis, grid, out_path, csv_path, {"seed": seed})
    if code == 0:
        click.echo("✅ Sweep completed!", err=True)
    else:
        click.echo(f"❌ Sweep failed (exit {code})", err=True)
    sys.exit(code)


@cli.command('enumerate-stable')
@click.argument('spec_path', type=click.Path(dir_okay=False))
def enumerate_stable(spec_path):
    """List every Nash-stable peer assignment of a scenario"""
    from analysis.results import dumps
    from core.exceptions import CoalitionError
    from data.scenario import build_game, load_scenario
    from engine.dynamics import nash_stable_states, peer_payoffs

    try:
        spec = load_scenario(spec_path)
        game = build_game(spec)
        threshold = settings.SWITCH_THRESHOLD if spec.options.threshold is None else spec.options.threshold
        stable = nash_stable_states(game, threshold)
        listing = [{"assignment": state.as_list(),
                    "payoffs": [float(x) for x in peer_payoffs(game, state)]}
                   for state in stable]
    except CoalitionError as e:
        logger.error(str(e))
        click.echo(f"❌ Enumeration failed: {e}", err=True)
        sys.exit(e.exit_code)

    sys.stdout.write(dumps({"peers": game.peer_indices(), "stable": listing}))
    click.echo(f"🔍 {len(listing)} Nash-stable assignments", err=True)


@cli.command()
def status():
    """Show system status"""
    click.echo("📋 System Status:")
    click.echo(f"   App: {settings.APP_NAME}")
    click.echo(f"   Version: {settings.VERSION}")
    click.echo(f"   Debug: {settings.DEBUG}")
    click.echo(f"   Threads: {settings.THREADS}")
    click.echo(f"   Exact Shapley up to {settings.EXACT_MAX_PLAYERS} players, "
               f"core LP up to {settings.LP_MAX_PLAYERS}")

    scenarios = sorted(SCENARIO_DIR.glob("*.json"))
    if scenarios:
        click.echo(f"   Scenarios: ✅ {len(scenarios)} shipped")
        for path in scenarios:
            click.echo(f"      - {path.name}")
    else:
        click.echo("   Scenarios: ❌ none found")


@cli.command()
def demo():
    """Run every shipped scenario and print its summary"""
    from analysis.results import summary_text
    from analysis.runner import execute
    from core.exceptions import CoalitionError
    from data.scenario import load_scenario

    click.echo("🚀 Running complete demo...")
    failures = 0
    for path in sorted(SCENARIO_DIR.glob("*.json")):
        click.echo(f"\n📊 {path.name}")
        try:
            document = execute(load_scenario(path))
        except CoalitionError as e:
            failures += 1
            click.echo(f"❌ {path.name} failed: {e}")
            continue
        click.echo(summary_text(document.scenario, document.payload))

    if failures:
        click.echo(f"\n❌ {failures} scenarios failed")
        sys.exit(2)
    click.echo("\n🎉 DEMO COMPLETED SUCCESSFULLY!")


if __name__ == "__main__":
    cli()
