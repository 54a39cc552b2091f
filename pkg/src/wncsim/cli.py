"""Command line front end.

Every subcommand talks to the HTTP service: against an in-process app by
default, or against a running server when --server is given. That keeps one
code path for results whichever way they are produced.
"""

import dataclasses

import click
import httpx

from .delay_approx import Series
from .harness import MODES, load_scenario

SERIES_NAMES = tuple(s.value for s in Series)


def _open_client(server):
    if server:
        return httpx.Client(base_url=server)
    from fastapi.testclient import TestClient

    from .service import create_app

    return TestClient(create_app())


def _post(ctx, path, payload):
    with _open_client(ctx.obj["server"]) as client:
        try:
            resp = client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise click.ClickException(f"service unreachable: {exc}")
    if resp.status_code != 200:
        try:
            detail = resp.json().get("detail", resp.text)
        except ValueError:
            detail = resp.text
        raise click.ClickException(f"{path} failed ({resp.status_code}): {detail}")
    return resp.json()


def _write_text(path, text):
    with open(path, "w", newline="") as handle:
        handle.write(text)


@click.group()
@click.option("--server", default=None, metavar="URL",
              help="Base URL of a running service; default runs in process.")
@click.pass_context
def main(ctx, server):
    """Networked DC-servo loop simulator and delay-margin analysis."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server


@main.command()
@click.option("--scenario", "scenario_path", default=None,
              type=click.Path(exists=True, dir_okay=False),
              help="Scenario file; omitted fields keep their defaults.")
@click.option("--mode", default=None, type=click.Choice(MODES),
              help="Override the scenario mode.")
@click.option("--series", default=None, type=click.Choice(SERIES_NAMES),
              help="Override the approximant family.")
@click.option("--seed", default=None, type=int, help="Override the channel seed.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Write the trace CSV here.")
@click.pass_context
def run(ctx, scenario_path, mode, series, seed, out_path):
    """Run one closed-loop scenario and print its metrics."""
    if scenario_path:
        payload = dataclasses.asdict(load_scenario(scenario_path))
    else:
        payload = {}
    for key, value in (("mode", mode), ("series", series), ("seed", seed)):
        if value is not None:
            payload[key] = value
    data = _post(ctx, "/run", payload)
    metrics = data["metrics"]
    click.echo(f"samples: {data['samples']}")
    click.echo(f"max duty: {metrics['max_duty']:.2f}%")
    click.echo(f"min duty: {metrics['min_duty']:.2f}%")
    click.echo(f"sse: {metrics['sse_pct']:.3f}%")
    click.echo(f"oscillating: {'yes' if metrics['oscillating'] else 'no'}")
    if metrics["settling_time"] is None:
        click.echo("settling time: never")
    else:
        click.echo(f"settling time: {metrics['settling_time']:.2f} s")
    if out_path:
        _write_text(out_path, data["csv"])
        click.echo(f"trace written to {out_path}")


@main.command("sweep-stability")
@click.option("--td-min", type=float, required=True, help="Smallest delay, seconds.")
@click.option("--td-max", type=float, required=True, help="Largest delay, seconds.")
@click.option("--steps", type=int, default=25, show_default=True,
              help="Number of grid points, inclusive of both ends.")
@click.option("--out", "out_path", default=None, type=click.Path(dir_okay=False),
              help="Write the CSV here instead of stdout.")
@click.pass_context
def sweep_stability(ctx, td_min, td_max, steps, out_path):
    """Rightmost characteristic root over a delay grid, as td,rightmost_real CSV."""
    data = _post(ctx, "/stability/sweep",
                 {"td_min": td_min, "td_max": td_max, "steps": steps})
    if out_path:
        _write_text(out_path, data["csv"])
        click.echo(f"sweep written to {out_path}")
    else:
        click.echo(data["csv"], nl=False)


@main.command("ise-table")
@click.option("--taus", default="0.04,0.24,1", show_default=True,
              help="Comma-separated delays, seconds.")
@click.pass_context
def ise_table(ctx, taus):
    """Step-response ISE of each approximant family per delay, plus the average."""
    try:
        tau_values = [float(part) for part in taus.split(",") if part.strip()]
    except ValueError:
        raise click.ClickException(f"could not parse --taus {taus!r}")
    data = _post(ctx, "/ise-table", {"taus": tau_values})
    header = ["series"] + [f"tau={tau:g}" for tau in data["taus"]] + ["average"]
    widths = [10] + [12] * (len(header) - 1)
    click.echo("".join(name.ljust(w) for name, w in zip(header, widths)))
    for row in data["rows"]:
        cells = [row["series"].ljust(widths[0])]
        for value, width in zip(row["ise"] + [row["average"]], widths[1:]):
            cells.append(f"{value:.4f}".ljust(width))
        click.echo("".join(cells))


@main.command("critical-delay")
@click.option("--t-lo", type=float, default=0.1, show_default=True,
              help="Lower bisection bracket, seconds.")
@click.option("--t-hi", type=float, default=0.8, show_default=True,
              help="Upper bisection bracket, seconds.")
@click.option("--tol", type=float, default=1e-4, show_default=True,
              help="Bisection tolerance, seconds.")
@click.pass_context
def critical_delay_cmd(ctx, t_lo, t_hi, tol):
    """Delay margin of the speed loop: bisection plus the crossing-condition check."""
    data = _post(ctx, "/stability/critical-delay",
                 {"t_lo": t_lo, "t_hi": t_hi, "tol": tol})
    click.echo(f"critical delay: {data['critical_delay']:.6f} s")
    click.echo(f"crossing condition: omega = {data['oracle_omega']:.6f} rad/s, "
               f"delay = {data['oracle_delay']:.6f} s")
    click.echo(f"difference: {data['difference']:.2e} s")


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
def serve(host, port):
    """Run the HTTP service with uvicorn."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
