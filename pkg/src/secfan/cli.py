"""Command-line front end: a thin client over the HTTP service.

By default the CLI talks to the service in-process through an ASGI transport,
so no server needs to be running; --server switches to a live instance.
Exit codes: 0 success / verified, 1 verified-false, 2 input error, 3 query
error (a point on a stratum boundary, an empty chamber, and the like).
"""

from __future__ import annotations

import json
import sys

import click
import httpx


def _request(server: str | None, path: str, payload: dict) -> httpx.Response:
    if server:
        with httpx.Client(base_url=server, timeout=600.0) as client:
            return client.post(path, json=payload)

    import asyncio

    from .service import app

    async def go():
        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://secfan.local", timeout=None
        ) as client:
            return await client.post(path, json=payload)

    return asyncio.run(go())


def _load_problem(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise click.ClickException(f"cannot read problem file: {exc}")
    if not isinstance(data, dict):
        raise click.ClickException("problem file must be a JSON object")
    keys = [k for k in ("weights", "points") if k in data]
    if len(keys) != 1:
        _fail("problem file needs exactly one of 'weights' or 'points'", 2)
    return data


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _post(ctx, path: str, payload: dict) -> dict:
    try:
        resp = _request(ctx.obj.get("server"), path, payload)
    except httpx.HTTPError as exc:
        _fail(f"service unreachable: {exc}", 2)
    if resp.status_code == 422:
        _fail(f"malformed request: {resp.text}", 2)
    body = resp.json()
    if resp.status_code >= 400:
        err = body.get("error", {})
        kind = err.get("kind", "input")
        _fail(err.get("message", resp.text), 2 if kind == "input" else 3)
    return body


def _emit_json(data, path):
    text = json.dumps(data, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    return text


@click.group()
@click.option("--server", default=None, help="URL of a running secfan service.")
@click.option("-q", "--quiet", is_flag=True, help="Suppress human-readable output.")
@click.pass_context
def main(ctx, server, quiet):
    """Exact GKZ fans, stacky volumes and SOD multiplicities for toric GIT."""
    ctx.ensure_object(dict)
    ctx.obj["server"] = server
    ctx.obj["quiet"] = quiet


def _say(ctx, message):
    if not ctx.obj.get("quiet"):
        click.echo(message)


input_opt = click.option(
    "-i", "--input", "input_path", required=True, type=click.Path(), help="Problem JSON file."
)
json_opt = click.option("--json", "json_path", default=None, type=click.Path(), help="Write the raw JSON report here.")


@main.command()
@input_opt
@json_opt
@click.option("--plot", "plot_path", default=None, type=click.Path(), help="Write plot data (segments) here.")
@click.option("--slice", "slice_spec", default=None, help="k=3 plot slice: a,b,c,d for the plane ax+by+cz=d.")
@click.pass_context
def fan(ctx, input_path, json_path, plot_path, slice_spec):
    """Chamber and wall census of the GKZ fan."""
    payload = _load_problem(input_path)
    if plot_path or slice_spec:
        payload["plot"] = True
    if slice_spec:
        payload["slice"] = slice_spec.split(",")
    data = _post(ctx, "/fan", payload)
    empty = ", empty chamber present" if data["has_empty_chamber"] else ""
    _say(ctx, f"{data['num_chambers']} chambers, {data['num_walls']} walls{empty}")
    if json_path:
        _emit_json(data, json_path)
    if plot_path:
        _emit_json(data.get("plot", {}), plot_path)


@main.command()
@input_opt
@json_opt
@click.pass_context
def faces(ctx, input_path, json_path):
    """Minimal faces, their components' ranks, and relevant subspaces."""
    data = _post(ctx, "/faces", _load_problem(input_path))
    for f in data["minimal_faces"]:
        _say(ctx, f"{f['id']}: rank {f['rank']}")
    if json_path:
        _emit_json(data, json_path)


@main.command()
@input_opt
@json_opt
@click.option("--chamber", "chamber_spec", required=True, help="Sample point c1,...,ck (rationals).")
@click.pass_context
def sod(ctx, input_path, json_path, chamber_spec):
    """Multiplicities of the irreducible components in a chamber's phase."""
    payload = _load_problem(input_path)
    payload["chamber"] = chamber_spec.split(",")
    data = _post(ctx, "/sod", payload)
    for row in data["table"]:
        _say(ctx, f"{row['face']}: n = {row['multiplicity']}, rank = {row['rank']}")
    _say(ctx, f"vol {data['volume']} = {data['ledger']}")
    if json_path:
        _emit_json(data, json_path)


@main.command()
@input_opt
@json_opt
@click.pass_context
def walls(ctx, input_path, json_path):
    """Wall census with conormals, degrees and wall-phase ranks."""
    data = _post(ctx, "/walls", _load_problem(input_path))
    for w in data["walls"]:
        _say(
            ctx,
            f"W{w['id']}: lambda={w['lambda']} d={w['d']} rank_ZW={w['rank_ZW']} sides={w['sides']}",
        )
    if json_path:
        _emit_json(data, json_path)


@main.command()
@input_opt
@json_opt
@click.option("--chamber", "chamber_spec", required=True, help="Sample point c1,...,ck.")
@click.pass_context
def run(ctx, input_path, json_path, chamber_spec):
    """Walls crossed by the straight-line run toward the minimal phase."""
    payload = _load_problem(input_path)
    payload["chamber"] = chamber_spec.split(",")
    data = _post(ctx, "/run", payload)
    ids = [w["id"] for w in data["walls"]]
    _say(ctx, f"crossed {len(ids)} walls: {ids}")
    if json_path:
        _emit_json(data, json_path)


@main.command()
@input_opt
@json_opt
@click.option("--direction", required=True, help="Integer curve direction d1,...,dk.")
@click.option("--wall-point", "wall_point", required=True, help="A point in the wall's relative interior.")
@click.pass_context
def tropical(ctx, input_path, json_path, direction, wall_point):
    """Tropical intersection number of a curve direction with a wall."""
    payload = _load_problem(input_path)
    payload["direction"] = [int(x) for x in direction.split(",")]
    payload["wall_point"] = wall_point.split(",")
    data = _post(ctx, "/tropical", payload)
    _say(ctx, f"W{data['wall']} . {data['direction']} = {data['intersection']}")
    if json_path:
        _emit_json(data, json_path)


@main.command()
@input_opt
@json_opt
@click.pass_context
def verify(ctx, input_path, json_path):
    """Check the two decorated complexes agree wall by wall (exit 1 if not)."""
    data = _post(ctx, "/verify", _load_problem(input_path))
    for w in data["walls"]:
        status = "ok" if w["match"] else "MISMATCH"
        _say(ctx, f"W{w['id']} rank_ZW={w['rank_ZW']} A={w['A_row']} B={w['B_row']} [{status}]")
    _say(ctx, f"theorem_holds: {data['theorem_holds']}")
    if json_path:
        _emit_json(data, json_path)
    if not data["theorem_holds"]:
        sys.exit(1)


@main.command()
@input_opt
@click.option("--json", "json_path", required=True, type=click.Path(), help="Output JSON path.")
@click.option("--chamber", "chamber_spec", default=None, help="Optional chamber point for subdivision data.")
@click.pass_context
def export(ctx, input_path, json_path, chamber_spec):
    """Dump the fan, faces, and optionally one chamber's subdivision."""
    payload = _load_problem(input_path)
    if chamber_spec:
        payload["chamber"] = chamber_spec.split(",")
    data = _post(ctx, "/export", payload)
    _emit_json(data, json_path)
    _say(ctx, f"wrote {json_path}")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8787, type=int)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    main()
