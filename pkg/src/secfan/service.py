"""HTTP service exposing the fan / SOD computations as JSON endpoints.

Every endpoint is stateless: the problem travels with the request (exactly one
of "weights" or "points"), results are JSON with rationals rendered as
strings.  Errors carry {"error": {"kind": "input"|"query", "message": ...}}
with status 400 so thin clients can map them to exit codes.
"""

from __future__ import annotations

from fractions import Fraction

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, model_validator

from . import __version__
from .fan import EMPTY, Chamber, build_fan, chamber_of, fan_to_dict, straight_line_run, wall_of
from .geometry import dot
from .multiplicity import (
    table_ranks,
    tropical_intersection,
    solve_recursive,
    verify_theorem,
    volume_ledger,
    wall_phase_rank,
)
from .problem import GitProblem, from_points, from_weights, minimal_faces, relevant_subspaces
from .stacky import stacky_fan_of_chamber, stacky_volume
from .subdivision import subdivision_of_chamber, subdivision_to_dict


class InputError(Exception):
    pass


class QueryError(Exception):
    pass


class ProblemInput(BaseModel):
    weights: list[list[int]] | None = None
    points: list[list[int]] | None = None
    name: str | None = None

    @model_validator(mode="after")
    def _exactly_one(self):
        if (self.weights is None) == (self.points is None):
            raise ValueError("exactly one of 'weights' or 'points' must be given")
        return self


class ChamberRequest(ProblemInput):
    chamber: list[str] | None = None


class RunRequest(ProblemInput):
    chamber: list[str]


class TropicalRequest(ProblemInput):
    direction: list[int]
    wall_point: list[str]


class FanRequest(ProblemInput):
    plot: bool = False
    slice: list[str] | None = None  # a1,...,ak,d for the plane a.x = d


def build_problem(payload: ProblemInput) -> GitProblem:
    try:
        if payload.weights is not None:
            rows = payload.weights
            if rows and any(len(r) != len(rows[0]) for r in rows):
                raise ValueError("inconsistent row lengths")
            # weight file rows are the weights q_i; transpose to k x N
            cols = rows
            k = len(cols[0]) if cols else 0
            return from_weights([[c[i] for c in cols] for i in range(k)])
        return from_points(payload.points)
    except (ValueError, AssertionError) as exc:
        raise InputError(str(exc)) from exc


def parse_fractions(values) -> tuple:
    try:
        return tuple(Fraction(v) for v in values)
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(f"bad rational: {exc}") from exc


def locate_chamber(p: GitProblem, fan, point) -> Chamber:
    if len(point) != p.k:
        raise InputError(f"chamber point must have {p.k} coordinates")
    c = chamber_of(fan, point)
    if c == EMPTY:
        raise QueryError("point lies in the empty chamber")
    if not isinstance(c, Chamber):
        raise QueryError("point lies on a stratum boundary")
    return c


def frac_str(x) -> str:
    return str(x)


def plot_data(p: GitProblem, fan, slice_spec=None) -> dict:
    """Raw plot data: labelled segments (k = 2) or a plane slice (k = 3)."""
    segs = []
    if p.k == 2:
        for w in fan.walls:
            for g in w.generators:
                if not g or not any(g):
                    continue
                segs.append(
                    {
                        "from": [0, 0],
                        "to": [int(x) for x in g],
                        "label": f"W{w.id} d={w.d}",
                    }
                )
        return {"kind": "rays", "segments": segs}
    if p.k == 3:
        if not slice_spec:
            raise QueryError("k = 3 plots need --slice a,b,c,d")
        coeffs = parse_fractions(slice_spec)
        if len(coeffs) != 4:
            raise InputError("slice needs four entries a,b,c,d")
        normal, offset = coeffs[:3], coeffs[3]
        for w in fan.walls:
            pts = []
            for g in w.generators:
                if not g or not any(g):
                    continue
                denom = dot(normal, g)
                if denom == 0:
                    continue
                t = offset / denom
                if t <= 0:
                    continue
                pts.append([frac_str(t * x) for x in g])
            if len(pts) >= 2:
                segs.append({"from": pts[0], "to": pts[1], "label": f"W{w.id} d={w.d}"})
            elif pts:
                segs.append({"from": pts[0], "to": pts[0], "label": f"W{w.id} d={w.d}"})
        return {
            "kind": "slice",
            "plane": [frac_str(c) for c in coeffs],
            "segments": segs,
        }
    raise QueryError("plot data only for k = 2 or 3")


def create_app() -> FastAPI:
    app = FastAPI(title="secfan", version=__version__)

    @app.exception_handler(InputError)
    async def _input_error(request, exc):
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": "input", "message": str(exc)}},
        )

    @app.exception_handler(QueryError)
    async def _query_error(request, exc):
        return JSONResponse(
            status_code=400,
            content={"error": {"kind": "query", "message": str(exc)}},
        )

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "version": __version__}

    @app.post("/fan")
    def fan_endpoint(req: FanRequest):
        p = build_problem(req)
        fan = build_fan(p)
        out = fan_to_dict(fan)
        out["name"] = req.name
        out["calabi_yau"] = p.is_calabi_yau()
        out["det_v"] = list(p.det_v)
        if req.plot or req.slice:
            out["plot"] = plot_data(p, fan, req.slice)
        return out

    @app.post("/faces")
    def faces_endpoint(req: ProblemInput):
        p = build_problem(req)
        ranks = table_ranks(p)
        faces = [
            {
                "id": f"F[{','.join(str(i) for i in f.indices)}]",
                "indices": list(f.indices),
                "witness": list(f.witness),
                "rank": ranks[f.indices],
            }
            for f in minimal_faces(p)
        ]
        subs = [
            {
                "indices": list(h.indices),
                "dim": h.dim,
                "basis": [list(b) for b in h.basis],
                "face_indices": list(h.face_indices),
            }
            for h in relevant_subspaces(p)
        ]
        return {"minimal_faces": faces, "relevant_subspaces": subs}

    @app.post("/sod")
    def sod_endpoint(req: ChamberRequest):
        p = build_problem(req)
        fan = build_fan(p)
        if req.chamber is None:
            raise InputError("sod needs a chamber point")
        c = locate_chamber(p, fan, parse_fractions(req.chamber))
        vol, terms = volume_ledger(p, c, fan)
        return {
            "chamber": c.id,
            "volume": vol,
            "ledger": " + ".join(str(n * r) for _, n, r in terms if n),
            "table": [
                {
                    "face": f"F[{','.join(str(i) for i in f)}]",
                    "indices": list(f),
                    "multiplicity": n,
                    "rank": r,
                }
                for f, n, r in terms
            ],
        }

    @app.post("/walls")
    def walls_endpoint(req: ProblemInput):
        p = build_problem(req)
        fan = build_fan(p)
        return {
            "walls": [
                {
                    "id": w.id,
                    "generators": [list(g) for g in w.generators if g],
                    "lambda": list(w.lam),
                    "d": w.d,
                    "sides": [s if s == EMPTY else int(s) for s in w.sides],
                    "rank_ZW": wall_phase_rank(p, w),
                }
                for w in fan.walls
            ]
        }

    @app.post("/run")
    def run_endpoint(req: RunRequest):
        p = build_problem(req)
        if p.is_calabi_yau():
            raise QueryError("no straight-line run for det V = 0")
        fan = build_fan(p)
        c = locate_chamber(p, fan, parse_fractions(req.chamber))
        walls = straight_line_run(fan, c)
        return {
            "chamber": c.id,
            "walls": [
                {"id": w.id, "lambda": list(w.lam), "d": w.d} for w in walls
            ],
        }

    @app.post("/tropical")
    def tropical_endpoint(req: TropicalRequest):
        p = build_problem(req)
        fan = build_fan(p)
        pointq = parse_fractions(req.wall_point)
        if len(pointq) != p.k or len(req.direction) != p.k:
            raise InputError(f"direction and wall point must have {p.k} coordinates")
        w = wall_of(fan, pointq)
        if w is None:
            raise QueryError("point does not lie on a wall stratum")
        try:
            value = tropical_intersection(p, req.direction, w)
        except ValueError as exc:
            raise QueryError(str(exc)) from exc
        return {"wall": w.id, "direction": list(req.direction), "intersection": value}

    @app.post("/verify")
    def verify_endpoint(req: ProblemInput):
        p = build_problem(req)
        if not p.is_calabi_yau():
            raise InputError("verify requires a Calabi-Yau problem (sum q_i = 0)")
        return verify_theorem(p)

    @app.post("/export")
    def export_endpoint(req: ChamberRequest):
        p = build_problem(req)
        fan = build_fan(p)
        out = {
            "fan": fan_to_dict(fan),
            "faces": faces_endpoint(req),
        }
        if req.chamber is not None:
            c = locate_chamber(p, fan, parse_fractions(req.chamber))
            t = subdivision_of_chamber(fan, c)
            sf = stacky_fan_of_chamber(fan, c)
            out["subdivision"] = subdivision_to_dict(t)
            out["stacky_volume"] = stacky_volume(sf)
        return out

    return app


app = create_app()
