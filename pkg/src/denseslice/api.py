"""Northbound HTTP+JSON API over a Controller instance.

Validation failures map to 4xx responses with a machine-readable
`reason` field; unknown resources map to 404.
"""

from __future__ import annotations

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .controller import Controller
from .routing import RouteUnavailableError
from .slicing import PlanDelta, PlanValidationError, plan_from_json, plan_to_json


def create_app(controller: Controller, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="dense-slicing northbound API")
    app.state.controller = controller

    @app.exception_handler(PlanValidationError)
    async def _plan_error(request: Request, exc: PlanValidationError):
        return JSONResponse(
            status_code=422,
            content={"reason": exc.reason, "detail": exc.detail},
        )

    @app.exception_handler(RouteUnavailableError)
    async def _route_error(request: Request, exc: RouteUnavailableError):
        return JSONResponse(
            status_code=409,
            content={
                "reason": "route-unavailable",
                "detail": str(exc),
                "slice": exc.slice_id,
                "disconnected": list(exc.report.disconnected),
            },
        )

    @app.exception_handler(KeyError)
    async def _lookup_error(request: Request, exc: KeyError):
        return JSONResponse(
            status_code=404,
            content={"reason": "not-found", "detail": str(exc)},
        )

    @app.exception_handler(RuntimeError)
    async def _runtime_error(request: Request, exc: RuntimeError):
        return JSONResponse(
            status_code=409,
            content={"reason": "conflict", "detail": str(exc)},
        )

    @app.get("/topology")
    def topology():
        return controller.topology_json()

    @app.get("/plan")
    def get_plan():
        return plan_to_json(controller.plan)

    @app.put("/plan")
    def put_plan(body: dict):
        plan = plan_from_json(body)
        event = controller.set_plan(plan)
        return {
            "plan": plan_to_json(controller.plan),
            "recomputed_slices": list(event.recomputed_slices),
            "channel_retunes": [list(r) for r in event.channel_retunes],
        }

    @app.post("/plan/delta")
    def post_delta(body: dict):
        delta = PlanDelta(
            moves=tuple(
                (int(node), str(slice_id))
                for node, slice_id in body.get("moves", [])
            ),
            channel_changes=tuple(
                (str(slice_id), int(channel))
                for slice_id, channel in body.get("channel_changes", [])
            ),
        )
        event = controller.apply_delta(delta)
        return {
            "plan": plan_to_json(controller.plan),
            "recomputed_slices": list(event.recomputed_slices),
            "channel_retunes": [list(r) for r in event.channel_retunes],
        }

    @app.get("/density")
    def density():
        return controller.density_json()

    @app.get("/flows")
    def flows():
        return controller.flow_rules_json()

    @app.post("/codet/run")
    def codet_run(slice: str | None = Query(default=None)):
        at = 0.0
        if controller.sim_handle is not None:
            at = controller.sim_handle.sim.now
        reports = controller.run_codet(slice, at=at)
        return [_report_json(r) for r in reports]

    @app.get("/codet/reports")
    def codet_reports():
        return [_report_json(r) for r in controller.codet.all_reports()]

    @app.get("/pdr")
    def pdr():
        return controller.pdr_json()

    @app.get("/sim/status")
    def sim_status():
        return controller.sim_status()

    @app.post("/sim/start")
    def sim_start():
        return controller.sim_start()

    @app.post("/sim/pause")
    def sim_pause():
        return controller.sim_pause()

    @app.post("/sim/step")
    def sim_step(events: int = Query(default=1000, gt=0)):
        return controller.sim_step(events)

    if static_dir is not None:
        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="dashboard")

    return app


def _report_json(report) -> dict:
    return {
        "slice": report.slice_id,
        "target": report.target,
        "disconnected": list(report.disconnected),
        "checked_at": report.checked_at,
        "fully_connected": report.fully_connected,
    }
