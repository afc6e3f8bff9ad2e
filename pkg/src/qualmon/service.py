"""HTTP prediction and what-if service over a read-only model store."""

from __future__ import annotations

import time

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .doe import OperatingPoint, build_plan, envelope, envelope_plot_data, factor_effects, simulate_plan
from .store import list_models, load_model


class PredictRequest(BaseModel):
    setting: dict


class WhatifRequest(BaseModel):
    operating_point: dict
    setting: dict


class DoeRequest(BaseModel):
    operating_point: dict
    levels: int | dict = 10
    model: str | None = None


def _assemble_row(schema, mapping):
    """Natural-unit row in schema order from a {factor: value} mapping.

    Raises ValueError on missing/unknown factors or bad values (HTTP 400);
    out-of-bounds continuous values are evaluated anyway but flagged.
    """
    unknown = set(mapping) - {f.name for f in schema}
    if unknown:
        raise ValueError(f"unknown factors: {sorted(unknown)}")
    row, warnings = [], []
    for f in schema:
        if f.name not in mapping:
            raise ValueError(f"missing factor {f.name!r}")
        value = mapping[f.name]
        if f.kind == "continuous":
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ValueError(f"factor {f.name!r}: non-numeric value {value!r}") from None
            lo, hi = f.bounds
            if not lo <= value <= hi:
                warnings.append(f"factor {f.name!r}: value {value} outside bounds [{lo}, {hi}]")
        else:
            value = str(value)
            if value not in f.states:
                raise ValueError(f"factor {f.name!r}: unknown state {value!r}")
        row.append(value)
    return tuple(row), warnings


def create_app(store_dir):
    ids = list_models(store_dir)
    if not ids:
        raise ValueError(f"no models in store {store_dir!r}")
    records = {mid: load_model(store_dir, mid) for mid in ids}
    app = FastAPI(title="qualmon prediction service")

    @app.get("/models")
    def models():
        out = []
        for mid, rec in sorted(records.items()):
            prov = rec.ensemble.provenance
            out.append(
                {
                    "id": mid,
                    "name": rec.name,
                    "fusion": rec.ensemble.scheme,
                    "members": rec.ensemble.size,
                    "strategy": prov.get("strategy"),
                    "validation_error": prov.get("validation_error"),
                    "format_version": rec.format_version,
                    "schema": [f.to_dict() for f in rec.encoder.schema],
                    "metadata": rec.metadata,
                }
            )
        return out

    def _evaluate(settings_by_model):
        t0 = time.perf_counter()
        results = {}
        all_warnings = []
        for mid, rec in sorted(records.items()):
            row, warnings = settings_by_model[mid]
            klass, risk = rec.predict_setting(row)
            results[mid] = {"class": klass, "risk": risk, "fusion": rec.ensemble.scheme}
            all_warnings.extend(warnings)
        return results, sorted(set(all_warnings)), (time.perf_counter() - t0) * 1000.0

    def _risk_response(build_setting):
        settings = {}
        try:
            for mid, rec in records.items():
                settings[mid] = _assemble_row(rec.encoder.schema, build_setting(rec))
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        results, warnings, elapsed_ms = _evaluate(settings)
        body = {
            "results": results,
            "setting": {mid: list(settings[mid][0]) for mid in sorted(settings)},
            "warnings": warnings,
            "elapsed_ms": elapsed_ms,
        }
        # out-of-bounds values are flagged but still evaluated
        return JSONResponse(status_code=422 if warnings else 200, content=body)

    @app.post("/predict")
    def predict(req: PredictRequest):
        return _risk_response(lambda rec: dict(req.setting))

    @app.post("/whatif")
    def whatif(req: WhatifRequest):
        def build(rec):
            merged = dict(req.operating_point)
            overlap = set(merged) & set(req.setting)
            if overlap:
                raise ValueError(f"factors in both operating point and setting: {sorted(overlap)}")
            merged.update(req.setting)
            return merged

        return _risk_response(build)

    @app.post("/doe")
    def doe(req: DoeRequest):
        mid = req.model if req.model is not None else sorted(records)[0]
        if mid not in records:
            return JSONResponse(status_code=404, content={"error": f"unknown model id {mid!r}"})
        rec = records[mid]
        try:
            op = OperatingPoint(values=dict(req.operating_point)).validate(rec.encoder.schema)
            plan = build_plan(rec.encoder.schema, op, req.levels)
        except ValueError as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        incidence = simulate_plan(rec.ensemble, plan, op, rec.encoder)
        env = envelope(factor_effects(incidence, plan))
        return {
            "model": mid,
            "runs": plan.n_runs,
            "members": rec.ensemble.size,
            "envelope": env.to_dict(),
            "plot_data": envelope_plot_data(env),
        }

    return app


def serve(store_dir, bind="127.0.0.1:8000"):
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    host, _, port = bind.partition(":")
    uvicorn.run(create_app(store_dir), host=host or "127.0.0.1", port=int(port or 8000))
