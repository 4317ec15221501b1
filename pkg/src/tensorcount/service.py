"""HTTP counting service.

POST /count takes a DIMACS formula (with optional weight lines) and returns
the weighted model count plus planning statistics. GET /health is a probe.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .driver import count_text
from .errors import BudgetInfeasible, CounterError, Timeout

app = FastAPI(title="tensorcount", version="1.0")


class CountRequest(BaseModel):
    dimacs: str
    timeout: float | None = Field(default=None, gt=0)
    alpha: float | None = Field(default=None, ge=0)
    planner: str = "minfill"
    mem_budget: int | None = Field(default=None, gt=0)
    seed: int = 0


class CountResponse(BaseModel):
    count: float
    elapsed: float
    planner: str
    width: int
    max_rank: int
    num_slices: int
    plan: str


@app.get("/health")
def health():
    return {"status": "ok"}


@app.post("/count", response_model=CountResponse)
def count(request: CountRequest) -> CountResponse:
    try:
        result = count_text(
            request.dimacs,
            timeout=request.timeout,
            alpha=request.alpha,
            planner=request.planner,
            mem_budget=request.mem_budget,
            seed=request.seed,
        )
    except Timeout as exc:
        raise HTTPException(status_code=504, detail=str(exc))
    except BudgetInfeasible as exc:
        raise HTTPException(status_code=507, detail=str(exc))
    except CounterError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    except ValueError as exc:
        raise HTTPException(status_code=422, detail=str(exc))
    return CountResponse(
        count=result.count,
        elapsed=result.elapsed,
        planner=result.planner,
        width=result.width,
        max_rank=result.max_rank,
        num_slices=result.num_slices,
        plan=result.plan_text,
    )
