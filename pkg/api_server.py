# api_server.py
#
# A FastAPI front-end for the linkage toolkit. Tournaments are uploaded as TRN1
# files; the server answers with the same JSON documents the command line prints.
# Requests are handled synchronously: a link run on a few hundred vertices takes
# seconds, so there is no job queue.

import json
import logging
from typing import Any, Dict, List, Optional

from fastapi import FastAPI, File, Form, HTTPException, UploadFile, status

from anchoring import LemmaViolation
from connectivity import vertex_connectivity
from exact_linkage import BudgetExhausted, Linkage
from genverify import verify_linkage
from linker import (AssertionViolation, LinkerError, PreconditionViolation, check_preconditions, link,
                    outdegree_threshold, strength_threshold)
from tournament import Tournament, TournamentInputError

# --- Setup Logging ---
logging.basicConfig(
    level=logging.INFO,
    format='%(asctime)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)

# --- FastAPI Application ---
app = FastAPI(
    title="Tournament Linkage API",
    description="Builds and checks vertex-disjoint path linkages in highly connected tournaments.",
    version="1.0.0"
)


def _read_upload(upload: UploadFile) -> str:
    try:
        return upload.file.read().decode("utf-8")
    except UnicodeDecodeError:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST,
                            detail=f"'{upload.filename}' is not UTF-8 text.") from None
    finally:
        upload.file.close()


def _read_tournament(upload: UploadFile) -> Tournament:
    try:
        return Tournament.from_trn1(_read_upload(upload))
    except TournamentInputError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e)) from None


def _parse_ids(text: str, name: str) -> List[int]:
    try:
        ids = [int(part) for part in text.split(",") if part.strip() != ""]
    except ValueError:
        ids = []
    if not ids:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST,
                            detail=f"'{name}' must be a comma-separated list of vertex ids.")
    return ids


@app.post("/info")
def tournament_info(file: UploadFile = File(...), k: Optional[int] = Form(None)) -> Dict[str, Any]:
    tournament = _read_tournament(file)
    if tournament.n == 0:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="The tournament has no vertices.")
    info = {
        "n": tournament.n,
        "min_out_degree": tournament.min_out_degree(),
        "min_in_degree": tournament.min_in_degree(),
        "vertex_connectivity": vertex_connectivity(tournament) if tournament.n >= 2 else None,
    }
    if k is not None:
        if k < 1:
            raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail="k must be at least 1.")
        report = check_preconditions(tournament, k)
        info.update(k=k, strength_threshold=strength_threshold(k), outdegree_threshold=outdegree_threshold(k),
                    k_strong=report.k_strong, outdegree_ok=report.outdegree_ok, thresholds_met=report.passed)
    return info


@app.post("/link")
def link_tournament(
    file: UploadFile = File(...),
    sources: str = Form(...),
    sinks: str = Form(...),
    mode: str = Form("strict"),
    budget: Optional[int] = Form(None),
) -> Dict[str, Any]:
    tournament = _read_tournament(file)
    X0, Y0 = _parse_ids(sources, "sources"), _parse_ids(sinks, "sinks")
    logging.info(f"LINK REQUEST: n={tournament.n}, sources={X0}, sinks={Y0}, mode={mode}")
    try:
        linkage, trace = link(tournament, X0, Y0, mode=mode, anchor_budget=budget)
    except TournamentInputError as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=str(e)) from None
    except PreconditionViolation as e:
        raise HTTPException(status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
                            detail={"reasons": e.report.reasons(), "report": e.report.to_dict()}) from None
    except (AssertionViolation, LemmaViolation) as e:
        logging.error(f"LINK FAILED with {type(e).__name__}: {e}")
        trace = e.trace.to_dict() if e.trace is not None else None
        raise HTTPException(status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
                            detail={"error": type(e).__name__, "message": str(e), "trace": trace}) from None
    except (LinkerError, BudgetExhausted) as e:
        raise HTTPException(status_code=status.HTTP_409_CONFLICT,
                            detail={"error": type(e).__name__, "message": str(e),
                                    "diagnostic": getattr(e, "diagnostic", None)}) from None
    return {"linkage": linkage.to_dict(), "trace": trace.to_dict()}


@app.post("/verify")
def verify_uploaded_linkage(file: UploadFile = File(...), linkage: UploadFile = File(...)) -> Dict[str, Any]:
    tournament = _read_tournament(file)
    try:
        document = Linkage.from_dict(json.loads(_read_upload(linkage)))
    except (json.JSONDecodeError, TournamentInputError) as e:
        raise HTTPException(status_code=status.HTTP_400_BAD_REQUEST, detail=f"Malformed linkage: {e}") from None
    report = verify_linkage(tournament, [s for s, _ in document.pairs], [t for _, t in document.pairs], document)
    return report.to_dict()


@app.get("/")
def read_root():
    return {"message": "Welcome to the Tournament Linkage API. Navigate to /docs for the API documentation."}
