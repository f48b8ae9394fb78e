import logging
import os
from contextlib import asynccontextmanager

import uvicorn
from fastapi import FastAPI, HTTPException, status
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from models.errors import ChrError, DerivationError, InvariantViolation
from schema.config import setup_logging
from schema.requests.checks import BisimRequest, FixpointRequest, ProgramRequest, RegexEqualRequest, RunRequest
from schema.responses.checks import (
    EquivalenceResponse,
    ErrorResponse,
    FixpointResponse,
    HealthCheckResponse,
    LogicalResponse,
    RunResponse,
    TranslateResponse,
)
from services import checks
from services.coind import translated_destructor_program

API_VERSION = "1.0.0"

logger = logging.getLogger(__name__)


@asynccontextmanager
async def lifespan(app: FastAPI):
    """Application lifespan manager"""
    logger.info("Starting CHR engine API...")
    try:
        # compile the destructor program once so the first regex request is not slower
        translated_destructor_program()
    except Exception as e:
        logger.error(f"Error during startup: {e}")

    yield

    logger.info("Shutting down CHR engine API...")


app = FastAPI(
    title="CHR Engine API",
    description="Constraint Handling Rules engine with fixpoint and coinductive checks",
    version=API_VERSION,
    docs_url="/docs",
    redoc_url="/redoc",
    lifespan=lifespan,
)

app.add_middleware(
    CORSMiddleware,
    allow_origins=os.getenv("ALLOWED_ORIGINS", "*").split(","),
    allow_credentials=True,
    allow_methods=["*"],
    allow_headers=["*"],
)


# Health Check Endpoints
@app.get("/", response_model=HealthCheckResponse, tags=["Health Check"])
async def root() -> HealthCheckResponse:
    """Root endpoint - basic health check"""
    return HealthCheckResponse(status="healthy", message="CHR engine API is running", version=API_VERSION)


@app.get("/health", response_model=HealthCheckResponse, tags=["Health Check"])
async def health_check() -> HealthCheckResponse:
    return HealthCheckResponse(status="healthy", message="API is operational", version=API_VERSION)


# Program Endpoints
@app.post("/run", response_model=RunResponse, tags=["Programs"])
def run_goal(request: RunRequest) -> RunResponse:
    """
    Run a goal against a program

    - **program**: program text
    - **goal**: goal text
    - **hybrid**: run under the hybrid translation

    Returns the final state and how the derivation ended.
    """
    logger.info(f"Run request: goal {request.goal!r}, step limit {request.step_limit}")
    return checks.run_program(request)


@app.post("/translate", response_model=TranslateResponse, tags=["Programs"])
def translate(request: ProgramRequest) -> TranslateResponse:
    """Translate a hybrid program into a prioritized program"""
    return checks.translate_program(request)


@app.post("/logical", response_model=LogicalResponse, tags=["Programs"])
def logical(request: ProgramRequest) -> LogicalResponse:
    return checks.logical_program(request)


# Semantic Checks
@app.post("/fixpoint", response_model=FixpointResponse, tags=["Checks"])
def fixpoint_membership(request: FixpointRequest) -> FixpointResponse:
    """Decide least, greatest or hybrid fixpoint membership of ground roots"""
    logger.info(f"Fixpoint request: mode {request.mode}, {len(request.roots)} roots, bound {request.bound}")
    return checks.check_fixpoint(request)


@app.post("/regex/equal", response_model=EquivalenceResponse, tags=["Checks"])
def regex_equal(request: RegexEqualRequest) -> EquivalenceResponse:
    return checks.regex_equivalence(request)


@app.post("/bisim", response_model=EquivalenceResponse, tags=["Checks"])
def bisim(request: BisimRequest) -> EquivalenceResponse:
    return checks.bisimulation(request)


# Error Handlers
@app.exception_handler(HTTPException)
async def custom_http_exception_handler(request, exc: HTTPException):
    """Custom HTTP exception handler with detailed error response"""
    logger.error(f"HTTP {exc.status_code}: {exc.detail} - Path: {request.url.path}")

    return JSONResponse(
        status_code=exc.status_code,
        content=ErrorResponse(
            error=str(exc.detail),
            details=f"HTTP {exc.status_code} error occurred",
            status_code=exc.status_code,
        ).model_dump(),
    )


@app.exception_handler(RequestValidationError)
async def validation_exception_handler(request, exc: RequestValidationError):
    """Handle request validation errors"""
    logger.error(f"Validation error: {exc} - Path: {request.url.path}")

    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content=ErrorResponse(error="Validation Error", details=str(exc), status_code=422).model_dump(),
    )


@app.exception_handler(InvariantViolation)
async def invariant_exception_handler(request, exc: InvariantViolation):
    logger.error(f"Invariant violation: {exc} - Path: {request.url.path}")

    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=ErrorResponse(error="Invariant Violation", details=str(exc), status_code=500).model_dump(),
    )


@app.exception_handler(DerivationError)
async def derivation_exception_handler(request, exc: DerivationError):
    logger.error(f"Derivation error: {exc} - Path: {request.url.path}")

    return JSONResponse(
        status_code=status.HTTP_422_UNPROCESSABLE_ENTITY,
        content=ErrorResponse(error="Derivation Error", details=str(exc), status_code=422).model_dump(),
    )


@app.exception_handler(ChrError)
async def chr_exception_handler(request, exc: ChrError):
    """Parse errors, ill-formed programs and unground built-ins"""
    logger.error(f"{type(exc).__name__}: {exc} - Path: {request.url.path}")

    return JSONResponse(
        status_code=status.HTTP_400_BAD_REQUEST,
        content=ErrorResponse(error=type(exc).__name__, details=str(exc), status_code=400).model_dump(),
    )


@app.exception_handler(Exception)
async def general_exception_handler(request, exc: Exception):
    """Handle all other exceptions"""
    logger.error(f"Unhandled exception: {exc} - Path: {request.url.path}", exc_info=True)

    return JSONResponse(
        status_code=status.HTTP_500_INTERNAL_SERVER_ERROR,
        content=ErrorResponse(
            error="Internal Server Error",
            details="An unexpected error occurred",
            status_code=500,
        ).model_dump(),
    )


if __name__ == "__main__":
    setup_logging()
    host = os.getenv("HOST", "0.0.0.0")
    port = int(os.getenv("PORT", 8000))
    reload = os.getenv("RELOAD", "False").lower() == "true"
    log_level = os.getenv("LOG_LEVEL", "info").lower()

    logger.info(f"Starting server on {host}:{port}")

    uvicorn.run(
        "main:app",
        host=host,
        port=port,
        reload=reload,
        log_level=log_level,
        access_log=True,
    )
