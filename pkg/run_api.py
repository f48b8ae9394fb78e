#!/usr/bin/env python3
"""
Startup script for the CHR engine API
This script handles environment setup and starts the FastAPI server
"""

import logging
import os
import sys

import uvicorn
from dotenv import load_dotenv

from schema.config import setup_logging
from services.lang import parse_program


def validate_environment() -> bool:
    """Check that the bundled sample programs are present and parse"""
    logger = logging.getLogger(__name__)
    data_path = os.getenv("DATA_PATH", "data/")

    missing = []
    for name in ("cancel.chr", "successor.chr", "bisim.chr"):
        path = os.path.join(data_path, name)
        if not os.path.exists(path):
            missing.append(path)
            continue
        with open(path, encoding="utf-8") as handle:
            parse_program(handle.read())

    if missing:
        logger.warning(f"Sample programs not found: {', '.join(missing)}")
        return False

    logger.info("Environment validation passed")
    return True


def main():
    """Main startup function"""
    load_dotenv()
    logger = setup_logging(sys.stdout)
    logger.setLevel(logging.INFO)

    validate_environment()

    host = os.getenv("HOST", "0.0.0.0")
    port = int(os.getenv("PORT", 8000))
    reload = os.getenv("RELOAD", "False").lower() == "true"
    log_level = os.getenv("LOG_LEVEL", "info").lower()

    logger.info("Starting CHR engine API...")
    logger.info(f"Host: {host}")
    logger.info(f"Port: {port}")
    logger.info(f"Reload: {reload}")
    logger.info(f"Log Level: {log_level}")

    try:
        uvicorn.run(
            "main:app",
            host=host,
            port=port,
            reload=reload,
            log_level=log_level,
            access_log=True,
            loop="asyncio",
        )
    except KeyboardInterrupt:
        logger.info("Server shutdown requested by user")
    except Exception as e:
        logger.error(f"Error starting server: {e}")
        sys.exit(1)


if __name__ == "__main__":
    main()
