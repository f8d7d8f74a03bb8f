import dotenv
dotenv.load_dotenv()

import os

# Single-threaded BLAS keeps reruns bitwise identical.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("MKL_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import logging
import sys

from hafrm.config import get_settings
from otel.setup import setup_telemetry

# Configure logging first
logging.basicConfig(
    level=getattr(logging, get_settings().log_level, logging.INFO),
    format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
)
logger = logging.getLogger(__name__)

from hafrm.cli import main

if __name__ == "__main__":
    setup_telemetry()
    sys.exit(main())
