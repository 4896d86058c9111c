import math
import os


DEFAULT_IS_LOCAL = os.getenv("DEFAULT_IS_LOCAL", "false").lower() == "true"

########################################
# Runtime
########################################
SPHEREBEV_THREADS = os.getenv("SPHEREBEV_THREADS", "0")
SPHEREBEV_SEED = int(os.getenv("SPHEREBEV_SEED", "0"))
LOG_LEVEL = os.getenv("SPHEREBEV_LOG_LEVEL", "WARNING").upper()
LOG_FORMAT_JSON = os.getenv("SPHEREBEV_LOG_FORMAT_JSON")

########################################
# Camera (dual-fisheye, 1280x640)
########################################
DEFAULT_EPSILON = 1e-9
DEFAULT_COEFFS = (0.0, 2.0 / math.pi, 0.0, 0.0, 0.0)
DEFAULT_IMAGE_WIDTH = 1280
DEFAULT_IMAGE_HEIGHT = 640

########################################
# BEV grid and targets
########################################
DEFAULT_SIDE_METERS = 100.0
DEFAULT_RESOLUTION = 0.5
CENTERNESS_SIGMA = 1.0
DEFAULT_EVAL_RANGES = (100.0, 50.0, 20.0)

########################################
# Coarse/fine sampling
########################################
DEFAULT_POINTS_PER_PILLAR = 8
DEFAULT_Z_MIN = -1.0
DEFAULT_Z_MAX = 3.0
DEFAULT_N_COARSE = 2500
DEFAULT_K = 250
DEFAULT_FINE_PATTERN = tuple((dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1))
BACKGROUND_LOGIT = -10.0
DEFAULT_THRESHOLD = 0.0

########################################
# Losses
########################################
FOCAL_CLAMP = 1e-7
GAMMA_SWEEP = (0.0, 0.2, 0.4, 0.6, 0.8, 1.0, 2.0, 5.0)

########################################
# Sensor synchronisation
########################################
SYNC_QUEUE_SIZE = 20
SYNC_SLOP = 0.03
SYNC_REFERENCE = "lidar"
SENSOR_RATES_HZ = {"camera": 15.0, "lidar": 10.0, "gnss": 100.0}


def get_thread_count() -> int:
    """Resolve SPHEREBEV_THREADS into a worker count (0 means one per CPU)."""
    raw = os.getenv("SPHEREBEV_THREADS", SPHEREBEV_THREADS)
    try:
        threads = int(raw)
    except ValueError:
        raise ValueError(f"SPHEREBEV_THREADS must be an integer, got {raw!r}")
    if threads < 0:
        raise ValueError(f"SPHEREBEV_THREADS must be >= 0, got {threads}")
    if threads == 0:
        return os.cpu_count() or 1
    return threads
