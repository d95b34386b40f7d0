APP_NAME = "T-adic Polygons"
ORGANIZATION = "tadicpolygons"
VERSION = "0.1.0"
SETTINGS_FILE = "TadicPolygons.ini"

# Precision defaults
DEFAULT_K = 20
DEFAULT_GUARD_TERMS = 8
DEFAULT_ESCALATION_ROUNDS = 4
ENUMERATION_GUARD = 1 << 24
DLOG_TABLE_LIMIT = 1 << 20

WORKERS_ENV = "TADIC_WORKERS"

LOG_FORMAT = "%(asctime)s - %(levelname)s - %(message)s"

# Exit codes
EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INCONCLUSIVE = 2
EXIT_CONFIG_ERROR = 3
