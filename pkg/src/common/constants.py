"""
Project-wide shared constants.

Defines canonical names, environment variables and on-disk conventions shared
by the solver package and its command line tool.
"""

# Distribution name (used for version lookup and the config directory)
DISTRIBUTION_NAME = "bobylev-flow"

# Per-user directory for logs: ~/.bobylev-flow/logs
APP_HOME_DIR = ".bobylev-flow"

# Environment variables
LOG_DIR_ENV = "BOBYLEV_LOG_DIR"
THREADS_ENV = "BOBK_THREADS"

# Binary field dump: 4-byte magic, uint32 version, uint32 N, uint32 reserved,
# float64 R_max, float64 t (little-endian, 32 bytes total)
FIELD_MAGIC = b"BOBK"
FIELD_FORMAT_VERSION = 1
FIELD_HEADER_FORMAT = "<4sIIIdd"
FIELD_SUFFIX = ".bobk"

# Report JSON schema version
REPORT_SCHEMA_VERSION = 1

# Exit codes of the command line tool
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_SCHEMA = 2
EXIT_NUMERICAL = 3
