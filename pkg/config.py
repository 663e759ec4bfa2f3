# Numeric defaults for desk runs
DEFAULT_PRIME = 7
DEFAULT_PRECISION = 10
DEFAULT_WEIGHT = 4

# Guardrails for RunConfig
MAX_PRECISION = 64
MAX_WEIGHT = 6
MAX_SOLVER_WEIGHT = 7
MAX_DEGREE = 5000

# Letter ids and the puncture each letter sits at (thrice-punctured line)
DEFAULT_ALPHABET = "01"
DEFAULT_PUNCTURES = {
    "0": 0,
    "1": 1,
}

# Extra p-adic digits carried through the associator solve
SOLVER_GUARD_DIGITS = 4

VERIFY_SUITES = [
    "shuffle",
    "grouplike",
    "anchors",
    "theorem",
    "torsor",
    "oracle",
    "branch",
    "precision",
]

# Exit-code contract of the command line
EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2
EXIT_SOLVER = 3

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
