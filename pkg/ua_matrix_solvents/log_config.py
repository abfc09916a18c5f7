import logging


class LevelFormatter(logging.Formatter):
    """Formats each record with the formatter registered for its level."""
    def __init__(self, level_formatters):
        super().__init__()
        self._level_formatters = level_formatters

    def format(self, record):
        formatter = self._level_formatters.get(record.levelno)
        if formatter is None:
            return super().format(record)
        return formatter.format(record)


class LevelFilter():
    """Lets a handler emit the given levels only.

    Solver warnings go to standard error while INFO progress is dropped
    unless --verbose asks for it.
    """
    def __init__(self, levels):
        self.levels = frozenset(levels)

    def filter(self, record):
        return record.levelno in self.levels


def build_config(verbose=False):
    """Build the dictConfig dictionary for the package loggers.

    Keyword Arguments:
        verbose (boolean): Route INFO records to standard error as well."""
    stderr_levels = [logging.WARNING, logging.ERROR, logging.CRITICAL]
    if verbose:
        stderr_levels.append(logging.INFO)
    null_levels = [
        level for level in (logging.DEBUG, logging.INFO)
        if level not in stderr_levels]

    return {
        "version": 1,
        "disable_existing_loggers": False,
        "formatters": {
            "stderr_formatter": {
                "()": LevelFormatter,
                "level_formatters": {
                    logging.INFO: logging.Formatter(
                        fmt="%(levelname)s: %(name)s: %(message)s"),
                    logging.WARNING: logging.Formatter(
                        fmt="%(levelname)s: %(message)s"),
                    logging.ERROR: logging.Formatter(
                        fmt="%(levelname)s: Could not complete the run:"
                            " %(message)s"),
                    logging.CRITICAL: logging.Formatter(
                        fmt="%(levelname)s: %(message)s"),
                }
            },
        },
        "handlers": {
            "stderr_handler": {
                "class": "logging.StreamHandler",
                "stream": "ext://sys.stderr",
                "formatter": "stderr_formatter",
                "filters": ["stderr_filter"],
            },
            "null_handler": {
                "class": "logging.NullHandler",
                "filters": ["null_filter"],
            }
        },
        "filters": {
            "stderr_filter": {
                "()": LevelFilter,
                "levels": stderr_levels
            },
            "null_filter": {
                "()": LevelFilter,
                "levels": null_levels
            }
        },
        "loggers": {
            "ua_matrix_solvents": {
                "propagate": False,
                "level": logging.DEBUG,
                "handlers": ["stderr_handler", "null_handler"]
            },
            "__main__": {
                "propagate": False,
                "level": logging.DEBUG,
                "handlers": ["stderr_handler", "null_handler"]
            },
        }
    }
