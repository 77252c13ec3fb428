#!/usr/bin/env python3
"""Exact apportionment methods and proportional-consistency audits"""
import logging

from tqdm.auto import tqdm

from .core import (
    Apportionment,
    ApportionmentError,
    Instance,
    Quotas,
    ScaleFactor,
    TiePolicy,
    TieError,
    admissible_lambdas,
    quotas,
    round_nearest,
    scale_apportionment,
)
from .divisor import SignpostRule, apportion_divisor, parse_rule, verify_certificate
from .properties import MethodRef, check_pc, parse_method, search_pc_violations
from .quotatone import quotatone_apportion

# version detector. Precedence: installed dist, git, 'UNKNOWN'
try:
    from ._dist_ver import __version__
except ImportError:
    try:
        from setuptools_scm import get_version

        __version__ = get_version(root="../..", relative_to=__file__)
    except (ImportError, LookupError):
        __version__ = "UNKNOWN"

__all__ = [
    "LOG_FORMAT",
    "LogHandler",
    # core
    "Apportionment",
    "ApportionmentError",
    "Instance",
    "Quotas",
    "ScaleFactor",
    "TiePolicy",
    "TieError",
    "admissible_lambdas",
    "quotas",
    "round_nearest",
    "scale_apportionment",
    # methods
    "SignpostRule",
    "apportion_divisor",
    "parse_rule",
    "verify_certificate",
    "quotatone_apportion",
    # audits
    "MethodRef",
    "check_pc",
    "parse_method",
    "search_pc_violations",
]

LOG_FORMAT = "%(levelname)s:%(asctime)s:%(name)s:%(funcName)s\n> %(message)s"


class LogHandler(logging.StreamHandler):
    """Custom formatting and tqdm-compatibility"""

    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.setFormatter(logging.Formatter(LOG_FORMAT))

    def handleError(self, record):
        super().handleError(record)
        raise IOError(record)

    def emit(self, record):
        """Write to tqdm's stream so as to not break progress-bars"""
        try:
            msg = self.format(record)
            tqdm.write(msg, file=self.stream, end=getattr(self, "terminator", "\n"))
            self.flush()
        except RecursionError:
            raise
        except Exception:
            self.handleError(record)


# log = logging.getLogger(__name__)
# technically bad practice to add handlers
# https://docs.python.org/3/howto/logging.html#library-config
# the CLI attaches LogHandler itself
