"""
Identity suites

One suite per geometry module; SUITES maps suite names to classes in run
order.
"""

from nullgeo.suites.base import (
    IdentityResult,
    IdentitySkipped,
    IdentitySuite,
    VerificationContext,
)
from nullgeo.suites.degcalc_suite import DegcalcSuite
from nullgeo.suites.foliation_suite import FoliationSuite
from nullgeo.suites.hypersurface_suite import HypersurfaceSuite
from nullgeo.suites.kaehler_suite import KaehlerSuite
from nullgeo.suites.weyl_suite import WeylSuite

SUITES = {
    suite.name: suite
    for suite in (HypersurfaceSuite, DegcalcSuite, WeylSuite, FoliationSuite, KaehlerSuite)
}

__all__ = [
    'SUITES',
    'IdentityResult',
    'IdentitySkipped',
    'IdentitySuite',
    'VerificationContext',
    'HypersurfaceSuite',
    'DegcalcSuite',
    'WeylSuite',
    'FoliationSuite',
    'KaehlerSuite',
]
