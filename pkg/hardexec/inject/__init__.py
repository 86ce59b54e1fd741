"""Fault injection: single faults, outcome classification and campaigns"""

from .injector import (FaultSpec, GoldenFailure, golden_run, inject_run,
                       classify, CORRUPTION_TABLE, FAULT_MODELS, OUTCOMES)
from .campaign import (CampaignConfig, CampaignReport, run_campaign,
                       run_exhaustive)
