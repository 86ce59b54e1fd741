"""Hardening transforms over the IR: lock-step duplication with
transactional recovery, and encoded processing"""

from .transform import (Transform, TransformError, UnsupportedInstruction,
                        instruction_ratio, marker_count)
from .haft import (HaftConfig, TxCheckpoint, TransactionUnit, transform_haft,
                   run_protected)
from .delta import transform_delta
from .load_transform import load_transform, harden, HARDEN_MODES
