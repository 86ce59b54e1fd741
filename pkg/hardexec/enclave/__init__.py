"""Simulated secure container: measurement and mock attestation, sealed
files, encrypted channels, the page cache cost model and the service-call
gate"""

from .measurement import Measurement, measure
from .epc import EpcModel, epc_access
from .envelope import (EnclaveEnvelope, IntegrityError, SyscallDenied,
                       seal_file, unseal_file, syscall_gate)
from .channel import (Channel, AttestationError, ReplayError,
                      attest_handshake, chan_send, chan_recv)
