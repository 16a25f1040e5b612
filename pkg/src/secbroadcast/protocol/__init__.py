from .params import PARAM_NAMES, ProtocolParams, compute_params
from .scheduler import Action, Scheduler, replay_schedule
from .session import (KeyMaterial, Session, SessionConfig, SessionTranscript, encrypt_messages,
                      run_keygen, run_session)
from .decode import decode

__all__ = [
    "PARAM_NAMES", "ProtocolParams", "compute_params", "Action", "Scheduler", "replay_schedule",
    "KeyMaterial", "Session", "SessionConfig", "SessionTranscript", "encrypt_messages",
    "run_keygen", "run_session", "decode",
]
