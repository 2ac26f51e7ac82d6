from .codec import (
    DecodeError,
    DisconnectedError,
    E2Error,
    EncodeError,
    IncompleteFrameError,
    UnsupportedError,
    decode_message,
    encode_message,
)
from .messages import (
    MEASUREMENTS,
    FailureCause,
    MessageType,
    RicControlAck,
    RicControlFailure,
    RicControlRequest,
    RicIndication,
    SubscriptionRequest,
    SubscriptionResponse,
    UeMetric,
)
from .transport import LoopbackEndpoint, StreamEndpoint, loopback_pair
