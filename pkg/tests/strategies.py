"""Hypothesis strategies and a seeded generator for valid E2 messages."""

import random

from hypothesis import strategies as st

from oran_mlb.e2 import messages as m

U8, U16, U32, U64 = 2**8 - 1, 2**16 - 1, 2**32 - 1, 2**64 - 1

u32 = st.integers(0, U32)
u64 = st.integers(0, U64)

subscription_requests = st.builds(
    m.SubscriptionRequest, u32, u32, st.integers(1, U32),
    st.lists(st.sampled_from(m.MEASUREMENTS), max_size=5).map(tuple),
)
subscription_responses = st.builds(m.SubscriptionResponse, u32, u32, st.booleans())
ue_metrics = st.lists(st.builds(m.UeMetric, u32, u64, u64), max_size=8, unique_by=lambda u: u.ue_id)
indications = st.builds(
    m.RicIndication, u32, u32, u64,
    st.floats(0.0, 100.0, allow_nan=False), u64, u64, ue_metrics.map(tuple),
)
control_requests = st.builds(m.RicControlRequest.handover, u32, u32, u32)
control_acks = st.builds(m.RicControlAck, u32)
control_failures = st.builds(m.RicControlFailure, u32, st.sampled_from(list(m.FailureCause)))

messages = st.one_of(
    subscription_requests, subscription_responses, indications,
    control_requests, control_acks, control_failures,
)


def random_message(rng: random.Random):
    kind = rng.randrange(6)
    r32 = lambda: rng.randrange(U32 + 1)  # noqa: E731
    r64 = lambda: rng.randrange(U64 + 1)  # noqa: E731
    if kind == 0:
        names = tuple(rng.choice(m.MEASUREMENTS) for _ in range(rng.randrange(4)))
        return m.SubscriptionRequest(r32(), r32(), rng.randrange(1, U32 + 1), names)
    if kind == 1:
        return m.SubscriptionResponse(r32(), r32(), rng.random() < 0.5)
    if kind == 2:
        ids = rng.sample(range(1000), rng.randrange(5))
        ues = tuple(m.UeMetric(i, r64(), r64()) for i in ids)
        return m.RicIndication(r32(), r32(), r64(), rng.uniform(0, 100), r64(), r64(), ues)
    if kind == 3:
        return m.RicControlRequest.handover(r32(), r32(), r32())
    if kind == 4:
        return m.RicControlAck(r32())
    return m.RicControlFailure(r32(), rng.choice(list(m.FailureCause)))
