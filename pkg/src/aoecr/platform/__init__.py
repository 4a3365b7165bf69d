"""Information-platform runtime: pub/sub wire contract, in-process and TCP
brokers, bed execution loop, agent service, session persistence, HTTP/WS
bridge, and the composed local stack."""

from .broker import BrokerClosed, InProcessBroker, Subscription, topic_matches
from .wire import Deduper, EnvelopeFactory, TopicKind, WireEnvelope, topic_contract, topic_name

__all__ = [
    "BrokerClosed",
    "Deduper",
    "EnvelopeFactory",
    "InProcessBroker",
    "Subscription",
    "TopicKind",
    "WireEnvelope",
    "topic_contract",
    "topic_matches",
    "topic_name",
]
