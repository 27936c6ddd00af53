"""fairshare: a decentralized, fair content-sharing marketplace at desk scale.

Erasure-coded convergently-encrypted storage, a deterministic ledger state
machine with a signed audit trail, publisher/facilitator/client protocol
actors, facilitator incentive math, and a seeded discrete-event network
simulator, all behind one CLI.
"""

__version__ = "0.1.0"
