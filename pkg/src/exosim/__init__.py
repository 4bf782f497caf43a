"""Intent-driven upper-limb exoskeleton simulator.

Closed-loop pipeline: synthetic EMG -> DSP -> per-muscle CNN+LSTM intent
classification -> motion state machine -> pneumatic artificial muscles ->
joint plant, with a latency-modeled event loop and a telemetry gateway.
"""

__version__ = "0.1.0"
