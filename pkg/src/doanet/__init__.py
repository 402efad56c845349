"""doanet: multi-speaker DOA estimation with a phase-map CNN trained on
synthesized noise, plus SRP-PHAT and broadband MUSIC baselines."""

__version__ = "0.1.0"
