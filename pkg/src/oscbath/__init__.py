"""Oscillator coupled to an ohmic bath: bare and dressed thermalization."""
