"""Logging and tracing for varexp."""
