"""CLI for varexp-pde."""
