"""Command line harness: configs, verification runs and example tables."""
