"""Command-line sweeps and figure presets."""
