"""Command-line front end of radial-bergman."""
