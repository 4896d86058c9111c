"""CLI module for sphere-bev."""
