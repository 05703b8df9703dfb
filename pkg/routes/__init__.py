# Subcommand groups registered by main.py
