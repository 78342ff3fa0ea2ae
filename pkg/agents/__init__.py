__all__ = ["config_parser", "simulation_engine", "curve_writer", "verifier", "orchestrator"]
