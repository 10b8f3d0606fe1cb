"""Genetic algorithm and exact oracle for the multi-vehicle pickup and delivery problem with time windows."""

from .ga import GaConfig, GaResult, evolve
from .instancegen import GenParams, generate_instance, read_instance, read_solution, write_instance, write_solution
from .model import Instance, RequestPair, Solution, Vehicle, Vertex, make_solution, validate_solution
from .oracle import OracleResult, exact_solve

__all__ = [
    "GaConfig", "GaResult", "evolve",
    "GenParams", "generate_instance", "read_instance", "read_solution", "write_instance", "write_solution",
    "Instance", "RequestPair", "Solution", "Vehicle", "Vertex", "make_solution", "validate_solution",
    "OracleResult", "exact_solve",
]
