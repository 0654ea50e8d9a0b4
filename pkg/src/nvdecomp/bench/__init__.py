"""Benchmark instances, generators and the experiment runner."""

from .generators import CLASSES, gen_queens, gen_random_csp, random_suite
from .instances import DECOMPOSITIONS, Instance, ParseError, build_model, check_solution, read_instance, write_instance
from .runner import BenchReport, BenchRow, Summary, run_bench, run_one
