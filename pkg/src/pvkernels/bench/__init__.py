from .harness import (
    DEFAULT_KERNEL_CASES,
    COVERAGE_RADII,
    KernelCase,
    kernel_inputs,
    run_kernel_bench,
    run_sampler_bench,
    time_call,
)
from .report import BenchReport, BenchRow, write_table
from .scene import SceneSpec, synth_scene, synth_scene_labeled

__all__ = [
    "DEFAULT_KERNEL_CASES",
    "COVERAGE_RADII",
    "BenchReport",
    "BenchRow",
    "KernelCase",
    "SceneSpec",
    "kernel_inputs",
    "run_kernel_bench",
    "run_sampler_bench",
    "synth_scene",
    "synth_scene_labeled",
    "time_call",
    "write_table",
]
