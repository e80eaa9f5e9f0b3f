"""Uniform m-Dyck and m-Lukasiewicz path sampling through the folding bijection."""

from .bijection import factorize_prefix, fold, unfold
from .bitstream import BernoulliGen, CountedBitSource, draw_decoration, draw_step, draw_uniform
from .core_paths import (
    DecoratedPrefix,
    Path,
    PathError,
    PointedLuka,
    ReducedForm,
    StepKind,
    is_mdyck_path,
    is_mdyck_prefix,
    is_mluka,
    reduced_form,
)
from .enumeration import brute_force_counts, enumerate_all, fuss_catalan, luka_count, prefix_weighted_count
from .sampler import SampleReport, run_cost_experiment, sample_mdyck, sample_mluka, sample_prefix

__all__ = [
    "BernoulliGen",
    "CountedBitSource",
    "DecoratedPrefix",
    "Path",
    "PathError",
    "PointedLuka",
    "ReducedForm",
    "SampleReport",
    "StepKind",
    "brute_force_counts",
    "draw_decoration",
    "draw_step",
    "draw_uniform",
    "enumerate_all",
    "factorize_prefix",
    "fold",
    "fuss_catalan",
    "is_mdyck_path",
    "is_mdyck_prefix",
    "is_mluka",
    "luka_count",
    "prefix_weighted_count",
    "reduced_form",
    "run_cost_experiment",
    "sample_mdyck",
    "sample_mluka",
    "sample_prefix",
    "unfold",
]
