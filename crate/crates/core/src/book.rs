//! Runs the guide's code listings as doctests.

#[doc = include_str!("../../../book/src/introduction.md")]
mod introduction {}
#[doc = include_str!("../../../book/src/design-spaces.md")]
mod design_spaces {}
#[doc = include_str!("../../../book/src/forward-models.md")]
mod forward_models {}
#[doc = include_str!("../../../book/src/sampling.md")]
mod sampling {}
#[doc = include_str!("../../../book/src/solver.md")]
mod solver {}
#[doc = include_str!("../../../book/src/metrics.md")]
mod metrics {}
#[doc = include_str!("../../../book/src/experiments.md")]
mod experiments {}
#[doc = include_str!("../../../book/src/cli.md")]
mod cli {}
