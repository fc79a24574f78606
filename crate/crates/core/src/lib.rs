//! A desk-scale laboratory for algorithmic information theory.
//!
//! Everything is computed exactly over one concrete prefix-free machine
//! under explicit length and fuel bounds: complexities and algorithmic
//! probabilities are fuel-bounded estimates, totality and the border
//! sequence are relative to the bounds, and all arithmetic is dyadic.

pub mod codec;
pub mod machine;
pub mod leftward;
pub mod complexity;
pub mod measures;
pub mod monotone;
pub mod predicates;
pub mod harness;
