//! Probabilistic 3D scenario language: write a scenario once, then sample
//! concrete scenes from it and simulate them under temporal requirements.
//!
//! The pipeline runs [`lang`] (parse) → [`specifier`] (resolve) →
//! [`sampler`] (rejection sampling over [`mesh`] and [`visibility`]) →
//! [`sim`] with [`temporal`] monitors, with [`export`] and [`cli`] on top.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod export;
pub mod geom;
pub mod lang;
pub mod mesh;
pub mod rng;
pub mod sampler;
pub mod sim;
pub mod specifier;
pub mod temporal;
pub mod visibility;
