#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod diagnostics;
pub mod linearize;
pub mod numerics;
pub mod plants;
pub mod statespace;
pub(crate) mod util;
