//! Exact dynamics of the Disco dilation surface: the affine interval exchanges
//! `F_t`, their Rauzy–Veech induction, the Schottky group acting on
//! directions, and a suspension model used as a geometric cross-check.

pub mod aiet;
pub mod classify;
pub mod cli;
pub mod exactnum;
pub mod rauzy;
pub mod schottky;
pub mod surface;
