//! Recoverability analysis for modified compressive sensing with a
//! partially known, possibly erroneous, support.
//!
//! The crate certifies exact recovery of sparse signals under truncated
//! l1 minimization, and computes the recovery probability of a fixed
//! measurement matrix either exactly (exhausting the quad space) or by
//! seeded Monte Carlo sampling.
//!
//! Module map:
//! - [`numkit`]: dense matrices, vectors, index sets, sign patterns.
//! - [`lp`]: two-phase simplex plus a brute-force vertex oracle.
//! - [`recovery`]: truncated-l1 / Basis Pursuit solves.
//! - [`snc`]: the sufficient-and-necessary recoverability certificate.
//! - [`probability`]: exact and Monte Carlo recovery probability.
//! - [`experiments`]: scripted reproduction of the two curve studies.
//! - [`io`]: matrix CSV format and atomic writes.

pub mod experiments;
pub mod io;
pub mod lp;
pub mod numkit;
pub mod probability;
pub mod recovery;
pub mod snc;
