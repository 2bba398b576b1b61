//! Canonical lifts of infinitesimal one-parameter subgroups.
//!
//! Over a prime field `F_p`, a height-`r` infinitesimal one-parameter subgroup of
//! a unipotent group `U` is a Hopf-algebra map `F_p[U] -> F_p[t]/(t^{p^r})`. When
//! the nilpotence class of `U` is below `p`, lifting every generator image to its
//! degree `< p^r` representative yields a genuine one-parameter subgroup
//! `F_p[U] -> F_p[t]`. This crate computes those lifts for block-unitriangular
//! matrix groups, checks their properties, and realizes the correspondence with
//! commuting tuples of nilpotent matrices via truncated exponentials.

#![allow(clippy::needless_range_loop, clippy::len_without_is_empty)]

pub mod arith;
pub mod exponential;
pub mod morphisms;
pub mod oracle;
pub mod par;
pub mod rootsys;
pub mod unipotent;
