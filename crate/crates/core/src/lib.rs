//! Single transferable vote (single winner), single-agent manipulation search,
//! vote profile generators, and a Monte-Carlo harness measuring how often and
//! how cheaply an election can be manipulated.

pub mod cli;
pub mod error;
pub mod experiments;
pub mod io;
pub mod profile;
pub mod report;
pub mod seed;
pub mod solver;
pub mod stv;
pub mod votegen;

pub use error::{Error, Result};
pub use profile::{Ballot, CandidateId, CandidateSet, Profile, MAX_CANDIDATES};
pub use seed::RngSeed;
pub use solver::{
    brute_force_manipulate, manipulate_single, manipulate_with, verify_witness, winnable_set,
    Decision, ManipulationInstance, SearchLimits, SearchOptions, SearchResult, Strategy,
};
pub use stv::{stv_winner, tally, ElectionOutcome, RoundAction, RoundRecord, TieRule};
