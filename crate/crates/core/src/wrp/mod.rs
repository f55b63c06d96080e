//! Punishment construction and verification of weakly renegotiation-proof
//! payoff targets.

pub mod certificate;
pub mod gap;
pub mod punish;
pub mod scan;

pub use certificate::{
    assemble, verify_certificate, CertificateFile, Check, Margins, Mode, Profile, ProfileFile, Verification, WrpCertificate,
    STRICT_MARGIN, WEAK_TOL,
};
pub use gap::{receiver_gap, GapPoint, GapReport};
pub use punish::{
    find_receiver_punishment, find_sender_punishment, normal_profile_for, partition_profile, BeyondLimit,
    ReceiverPunishment, SearchOptions, SenderPunishment, DEFAULT_PARTITION_LIMIT,
};
pub use scan::{assess_point, certify_point, max_sender_given_receiver, scan_frontier, Assessment, Refusal, ScanRow};
