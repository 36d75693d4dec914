use alloc::string::String;
use core::fmt;

use crate::lattice::Site;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A factor or sequence references a site the lattice does not contain.
    SiteOutsideLattice(Site),
    SectorOutOfRange { sector: usize, sites: usize },
    InvalidLattice(String),
    InvalidSpec(String),
    /// Two operators realized on different bases were combined.
    BasisMismatch,
    /// A monomial maps a sector state to a state outside the sector.
    LeavesSector,
    Unsupported(&'static str),
    InvalidInterval { k: i64, l: i64 },
    IncompatibleSupport(String),
    TooLarge { sites: usize, limit: usize },
    NotSymmetric,
    NotInvariant,
    Numeric(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SiteOutsideLattice(s) => write!(f, "site {s} is not in the lattice"),
            Error::SectorOutOfRange { sector, sites } => {
                write!(f, "particle-number sector {sector} out of range for {sites} sites")
            }
            Error::InvalidLattice(msg) => write!(f, "invalid lattice: {msg}"),
            Error::InvalidSpec(msg) => write!(f, "invalid model spec: {msg}"),
            Error::BasisMismatch => f.write_str("operators act on different bases"),
            Error::LeavesSector => f.write_str("operator maps a state outside the particle-number sector"),
            Error::Unsupported(what) => write!(f, "unsupported: {what}"),
            Error::InvalidInterval { k, l } => write!(f, "interval requires k < l, got k={k}, l={l}"),
            Error::IncompatibleSupport(msg) => write!(f, "incompatible support: {msg}"),
            Error::TooLarge { sites, limit } => {
                write!(f, "{sites} sites exceeds the exhaustive limit of {limit}")
            }
            Error::NotSymmetric => f.write_str("matrix is not symmetric"),
            Error::NotInvariant => f.write_str("state is not invariant under the dynamics"),
            Error::Numeric(msg) => write!(f, "numerical failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
