//! Subspaces, Fourier spectra, Bogolyubov subspaces, sumset certificates and
//! l-systems.

pub mod bogolyubov;
pub mod find_system;
pub mod lsystem;
pub mod set;
pub mod spectrum;
pub mod subspace;
pub mod sumset;

pub use bogolyubov::{bogolyubov, inverse_square_ceil, verify_witness, Bogolyubov, FourTermWitness};
pub use find_system::{find_system, FindOptions, FoundSystem};
pub use lsystem::{constraints_from_file, ConstraintFile, ConstraintSpaceFile, LSystem, LSystemCheck, LSystemFile, LSystemNodeFile};
pub use set::PointSet;
pub use spectrum::{dot_histograms, large_spectrum, spectrum, SpectralEntry, Spectrum, SPECTRUM_TOLERANCE};
pub use subspace::{Subspace, SubspaceFile};
pub use sumset::{
    sumset_member, ProductItem, ProductItemFile, ProductMultiset, ProductMultisetFile, SumsetCertificate,
    SumsetOutcome,
};
