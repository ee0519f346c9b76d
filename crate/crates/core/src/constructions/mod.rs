//! Auerbach bases, δ-nets and the sublattice discretisation of ℓ^p_N(μ).

mod auerbach;
mod discrete;
mod net;
mod sublattice;

pub use auerbach::{auerbach_basis, auerbach_search, AuerbachBasis};
pub use discrete::{DiscreteLpSpace, SubspaceNorm};
pub use net::{delta_net, delta_net_with, volume_bound};
pub use sublattice::{
    m0, sublattice_discretize, sublattice_transfer_check, SublatticeResult, TransferReport,
};
