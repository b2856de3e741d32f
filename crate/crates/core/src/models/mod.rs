//! Built-in Hamiltonian families.
//!
//! A [`Family`] is a one-parameter set of Hamiltonians `H(λ)` that may be
//! block-diagonal in independent sectors (Bloch momenta for the SSH chain).
//! Susceptibilities of multi-sector families are per-sector sums divided by
//! [`Family::density_norm`].

mod linear;
mod ssh;
mod toy;

pub use linear::LinearFamily;
pub use ssh::{
    ssh_bloch, ssh_chi0_density, ssh_discriminant, ssh_ep_locations, ssh_momentum, ssh_phase, ssh_realspace,
    BlochBlock, SshEp, SshFamily, SshParam, SshParams, SshPhase,
};
pub use toy::{toy_chi_exact, toy_hamiltonian, toy_metric_exact, ToyFamily, ToyParams};

use crate::error::Result;
use crate::linalg::{eig_general, ComplexMatrix};

pub trait Family: Send + Sync {
    /// Short identifier used in reports.
    fn name(&self) -> String;

    /// Number of independent blocks `H(λ)` splits into.
    fn sectors(&self) -> usize {
        1
    }

    fn block(&self, lambda: f64, sector: usize) -> Result<ComplexMatrix>;

    /// Divisor applied to the summed per-sector susceptibility.
    fn density_norm(&self) -> f64 {
        1.0
    }

    /// Signed quantity whose zeros in `λ` are the exceptional points of one
    /// sector, when the family has one in closed form.
    fn discriminant(&self, _lambda: f64, _sector: usize) -> Option<f64> {
        None
    }

    /// `min_{i≠j} |E_i − E_j|` over all sectors.
    fn min_band_gap(&self, lambda: f64) -> Result<f64> {
        let mut gap = f64::INFINITY;
        for s in 0..self.sectors() {
            let values = eig_general(&self.block(lambda, s)?)?.values;
            for i in 0..values.len() {
                for j in (i + 1)..values.len() {
                    gap = gap.min((values[i] - values[j]).norm());
                }
            }
        }
        Ok(gap)
    }
}
