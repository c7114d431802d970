use super::prior::{JointPrior, PROB_TOL};
use super::signal::PosteriorOverProfiles;
use super::space::StateSpace;
use super::type_prior::TypePrior;
use crate::error::{Error, Result};

/// Separable factorization of one bidder's values: v(t, theta) =
/// base(t) * cvr(theta_i), the conversion-rate form of ad auctions.
#[derive(Debug, Clone, PartialEq)]
pub struct SeparableValue {
    pub base: Vec<f64>,
    pub cvr: Vec<f64>,
}

/// Per-bidder value tables v_i(t_i, theta) over (own type, full information
/// profile). Full-profile dependence is admitted so interdependent examples
/// are representable; `private_value(i)` reports whether bidder i's table is
/// constant in the other bidders' states, which several theorem
/// preconditions require.
#[derive(Debug, Clone)]
pub struct ValueKernel {
    tables: Vec<Vec<Vec<f64>>>,
    private: Vec<bool>,
    separable: Vec<Option<SeparableValue>>,
}

impl ValueKernel {
    /// `tables[bidder][type_idx][profile_idx]`.
    pub fn new(space: &StateSpace, tables: Vec<Vec<Vec<f64>>>) -> Result<Self> {
        let n = space.num_bidders();
        assert_eq!(tables.len(), n, "one value table per bidder");
        for (bidder, table) in tables.iter().enumerate() {
            for (type_idx, row) in table.iter().enumerate() {
                assert_eq!(row.len(), space.num_profiles());
                for (profile, &v) in row.iter().enumerate() {
                    if !v.is_finite() || v < 0.0 {
                        return Err(Error::InvalidValue {
                            bidder,
                            type_idx,
                            profile,
                            value: v,
                        });
                    }
                }
            }
        }
        let private = (0..n)
            .map(|b| Self::table_is_private(space, b, &tables[b]))
            .collect();
        Ok(Self {
            separable: vec![None; tables.len()],
            private,
            tables,
        })
    }

    /// Attaches a separable factorization for one bidder, checking it against
    /// the table entry by entry.
    pub fn with_separable(
        mut self,
        space: &StateSpace,
        bidder: usize,
        factor: SeparableValue,
    ) -> Result<Self> {
        let table = &self.tables[bidder];
        for (type_idx, row) in table.iter().enumerate() {
            for (profile, &v) in row.iter().enumerate() {
                let own = space.coord_of_index(profile, bidder + 1);
                let expected = factor.base[type_idx] * factor.cvr[own];
                if (v - expected).abs() > PROB_TOL {
                    return Err(Error::NotSeparable {
                        bidder,
                        type_idx,
                        profile,
                        actual: v,
                        expected,
                    });
                }
            }
        }
        self.separable[bidder] = Some(factor);
        Ok(self)
    }

    pub fn from_separable(
        space: &StateSpace,
        type_priors: &[TypePrior],
        factors: Vec<SeparableValue>,
    ) -> Result<Self> {
        let tables = factors
            .iter()
            .enumerate()
            .map(|(bidder, f)| {
                assert_eq!(f.base.len(), type_priors[bidder].len());
                assert_eq!(f.cvr.len(), space.bidder_size(bidder));
                (0..f.base.len())
                    .map(|t| {
                        (0..space.num_profiles())
                            .map(|idx| f.base[t] * f.cvr[space.coord_of_index(idx, bidder + 1)])
                            .collect()
                    })
                    .collect()
            })
            .collect();
        let mut kernel = Self::new(space, tables)?;
        for (bidder, f) in factors.into_iter().enumerate() {
            kernel.separable[bidder] = Some(f);
        }
        Ok(kernel)
    }

    fn table_is_private(space: &StateSpace, bidder: usize, table: &[Vec<f64>]) -> bool {
        // constant in theta_{-i} once (theta_i, theta_0) are fixed
        let own = bidder + 1;
        for row in table {
            for idx in 0..row.len() {
                let s0 = space.coord_of_index(idx, 0);
                let si = space.coord_of_index(idx, own);
                // compare against the canonical profile with theta_{-i} = 0
                let mut profile = vec![0; space.sizes().len()];
                profile[0] = s0;
                profile[own] = si;
                let canon = space.profile_to_index(&profile);
                if (row[idx] - row[canon]).abs() > PROB_TOL {
                    return false;
                }
            }
        }
        true
    }

    pub fn num_bidders(&self) -> usize {
        self.tables.len()
    }

    pub fn num_types(&self, bidder: usize) -> usize {
        self.tables[bidder].len()
    }

    pub fn value(&self, bidder: usize, type_idx: usize, profile_idx: usize) -> f64 {
        self.tables[bidder][type_idx][profile_idx]
    }

    pub fn private_value(&self, bidder: usize) -> bool {
        self.private[bidder]
    }

    pub fn all_private(&self) -> bool {
        self.private.iter().all(|&p| p)
    }

    pub fn separable(&self, bidder: usize) -> Option<&SeparableValue> {
        self.separable[bidder].as_ref()
    }
}

/// Posterior-expected value of each bidder's bid:
/// vbar_i(b_i, s) = sum_theta v_i(b_i, theta) Pr(theta | s).
pub fn expected_value(
    kernel: &ValueKernel,
    bids: &[usize],
    posterior: &PosteriorOverProfiles,
) -> Vec<f64> {
    (0..kernel.num_bidders())
        .map(|i| {
            let row = &kernel.tables[i][bids[i]];
            row.iter()
                .zip(posterior.probs())
                .map(|(v, p)| v * p)
                .sum()
        })
        .collect()
}

/// Expected value of a bidder given his own realized state, with the shared
/// state (and, for interdependent kernels, the opponents' states conditioned
/// on his own) integrated out under the prior.
pub fn expected_value_given_state(
    kernel: &ValueKernel,
    bidder: usize,
    type_idx: usize,
    state: usize,
    prior: &JointPrior,
) -> Result<f64> {
    let space = prior.space();
    space.check_bidder(bidder)?;
    let own = bidder + 1;
    let marginal = prior.bidder_marginal(bidder)?;
    if marginal[state] <= 0.0 {
        return Err(Error::ZeroMassState { bidder, state });
    }
    let row = &kernel.tables[bidder][type_idx];
    let mut acc = 0.0;
    for (idx, &v) in row.iter().enumerate() {
        if space.coord_of_index(idx, own) == state {
            acc += prior.prob(idx) * v;
        }
    }
    Ok(acc / marginal[state])
}
