//! Shared evaluation plumbing: given a signal profile, precompute whatever
//! the mechanism needs so outcomes at many bid profiles stay cheap.

use crate::error::Result;
use crate::mechanisms::{Outcome, ValueDist};
use crate::meta::{MetaKind, ReticentMechanism};
use crate::model::{joint_posterior, PosteriorOverProfiles, Signal};
use crate::scenario::Scenario;

pub(crate) struct Evaluator<'a> {
    pub scenario: &'a Scenario,
    pub mech: &'a ReticentMechanism,
    shared: Vec<f64>,
}

/// Reusable posterior and context buffers for tight search loops.
pub(crate) struct CtxScratch {
    probs: Vec<f64>,
    pub ctx: SigCtx,
}

/// Everything derived from one signal profile.
pub(crate) struct SigCtx {
    /// posterior marginal of each bidder's own state, for utility terms
    pub own_marginals: Vec<Vec<f64>>,
    body: CtxBody,
}

enum CtxBody {
    /// expected transform: the per-bidder value distributions at this profile
    Expected(Vec<ValueDist>),
    /// simulated transform: profile weights the base outcomes average over
    Simulated(Vec<(usize, f64)>),
}

impl<'a> Evaluator<'a> {
    pub fn new(scenario: &'a Scenario, mech: &'a ReticentMechanism) -> Self {
        let shared = scenario.prior().shared_marginal();
        Self {
            scenario,
            mech,
            shared,
        }
    }

    pub fn context(&self, signals: &[Signal]) -> Result<SigCtx> {
        let posterior = joint_posterior(self.scenario.prior(), signals)?;
        self.context_of_posterior(&posterior)
    }

    /// Reusable buffers for [`Evaluator::refill`], sized for this scenario.
    pub fn scratch(&self) -> CtxScratch {
        let scenario = self.scenario;
        let space = scenario.space();
        let n = space.num_bidders();
        let body = match self.mech.kind {
            MetaKind::Expected => CtxBody::Expected(
                (0..n)
                    .map(|i| ValueDist {
                        values: vec![0.0; scenario.type_priors()[i].len()],
                        masses: scenario.type_priors()[i].probs().to_vec(),
                    })
                    .collect(),
            ),
            MetaKind::Simulated => CtxBody::Simulated(Vec::with_capacity(space.num_profiles())),
        };
        CtxScratch {
            probs: vec![0.0; space.num_profiles()],
            ctx: SigCtx {
                own_marginals: (0..n).map(|i| vec![0.0; space.bidder_size(i)]).collect(),
                body,
            },
        }
    }

    /// One-pass Bayes update into a reusable scratch, for search loops that
    /// visit millions of signal profiles. Returns the normalizer `Z(s)`, or
    /// `None` on profiles inconsistent with a correlated prior. Only the
    /// `focus` bidder's posterior state marginal is refreshed. Assumes every
    /// signal is Bayes-plausible, so it never leaves the prior's support.
    pub fn refill(&self, signals: &[&Signal], focus: usize, scratch: &mut CtxScratch) -> Option<f64> {
        let scenario = self.scenario;
        let space = scenario.space();
        let CtxScratch { probs, ctx } = scratch;
        let mut z = 0.0;
        for (idx, p) in probs.iter_mut().enumerate() {
            let mut w = scenario.prior().prob(idx);
            if w != 0.0 {
                for (j, signal) in signals.iter().enumerate() {
                    let k = space.coord_of_index(idx, j + 1);
                    let g = scenario.bidder_marginal(j)[k];
                    w *= if g > 0.0 { signal.probs()[k] / g } else { 0.0 };
                    if w == 0.0 {
                        break;
                    }
                }
            }
            *p = w;
            z += w;
        }
        if z <= 0.0 {
            return None;
        }
        for p in probs.iter_mut() {
            *p /= z;
        }

        let marginal = &mut ctx.own_marginals[focus];
        marginal.iter_mut().for_each(|m| *m = 0.0);
        for (idx, &p) in probs.iter().enumerate() {
            marginal[space.coord_of_index(idx, focus + 1)] += p;
        }
        match &mut ctx.body {
            CtxBody::Expected(dists) => {
                for (i, dist) in dists.iter_mut().enumerate() {
                    for (t, v) in dist.values.iter_mut().enumerate() {
                        *v = if self.mech.regulated {
                            signals[i]
                                .probs()
                                .iter()
                                .enumerate()
                                .map(|(k, &s)| s * scenario.vbar_state(i, t, k))
                                .sum()
                        } else {
                            probs
                                .iter()
                                .enumerate()
                                .map(|(idx, &p)| p * scenario.kernel().value(i, t, idx))
                                .sum()
                        };
                    }
                }
            }
            CtxBody::Simulated(weights) => {
                weights.clear();
                for idx in 0..space.num_profiles() {
                    let w = if self.mech.regulated {
                        let mut w = self.shared[space.coord_of_index(idx, 0)];
                        for (i, signal) in signals.iter().enumerate() {
                            if w == 0.0 {
                                break;
                            }
                            w *= signal.probs()[space.coord_of_index(idx, i + 1)];
                        }
                        w
                    } else {
                        probs[idx]
                    };
                    if w > 0.0 {
                        weights.push((idx, w));
                    }
                }
            }
        }
        Some(z)
    }

    pub fn context_of_posterior(&self, posterior: &PosteriorOverProfiles) -> Result<SigCtx> {
        let scenario = self.scenario;
        let space = scenario.space();
        let n = space.num_bidders();
        let own_marginals = (0..n)
            .map(|i| posterior.bidder_marginal(space, i))
            .collect();
        let body = match self.mech.kind {
            MetaKind::Expected => {
                let dists = (0..n)
                    .map(|i| {
                        let values = (0..scenario.type_priors()[i].len())
                            .map(|t| {
                                if self.mech.regulated {
                                    posterior
                                        .signal(i)
                                        .probs()
                                        .iter()
                                        .enumerate()
                                        .map(|(k, &s)| s * scenario.vbar_state(i, t, k))
                                        .sum()
                                } else {
                                    posterior
                                        .probs()
                                        .iter()
                                        .enumerate()
                                        .map(|(idx, &p)| p * scenario.kernel().value(i, t, idx))
                                        .sum()
                                }
                            })
                            .collect();
                        ValueDist {
                            values,
                            masses: scenario.type_priors()[i].probs().to_vec(),
                        }
                    })
                    .collect();
                CtxBody::Expected(dists)
            }
            MetaKind::Simulated => {
                let shared = &self.shared;
                let mut weights = Vec::new();
                for idx in 0..space.num_profiles() {
                    let w = if self.mech.regulated {
                        let mut w = shared[space.coord_of_index(idx, 0)];
                        for (i, signal) in posterior.signals().iter().enumerate() {
                            if w == 0.0 {
                                break;
                            }
                            w *= signal.probs()[space.coord_of_index(idx, i + 1)];
                        }
                        w
                    } else {
                        posterior.probs()[idx]
                    };
                    if w > 0.0 {
                        weights.push((idx, w));
                    }
                }
                CtxBody::Simulated(weights)
            }
        };
        Ok(SigCtx {
            own_marginals,
            body,
        })
    }

    pub fn outcome(&self, ctx: &SigCtx, bids: &[usize]) -> Outcome {
        match &ctx.body {
            CtxBody::Expected(dists) => self.mech.base.outcome(bids, dists),
            CtxBody::Simulated(weights) => {
                let mut acc = Outcome::zero(bids.len());
                for &(idx, w) in weights {
                    acc.add_scaled(w, &self.mech.base.outcome(bids, self.scenario.state_dists(idx)));
                }
                acc
            }
        }
    }

    /// Expected value of `bidder` holding true type `t`, under this context's
    /// posterior over his own state.
    pub fn expected_own_value(&self, ctx: &SigCtx, bidder: usize, t: usize) -> f64 {
        ctx.own_marginals[bidder]
            .iter()
            .enumerate()
            .map(|(k, &p)| p * self.scenario.vbar_state(bidder, t, k))
            .sum()
    }
}
