use crate::error::{Error, Result};

/// Product space of information states. Coordinate 0 is the shared state
/// unobservable to everyone; coordinates `1..=n` belong to the `n` bidders.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    sizes: Vec<usize>,
    labels: Vec<Vec<String>>,
}

impl StateSpace {
    pub fn new(sizes: Vec<usize>) -> Result<Self> {
        let labels = sizes
            .iter()
            .map(|&m| (0..m).map(|k| k.to_string()).collect())
            .collect();
        Self::with_labels(sizes, labels)
    }

    pub fn with_labels(sizes: Vec<usize>, labels: Vec<Vec<String>>) -> Result<Self> {
        if sizes.len() < 2 {
            return Err(Error::Scenario {
                location: "state_space.sizes".into(),
                message: "need the shared coordinate plus at least one bidder".into(),
            });
        }
        if sizes.iter().any(|&m| m == 0) {
            return Err(Error::Scenario {
                location: "state_space.sizes".into(),
                message: "every coordinate must have at least one state".into(),
            });
        }
        if labels.len() != sizes.len() || labels.iter().zip(&sizes).any(|(l, &m)| l.len() != m) {
            return Err(Error::Scenario {
                location: "state_space.labels".into(),
                message: "label lists must match the coordinate sizes".into(),
            });
        }
        Ok(Self { sizes, labels })
    }

    pub fn num_bidders(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn labels(&self, coord: usize) -> &[String] {
        &self.labels[coord]
    }

    /// Size of a bidder's own state coordinate.
    pub fn bidder_size(&self, bidder: usize) -> usize {
        self.sizes[bidder + 1]
    }

    pub fn shared_size(&self) -> usize {
        self.sizes[0]
    }

    pub fn check_coord(&self, coord: usize) -> Result<()> {
        if coord >= self.sizes.len() {
            return Err(Error::CoordinateOutOfRange {
                coord,
                len: self.sizes.len(),
            });
        }
        Ok(())
    }

    pub fn check_bidder(&self, bidder: usize) -> Result<()> {
        if bidder >= self.num_bidders() {
            return Err(Error::BidderOutOfRange {
                bidder,
                n: self.num_bidders(),
            });
        }
        Ok(())
    }

    pub fn num_profiles(&self) -> usize {
        self.sizes.iter().product()
    }

    /// Row-major index of a full profile (shared state first).
    pub fn profile_to_index(&self, profile: &[usize]) -> usize {
        debug_assert_eq!(profile.len(), self.sizes.len());
        let mut idx = 0;
        for (coord, &state) in profile.iter().enumerate() {
            debug_assert!(state < self.sizes[coord]);
            idx = idx * self.sizes[coord] + state;
        }
        idx
    }

    pub fn index_to_profile(&self, mut idx: usize) -> Vec<usize> {
        let mut profile = vec![0; self.sizes.len()];
        for coord in (0..self.sizes.len()).rev() {
            profile[coord] = idx % self.sizes[coord];
            idx /= self.sizes[coord];
        }
        profile
    }

    /// State of `coord` inside the profile with row-major index `idx`.
    pub fn coord_of_index(&self, idx: usize, coord: usize) -> usize {
        let mut rest = idx;
        for c in (coord + 1..self.sizes.len()).rev() {
            rest /= self.sizes[c];
        }
        rest % self.sizes[coord]
    }

    pub fn profiles(&self) -> impl Iterator<Item = Vec<usize>> + '_ {
        (0..self.num_profiles()).map(|i| self.index_to_profile(i))
    }

    /// Iterates profiles of all coordinates except `coord` as index vectors
    /// of length `sizes.len() - 1`.
    pub fn profiles_excluding(&self, coord: usize) -> Vec<Vec<usize>> {
        let rest: Vec<usize> = (0..self.sizes.len()).filter(|&c| c != coord).collect();
        let mut out = vec![vec![]];
        for &c in &rest {
            let mut next = Vec::with_capacity(out.len() * self.sizes[c]);
            for p in &out {
                for s in 0..self.sizes[c] {
                    let mut q = p.clone();
                    q.push(s);
                    next.push(q);
                }
            }
            out = next;
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_roundtrip() {
        let space = StateSpace::new(vec![2, 3, 2]).unwrap();
        for idx in 0..space.num_profiles() {
            let profile = space.index_to_profile(idx);
            assert_eq!(space.profile_to_index(&profile), idx);
            for coord in 0..3 {
                assert_eq!(space.coord_of_index(idx, coord), profile[coord]);
            }
        }
    }

    #[test]
    fn rejects_empty_coordinate() {
        assert!(StateSpace::new(vec![1, 0]).is_err());
        assert!(StateSpace::new(vec![1]).is_err());
    }
}
