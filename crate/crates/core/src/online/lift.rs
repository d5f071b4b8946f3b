use super::{FreeSet, Mpfs, OnlineError};
use crate::instance::normalize;
use crate::metric::{mst_of_metric, round_to_power_of_two, MetricSpace, WeightedTree};
use crate::online::SdSelector;
use crate::Rational;

/// Moves every request to its nearest site (ties to the lower site index)
/// and lets `inner` choose among the sites.
///
/// `inner` works on site indices `0..m`, where index `i` stands for
/// `sites[i]`.
#[derive(Debug, Clone)]
pub struct Lifted<M> {
    inner: M,
    sites: Vec<usize>,
    nearest: Vec<usize>,
    name: String,
}

pub fn lift_nearest_site<M: Mpfs>(inner: M, space: &MetricSpace, sites: &[usize]) -> Lifted<M> {
    let nearest = (0..space.len())
        .map(|p| {
            (0..sites.len())
                .min_by_key(|&i| (space.dist(p, sites[i]), sites[i]))
                .expect("at least one site")
        })
        .collect();
    let name = format!("nearest({})", inner.name());
    Lifted { inner, sites: sites.to_vec(), nearest, name }
}

impl<M> Lifted<M> {
    pub fn inner(&self) -> &M {
        &self.inner
    }

    /// The site a request at point `p` is delegated as.
    pub fn nearest_site(&self, p: usize) -> usize {
        self.sites[self.nearest[p]]
    }
}

impl<M: Mpfs> Mpfs for Lifted<M> {
    fn name(&self) -> &str {
        &self.name
    }

    fn num_points(&self) -> usize {
        self.nearest.len()
    }

    fn sites(&self) -> &[usize] {
        &self.sites
    }

    fn preference_list(&self, request: usize) -> Vec<usize> {
        self.inner.preference_list(self.nearest[request]).into_iter().map(|i| self.sites[i]).collect()
    }

    fn select(&self, request: usize, free: &FreeSet) -> Option<usize> {
        let mut inner_free = FreeSet::new(self.sites.len());
        for (i, &s) in self.sites.iter().enumerate() {
            if free.contains(s) {
                inner_free.insert(i);
            }
        }
        self.inner.select(self.nearest[request], &inner_free).map(|i| self.sites[i])
    }
}

/// Nearest-site lifting of SD on the rounded minimum spanning tree of the
/// sites.
#[derive(Debug, Clone)]
pub struct BStar {
    lifted: Lifted<SdSelector>,
    scale: Rational,
}

impl BStar {
    /// The power-of-two tree SD runs on, over site indices.
    pub fn tree(&self) -> &WeightedTree {
        self.lifted.inner().tree()
    }

    /// The factor the site metric was divided by before building the tree.
    pub fn scale(&self) -> Rational {
        self.scale
    }

    pub fn nearest_site(&self, p: usize) -> usize {
        self.lifted.nearest_site(p)
    }
}

/// Normalizes the site metric, takes its minimum spanning tree, rounds the
/// weights up to powers of two and runs SD on the result. Costs are still
/// measured in the original metric by whoever runs it.
pub fn build_bstar(space: &MetricSpace, sites: &[usize]) -> Result<BStar, OnlineError> {
    if sites.is_empty() {
        return Err(OnlineError::NotApplicable { alg: "bstar", reason: "needs at least one site" });
    }
    let (norm, scale) = normalize(&space.restrict(sites));
    let tree = round_to_power_of_two(&mst_of_metric(&norm))?;
    let sd = SdSelector::new(tree)?;
    Ok(BStar { lifted: lift_nearest_site(sd, space, sites), scale })
}

impl Mpfs for BStar {
    fn name(&self) -> &str {
        "bstar"
    }

    fn num_points(&self) -> usize {
        self.lifted.num_points()
    }

    fn sites(&self) -> &[usize] {
        self.lifted.sites()
    }

    fn preference_list(&self, request: usize) -> Vec<usize> {
        self.lifted.preference_list(request)
    }

    fn select(&self, request: usize, free: &FreeSet) -> Option<usize> {
        self.lifted.select(request, free)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::enumerate_sequences;
    use crate::instance::OnlineInstance;
    use crate::online::run_online;

    fn q(p: i64, d: i64) -> Rational {
        Rational::new(p, d)
    }

    fn line(points: &[i64]) -> MetricSpace {
        MetricSpace::new(points.iter().map(|a| points.iter().map(|b| q((a - b).abs(), 1)).collect()).collect())
            .unwrap()
    }

    #[test]
    fn nearest_site_examples() {
        let sd = |m| SdSelector::new(WeightedTree::from_edges(m, &(1..m).map(|v| (v - 1, v, q(1, 1))).collect::<Vec<_>>()).unwrap()).unwrap();
        // Points: sites at 0, 2 and 8, plus the midpoint 1 and coordinate 6.
        let space = line(&[0, 2, 8, 1, 6]);
        let l = lift_nearest_site(sd(3), &space, &[0, 1, 2]);
        assert_eq!(l.nearest_site(1), 1);
        assert_eq!(l.nearest_site(3), 0);
        assert_eq!(l.nearest_site(4), 2);
        assert_eq!(l.name(), "nearest(sd)");
    }

    #[test]
    fn bstar_on_three_points_is_sd_on_p3() {
        let z = q(0, 1);
        let space = MetricSpace::new(vec![
            vec![z, q(1, 1), q(2, 1)],
            vec![q(1, 1), z, q(3, 2)],
            vec![q(2, 1), q(3, 2), z],
        ])
        .unwrap();
        let b = build_bstar(&space, &[0, 1, 2]).unwrap();
        let p3 = WeightedTree::from_edges(3, &[(0, 1, q(1, 1)), (1, 2, q(2, 1))]).unwrap();
        assert_eq!(b.tree(), &p3);
        assert_eq!(b.scale(), q(1, 1));
    }

    #[test]
    fn bstar_on_a_tree_metric_matches_sd() {
        let p3 = WeightedTree::from_edges(3, &[(0, 1, q(1, 1)), (1, 2, q(2, 1))]).unwrap();
        let b = build_bstar(&MetricSpace::from_tree(&p3), &[0, 1, 2]).unwrap();
        let sd = SdSelector::new(p3.clone()).unwrap();
        for seq in enumerate_sequences(&[0, 1, 2], 3) {
            let inst = OnlineInstance::tree_all_sites(p3.clone(), seq).unwrap();
            assert_eq!(run_online(&inst, &b).unwrap(), run_online(&inst, &sd).unwrap());
        }
    }

    #[test]
    fn single_site_takes_everything() {
        let space = line(&[0, 3, 7]);
        let b = build_bstar(&space, &[1]).unwrap();
        for p in 0..3 {
            assert_eq!(b.select(p, &FreeSet::from_sites(3, &[1])), Some(1));
        }
        assert!(build_bstar(&space, &[]).is_err());
    }
}
