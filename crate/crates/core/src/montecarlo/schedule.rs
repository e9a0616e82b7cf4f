//! Per-slot link selection.

use rand::Rng;

use super::drop::{Classification, Drop, UserClass};

/// One active DT to DR link.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Link {
    pub cluster: usize,
    pub tx: usize,
    pub rx: usize,
}

/// Links active in one slot on each band.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Schedule {
    /// Hit group served on the Coop band, if any.
    pub coop_group: Option<usize>,
    pub coop: Vec<Link>,
    pub ncoop: Vec<Link>,
}

/// Uniform choice among `candidates`; `None` if empty.
fn pick<R: Rng + ?Sized>(candidates: &[usize], rng: &mut R) -> Option<usize> {
    match candidates.len() {
        0 => None,
        n => Some(candidates[rng.random_range(0..n)]),
    }
}

/// One N-Coop link in each of `clusters` among users accepted by
/// `eligible`. A DR never transmits to itself; a cluster without another
/// candidate stays idle.
pub fn schedule_ncoop<R, F>(drop: &Drop, clusters: &[usize], eligible: F, rng: &mut R) -> Vec<Link>
where
    R: Rng + ?Sized,
    F: Fn(usize) -> bool,
{
    let mut links = Vec::with_capacity(clusters.len());
    let mut candidates = Vec::new();
    for &c in clusters {
        candidates.clear();
        candidates.extend(
            drop.members[c]
                .iter()
                .copied()
                .filter(|&u| eligible(u) && !drop.users[u].self_request()),
        );
        if let Some(rx) = pick(&candidates, rng) {
            let tx = drop
                .holder(c, drop.users[rx].group)
                .expect("D2D users request a locally cached group");
            links.push(Link { cluster: c, tx, rx });
        }
    }
    links
}

/// Coop band of a Mode 1 slot: a uniform hit group, then a uniform
/// requester of it in every participating cluster.
pub fn schedule_coop<R: Rng + ?Sized>(drop: &Drop, cls: &Classification, rng: &mut R) -> (Option<usize>, Vec<Link>) {
    if !cls.mode1() {
        return (None, Vec::new());
    }
    let idx = rng.random_range(0..cls.hit_groups.len());
    let group = cls.hit_groups[idx];
    let mut links = Vec::with_capacity(cls.participants[idx].len());
    let mut candidates = Vec::new();
    for &c in &cls.participants[idx] {
        candidates.clear();
        candidates.extend(drop.members[c].iter().copied().filter(|&u| {
            let user = &drop.users[u];
            user.group == group && cls.labels[u] == UserClass::Coop && !user.self_request()
        }));
        if let Some(rx) = pick(&candidates, rng) {
            let tx = drop.holder(c, group).expect("hit groups are cached in participating clusters");
            links.push(Link { cluster: c, tx, rx });
        }
    }
    (Some(group), links)
}

/// Both bands of a slot. With `cooperate` false every D2D user competes
/// for the single N-Coop band.
pub fn schedule<R: Rng + ?Sized>(drop: &Drop, cls: &Classification, cooperate: bool, rng: &mut R) -> Schedule {
    let all: Vec<usize> = (0..drop.cluster_count()).collect();
    if cooperate {
        let (coop_group, coop) = schedule_coop(drop, cls, rng);
        let ncoop = schedule_ncoop(drop, &all, |u| cls.labels[u] == UserClass::NCoop, rng);
        Schedule { coop_group, coop, ncoop }
    } else {
        let ncoop = schedule_ncoop(drop, &all, |u| cls.labels[u] != UserClass::Cellular, rng);
        Schedule {
            coop_group: None,
            coop: Vec::new(),
            ncoop,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ClusterLayout;
    use crate::montecarlo::drop::{classify, generate_drop, RequestSampler};
    use crate::montecarlo::Placement;
    use crate::popularity::PopularityModel;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use statrs::distribution::{ChiSquared, ContinuousCDF};

    fn fixed_drop(groups: &[&[usize]]) -> Drop {
        let model = PopularityModel::new(100, 10, 1.0).unwrap();
        let layout = ClusterLayout::build(100.0, groups.len()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut d = generate_drop(
            &layout,
            &model,
            &RequestSampler::new(&model),
            groups[0].len(),
            Placement::PerCell,
            &mut rng,
        );
        for (c, reqs) in groups.iter().enumerate() {
            for (j, &g) in reqs.iter().enumerate() {
                let u = d.members[c][j];
                d.users[u].group = g;
            }
        }
        d
    }

    #[test]
    fn single_candidate_is_deterministic() {
        // Cluster members: user 0 caches 1, user 1 caches 2, user 2 caches 3.
        let d = fixed_drop(&[&[2, 5, 9], &[9, 1, 8]]);
        let cls = classify(&d, 2);
        assert!(!cls.mode1());
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = schedule(&d, &cls, true, &mut rng);
            assert!(s.coop.is_empty());
            assert_eq!(s.ncoop.len(), 2);
            assert_eq!((s.ncoop[0].tx, s.ncoop[0].rx), (d.members[0][1], d.members[0][0]));
            assert_eq!((s.ncoop[1].tx, s.ncoop[1].rx), (d.members[1][0], d.members[1][1]));
        }
    }

    #[test]
    fn self_requesters_idle() {
        let d = fixed_drop(&[&[1, 2, 3], &[1, 2, 3]]);
        let cls = classify(&d, 2);
        assert_eq!(cls.hit_groups, vec![1, 2, 3]);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = schedule(&d, &cls, true, &mut rng);
        assert!(s.coop_group.is_some());
        assert!(s.coop.is_empty());
        assert!(s.ncoop.is_empty());
    }

    #[test]
    fn coop_links_share_the_group() {
        let d = fixed_drop(&[&[1, 1, 4], &[1, 3, 1], &[2, 1, 2]]);
        let cls = classify(&d, 3);
        assert_eq!(cls.hit_groups, vec![1]);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let s = schedule(&d, &cls, true, &mut rng);
        assert_eq!(s.coop.len(), 3);
        for l in &s.coop {
            assert_eq!(d.users[l.rx].group, 1);
            assert_eq!(d.users[l.tx].cached_group, Some(1));
            assert_ne!(l.tx, l.rx);
        }
        // N-Coop candidates: cluster 0 none, cluster 1 the group-3 user, cluster 2 both group-2 users.
        assert_eq!(s.ncoop.len(), 2);
    }

    #[test]
    fn round_robin_equivalence() {
        // Cluster 0 has four Coop requesters of group 1 (one is its holder)
        // and three N-Coop requesters of groups 2..=3.
        let d = fixed_drop(&[&[1, 1, 1, 1, 2, 3, 3], &[5, 1, 4, 4, 4, 4, 4]]);
        let cls = classify(&d, 2);
        let slots = 100_000;
        let mut coop_hits = [0u64; 7];
        let mut ncoop_hits = [0u64; 7];
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..slots {
            let s = schedule(&d, &cls, true, &mut rng);
            for l in s.coop.iter().filter(|l| l.cluster == 0) {
                coop_hits[l.rx] += 1;
            }
            for l in s.ncoop.iter().filter(|l| l.cluster == 0) {
                ncoop_hits[l.rx] += 1;
            }
        }
        assert_eq!(coop_hits[0], 0);
        let chi = |counts: &[u64]| {
            let total: u64 = counts.iter().sum();
            let e = total as f64 / counts.len() as f64;
            let stat: f64 = counts.iter().map(|&c| (c as f64 - e).powi(2) / e).sum();
            let dof = (counts.len() - 1) as f64;
            1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
        };
        assert!(chi(&coop_hits[1..4]) > 0.05);
        assert!(chi(&ncoop_hits[4..7]) > 0.05);
    }

    #[test]
    fn mode0_has_no_coop_links() {
        let model = PopularityModel::new(300, 10, 0.0).unwrap();
        let layout = ClusterLayout::build(100.0, 9).unwrap();
        let sampler = RequestSampler::new(&model);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut seen = 0;
        for _ in 0..200 {
            let d = generate_drop(&layout, &model, &sampler, 20, Placement::PerCell, &mut rng);
            let cls = classify(&d, 9);
            if !cls.mode1() {
                seen += 1;
                let s = schedule(&d, &cls, true, &mut rng);
                assert!(s.coop.is_empty() && s.coop_group.is_none());
            }
        }
        assert!(seen > 0);
    }
}
