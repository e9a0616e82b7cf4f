//! Network realizations: placement, caches, requests and user classes.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::geometry::ClusterLayout;
use crate::popularity::PopularityModel;

use super::Placement;

/// Cell index and position of one placed user.
type CellPoint = (usize, f64, f64);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UserClass {
    Coop,
    NCoop,
    Cellular,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct User {
    pub cluster: usize,
    pub x: f64,
    pub y: f64,
    /// Group (1-based) held in this user's cache, if any.
    pub cached_group: Option<usize>,
    /// Requested file (1-based).
    pub file: usize,
    /// Group (1-based) of the requested file.
    pub group: usize,
}

impl User {
    /// The user's own cache holds the requested file.
    pub fn self_request(&self) -> bool {
        self.cached_group == Some(self.group)
    }
}

/// One random network realization.
#[derive(Debug, Clone, PartialEq)]
pub struct Drop {
    pub users: Vec<User>,
    /// User indices of each cluster; the `j`-th member caches group `j + 1`.
    pub members: Vec<Vec<usize>>,
}

impl Drop {
    pub fn cluster_count(&self) -> usize {
        self.members.len()
    }

    /// Number of groups cached in `cluster`.
    pub fn cached_groups(&self, cluster: usize) -> usize {
        self.members[cluster]
            .iter()
            .filter(|&&u| self.users[u].cached_group.is_some())
            .count()
    }

    /// User of `cluster` caching `group`.
    pub fn holder(&self, cluster: usize, group: usize) -> Option<usize> {
        self.members[cluster].get(group - 1).copied().filter(|&u| self.users[u].cached_group == Some(group))
    }
}

/// Draws cluster populations: exactly `per_cluster` users per cell, or
/// `total` users uniform over the hotspot.
fn place_users<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    placement: Placement,
    per_cluster: usize,
    rng: &mut R,
) -> (Vec<CellPoint>, Vec<Vec<usize>>) {
    let b = layout.cluster_count();
    let mut members = vec![Vec::new(); b];
    let mut points = Vec::with_capacity(b * per_cluster);
    match placement {
        Placement::PerCell => {
            for (c, m) in members.iter_mut().enumerate() {
                for _ in 0..per_cluster {
                    let (x, y) = layout.sample_in_cell(c, rng);
                    m.push(points.len());
                    points.push((c, x, y));
                }
            }
        }
        Placement::Uniform => {
            for _ in 0..b * per_cluster {
                let x = rng.random::<f64>() * layout.hotspot_side;
                let y = rng.random::<f64>() * layout.hotspot_side;
                let c = layout.cell_of(x, y);
                members[c].push(points.len());
                points.push((c, x, y));
            }
        }
    }
    (points, members)
}

/// Draws user positions, assigns caches and samples one Zipf request per user.
pub fn generate_drop<R: Rng + ?Sized>(
    layout: &ClusterLayout,
    model: &PopularityModel,
    sampler: &RequestSampler,
    per_cluster: usize,
    placement: Placement,
    rng: &mut R,
) -> Drop {
    let (points, members) = place_users(layout, placement, per_cluster, rng);
    let mut users: Vec<User> = points
        .into_iter()
        .map(|(cluster, x, y)| User {
            cluster,
            x,
            y,
            cached_group: None,
            file: 0,
            group: 0,
        })
        .collect();
    for list in &members {
        for (j, &u) in list.iter().enumerate() {
            if j < model.group_count() {
                users[u].cached_group = Some(j + 1);
            }
        }
    }
    for user in &mut users {
        let file = sampler.sample(rng);
        user.file = file;
        user.group = model.group_of_file(file);
    }
    Drop { users, members }
}

/// Zipf request sampler over the whole catalog.
#[derive(Debug, Clone)]
pub struct RequestSampler {
    files: WeightedIndex<f64>,
}

impl RequestSampler {
    pub fn new(model: &PopularityModel) -> Self {
        Self {
            files: WeightedIndex::new(model.pmf().iter().copied()).expect("pmf is a valid weight vector"),
        }
    }

    /// A requested file index (1-based).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        self.files.sample(rng) + 1
    }
}

/// Labels and hit groups of one drop.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub labels: Vec<UserClass>,
    /// Groups (1-based) that trigger cooperation, ascending.
    pub hit_groups: Vec<usize>,
    /// For each hit group, the clusters that cooperate on it (ascending).
    pub participants: Vec<Vec<usize>>,
    pub coop_users: usize,
    pub ncoop_users: usize,
    pub cellular_users: usize,
}

impl Classification {
    /// Mode 1: at least one hit group.
    pub fn mode1(&self) -> bool {
        !self.hit_groups.is_empty()
    }
}

/// Classifies users of a drop.
///
/// Groups cached and requested in the largest number of clusters are the
/// hit groups, provided that number reaches `min_clusters` (`min_clusters =
/// B` is full cooperation). Requesters of hit groups are Coop users, other
/// users with a locally cached group are N-Coop users, the rest are
/// cellular.
pub fn classify(drop: &Drop, min_clusters: usize) -> Classification {
    let b = drop.cluster_count();
    let max_group = drop.users.iter().map(|u| u.group).max().unwrap_or(0);
    // hitters[g]: clusters with a requester of locally cached group g.
    let mut hitters: Vec<Vec<usize>> = vec![Vec::new(); max_group + 1];
    for c in 0..b {
        let cached = drop.cached_groups(c);
        let mut seen = vec![false; max_group + 1];
        for &u in &drop.members[c] {
            let g = drop.users[u].group;
            if g <= cached && !seen[g] {
                seen[g] = true;
                hitters[g].push(c);
            }
        }
    }
    let threshold = min_clusters.clamp(1, b.max(1));
    let widest = hitters.iter().skip(1).map(Vec::len).max().unwrap_or(0);
    let mut hit_groups = Vec::new();
    let mut participants = Vec::new();
    if widest >= threshold {
        for (g, clusters) in hitters.iter().enumerate().skip(1) {
            if clusters.len() == widest {
                hit_groups.push(g);
                participants.push(clusters.clone());
            }
        }
    }

    let mut labels = Vec::with_capacity(drop.users.len());
    let (mut coop, mut ncoop, mut cellular) = (0, 0, 0);
    for u in &drop.users {
        let cached = drop.cached_groups(u.cluster);
        let label = if u.group > cached {
            cellular += 1;
            UserClass::Cellular
        } else if hit_groups.binary_search(&u.group).is_ok() {
            coop += 1;
            UserClass::Coop
        } else {
            ncoop += 1;
            UserClass::NCoop
        };
        labels.push(label);
    }
    Classification {
        labels,
        hit_groups,
        participants,
        coop_users: coop,
        ncoop_users: ncoop,
        cellular_users: cellular,
    }
}
