//! Content-only k-means over term-frequency vectors with cosine similarity.
//!
//! Seeding draws `k` distinct documents as initial centroids and scatters the
//! remaining documents uniformly at random over the clusters. Both draws come
//! from one ChaCha8 stream seeded with [`KMeansConfig::seed`], so a run is a
//! pure function of corpus order and configuration.

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::par;
use crate::vsm::{cosine_similarity, Centroid, Corpus, TermVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub max_iterations: usize,
    pub seed: u64,
    /// Stop once an assignment round moves at most this many documents.
    pub tolerance: usize,
}

impl KMeansConfig {
    pub fn new(k: usize, seed: u64) -> Self {
        KMeansConfig {
            k,
            max_iterations: 50,
            seed,
            tolerance: 0,
        }
    }

    pub fn validate(&self, corpus_size: usize) -> Result<()> {
        if self.k == 0 {
            return Err(Error::Config("k must be at least 1".into()));
        }
        if self.k > corpus_size {
            return Err(Error::Config(format!(
                "k = {} exceeds corpus size {corpus_size}",
                self.k
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("max_iterations must be at least 1".into()));
        }
        Ok(())
    }
}

/// Centroids plus the cluster of every document (indexed by corpus position).
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterState {
    pub k: usize,
    pub centroids: Vec<Centroid>,
    pub assignment: Vec<usize>,
    /// Completed assignment rounds.
    pub iteration: usize,
}

impl ClusterState {
    /// Builds a state from an assignment, computing centroids as member means.
    /// Empty clusters get empty centroids; no repair is applied.
    pub fn from_assignment(k: usize, assignment: Vec<usize>, corpus: &Corpus) -> Self {
        let mut state = ClusterState {
            k,
            centroids: Vec::new(),
            assignment,
            iteration: 0,
        };
        state.centroids = compute_centroids(&state, corpus);
        state
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &c in &self.assignment {
            sizes[c] += 1;
        }
        sizes
    }

    pub fn members(&self, cluster: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &c)| c == cluster)
            .map(|(i, _)| i)
            .collect()
    }

    /// Member lists for every cluster, in corpus order.
    pub fn member_lists(&self) -> Vec<Vec<usize>> {
        let mut lists = vec![Vec::new(); self.k];
        for (i, &c) in self.assignment.iter().enumerate() {
            lists[c].push(i);
        }
        lists
    }

    /// Checks that the assignment is a partition of `corpus_size` documents into
    /// `k` non-empty clusters whose centroid counts agree with it.
    pub fn check_partition(&self, corpus_size: usize) -> Result<()> {
        if self.assignment.len() != corpus_size {
            return Err(Error::Config(format!(
                "assignment covers {} of {corpus_size} documents",
                self.assignment.len()
            )));
        }
        if let Some(&bad) = self.assignment.iter().find(|&&c| c >= self.k) {
            return Err(Error::Config(format!("cluster index {bad} out of range")));
        }
        if self.centroids.len() != self.k {
            return Err(Error::Config(format!(
                "{} centroids for k = {}",
                self.centroids.len(),
                self.k
            )));
        }
        let sizes = self.cluster_sizes();
        for (j, (&size, centroid)) in sizes.iter().zip(&self.centroids).enumerate() {
            if size == 0 {
                return Err(Error::Config(format!("cluster {j} is empty")));
            }
            if centroid.member_count != size {
                return Err(Error::Config(format!(
                    "cluster {j} centroid counts {} members, assignment has {size}",
                    centroid.member_count
                )));
            }
        }
        Ok(())
    }
}

fn compute_centroids(state: &ClusterState, corpus: &Corpus) -> Vec<Centroid> {
    let lists = state.member_lists();
    par::map(&lists, |members| {
        let vectors: Vec<&TermVector> = members.iter().map(|&i| &corpus.vectors[i]).collect();
        Centroid::of(&vectors)
    })
}

/// Picks `k` distinct seed documents and scatters the rest at random.
pub fn seed_clusters(corpus: &Corpus, config: &KMeansConfig) -> Result<ClusterState> {
    config.validate(corpus.len())?;
    let n = corpus.len();
    let k = config.k;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let seeds = index::sample(&mut rng, n, k).into_vec();

    let mut assignment = vec![usize::MAX; n];
    for (cluster, &doc) in seeds.iter().enumerate() {
        assignment[doc] = cluster;
    }
    for slot in assignment.iter_mut().filter(|c| **c == usize::MAX) {
        *slot = rng.gen_range(0..k);
    }

    let sizes = {
        let mut s = vec![0; k];
        for &c in &assignment {
            s[c] += 1;
        }
        s
    };
    let centroids = seeds
        .iter()
        .zip(sizes)
        .map(|(&doc, size)| Centroid {
            vector: corpus.vectors[doc].clone(),
            member_count: size,
        })
        .collect();

    Ok(ClusterState {
        k,
        centroids,
        assignment,
        iteration: 0,
    })
}

/// Index of the most similar centroid; ties go to the lowest index.
pub fn nearest_centroid(vector: &TermVector, centroids: &[Centroid]) -> (usize, f64) {
    let mut best = (0, f64::NEG_INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let s = cosine_similarity(vector, &c.vector);
        if s > best.1 {
            best = (j, s);
        }
    }
    best
}

/// Moves every document to its most similar centroid. Centroids are left
/// untouched; returns the new state and the number of documents that moved.
pub fn assign_step(state: &ClusterState, corpus: &Corpus) -> (ClusterState, usize) {
    let assignment = par::map(&corpus.vectors, |v| nearest_centroid(v, &state.centroids).0);
    let moved = assignment
        .iter()
        .zip(&state.assignment)
        .filter(|(a, b)| a != b)
        .count();
    let next = ClusterState {
        k: state.k,
        centroids: state.centroids.clone(),
        assignment,
        iteration: state.iteration + 1,
    };
    (next, moved)
}

/// Recomputes centroids as member means and repairs empty clusters.
///
/// An empty cluster adopts the document least similar to its own cluster's
/// centroid (ties to the lowest corpus position), taken only from clusters
/// with at least two members.
pub fn update_centroids(state: &ClusterState, corpus: &Corpus) -> ClusterState {
    let mut next = ClusterState {
        k: state.k,
        centroids: Vec::new(),
        assignment: state.assignment.clone(),
        iteration: state.iteration,
    };
    next.centroids = compute_centroids(&next, corpus);
    repair_empty_clusters(&mut next, corpus);
    next
}

pub(crate) fn repair_empty_clusters(state: &mut ClusterState, corpus: &Corpus) {
    for empty in 0..state.k {
        if !state.centroids[empty].is_empty() {
            continue;
        }
        let sizes = state.cluster_sizes();
        let similarities = par::map_indexed(&corpus.vectors, |i, v| {
            let c = state.assignment[i];
            cosine_similarity(v, &state.centroids[c].vector)
        });
        let mut pick: Option<(usize, f64)> = None;
        for (i, &s) in similarities.iter().enumerate() {
            if sizes[state.assignment[i]] < 2 {
                continue;
            }
            if pick.is_none_or(|(_, best)| s < best) {
                pick = Some((i, s));
            }
        }
        let Some((doc, _)) = pick else {
            // k > n; validated away before clustering starts.
            continue;
        };
        let donor = state.assignment[doc];
        state.assignment[doc] = empty;
        state.centroids[empty] = Centroid {
            vector: corpus.vectors[doc].clone(),
            member_count: 1,
        };
        let donor_members: Vec<&TermVector> = state
            .members(donor)
            .into_iter()
            .map(|i| &corpus.vectors[i])
            .collect();
        state.centroids[donor] = Centroid::of(&donor_members);
    }
}

/// Runs seeding, then alternates assignment and centroid updates until a
/// round after the first moves no more than `tolerance` documents or
/// `max_iterations` rounds have run.
pub fn run_kmeans(corpus: &Corpus, config: &KMeansConfig) -> Result<ClusterState> {
    run_kmeans_observed(corpus, config, |_| {})
}

/// [`run_kmeans`] with a callback invoked on the state after every round.
pub fn run_kmeans_observed(
    corpus: &Corpus,
    config: &KMeansConfig,
    mut observe: impl FnMut(&ClusterState),
) -> Result<ClusterState> {
    let mut state = seed_clusters(corpus, config)?;
    loop {
        let (assigned, moved) = assign_step(&state, corpus);
        state = update_centroids(&assigned, corpus);
        debug_assert!(state.check_partition(corpus.len()).is_ok());
        observe(&state);
        // Round one measures the random scatter, not convergence: seed
        // centroids are not the means of the scattered clusters.
        let settled = state.iteration > 1 && moved <= config.tolerance;
        if settled || state.iteration >= config.max_iterations {
            return Ok(state);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus_io::Document;
    use std::collections::BTreeSet;

    pub fn corpus_of(docs: &[&[&str]]) -> Corpus {
        Corpus::new(
            docs.iter()
                .enumerate()
                .map(|(i, terms)| Document {
                    doc_id: format!("d{i}"),
                    attributes: BTreeSet::new(),
                    terms: terms.iter().map(|t| t.to_string()).collect(),
                })
                .collect(),
        )
    }

    fn planted() -> Corpus {
        corpus_of(&[&["a", "a", "b"], &["a", "a"], &["x", "y"], &["x", "x", "y"]])
    }

    fn centroid(pairs: &[(&str, f64)], members: usize) -> Centroid {
        Centroid {
            vector: TermVector::from_weights(pairs.iter().map(|(t, w)| (*t, *w))),
            member_count: members,
        }
    }

    #[test]
    fn seeding_when_k_equals_n() {
        let corpus = corpus_of(&[&["a"], &["b"]]);
        let state = seed_clusters(&corpus, &KMeansConfig::new(2, 7)).unwrap();
        let mut sorted = state.assignment.clone();
        sorted.sort();
        assert_eq!(sorted, vec![0, 1]);
        assert_eq!(state.iteration, 0);
        state.check_partition(2).unwrap();
    }

    #[test]
    fn seeding_single_cluster() {
        let corpus = corpus_of(&[&["a"], &["b"], &["c"], &["d"], &["e"]]);
        let state = seed_clusters(&corpus, &KMeansConfig::new(1, 3)).unwrap();
        assert_eq!(state.assignment, vec![0; 5]);
    }

    #[test]
    fn seeding_is_deterministic_and_validates_k() {
        let corpus = planted();
        let cfg = KMeansConfig::new(2, 99);
        assert_eq!(
            seed_clusters(&corpus, &cfg).unwrap(),
            seed_clusters(&corpus, &cfg).unwrap()
        );
        assert!(seed_clusters(&corpus, &KMeansConfig::new(0, 1)).is_err());
        assert!(seed_clusters(&corpus, &KMeansConfig::new(5, 1)).is_err());
    }

    #[test]
    fn assignment_argmax_and_ties() {
        let corpus = corpus_of(&[&["a"], &["a", "b"]]);
        let state = ClusterState {
            k: 2,
            centroids: vec![centroid(&[("a", 1.0)], 1), centroid(&[("b", 1.0)], 1)],
            assignment: vec![1, 1],
            iteration: 0,
        };
        let (next, moved) = assign_step(&state, &corpus);
        // doc0: (1.0, 0.0) -> 0; doc1: (0.707, 0.707) -> tie -> 0
        assert_eq!(next.assignment, vec![0, 0]);
        assert_eq!(moved, 2);
        assert_eq!(next.iteration, 1);

        let (again, moved_again) = assign_step(&next, &corpus);
        assert_eq!(moved_again, 0);
        assert_eq!(again.assignment, next.assignment);
    }

    #[test]
    fn centroid_update_and_singletons() {
        let corpus = corpus_of(&[&["a", "a"], &["a", "a", "a", "a"], &["z"]]);
        let state = ClusterState::from_assignment(2, vec![0, 0, 1], &corpus);
        let updated = update_centroids(&state, &corpus);
        assert_eq!(updated.centroids[0], centroid(&[("a", 3.0)], 2));
        assert_eq!(updated.centroids[1], centroid(&[("z", 1.0)], 1));
    }

    #[test]
    fn empty_cluster_is_repaired_with_least_similar_document() {
        let corpus = corpus_of(&[&["a"], &["a"], &["b"]]);
        let state = ClusterState::from_assignment(2, vec![0, 0, 0], &corpus);
        let repaired = update_centroids(&state, &corpus);
        repaired.check_partition(3).unwrap();
        assert_eq!(repaired.assignment, vec![0, 0, 1]);
        assert_eq!(repaired.centroids[0], centroid(&[("a", 1.0)], 2));
    }

    #[test]
    fn repair_ties_pick_lowest_position() {
        let corpus = corpus_of(&[&["a"], &["a"]]);
        let state = ClusterState::from_assignment(2, vec![0, 0], &corpus);
        let repaired = update_centroids(&state, &corpus);
        assert_eq!(repaired.assignment, vec![1, 0]);
    }

    fn within_similarity(corpus: &Corpus, assignment: &[usize], k: usize) -> f64 {
        // Independent centroid computation from raw term counts.
        let mut total = 0.0;
        for j in 0..k {
            let members: Vec<usize> = (0..assignment.len()).filter(|&i| assignment[i] == j).collect();
            let mut sums = std::collections::BTreeMap::<String, f64>::new();
            for &i in &members {
                for t in &corpus.documents[i].terms {
                    *sums.entry(t.clone()).or_default() += 1.0;
                }
            }
            let n = members.len() as f64;
            let mean: Vec<(String, f64)> = sums.into_iter().map(|(t, s)| (t, s / n)).collect();
            let mean_norm = mean.iter().map(|(_, w)| w * w).sum::<f64>().sqrt();
            for &i in &members {
                let v = &corpus.vectors[i];
                let dot: f64 = mean.iter().map(|(t, w)| w * v.get(t)).sum();
                total += dot / (mean_norm * v.norm());
            }
        }
        total
    }

    #[test]
    fn planted_partition_is_the_unique_best_bipartition() {
        let corpus = planted();
        // Enumerate the 7 bipartitions: docs 1..3 choose a side, doc 0 fixed on side 0.
        let mut scores: Vec<(f64, Vec<usize>)> = (0u32..8)
            .map(|mask| {
                let a: Vec<usize> = (0..4)
                    .map(|i| if i == 0 { 0 } else { ((mask >> (i - 1)) & 1) as usize })
                    .collect();
                a
            })
            .filter(|a| a.contains(&1))
            .map(|a| (within_similarity(&corpus, &a, 2), a))
            .collect();
        assert_eq!(scores.len(), 7);
        scores.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
        assert_eq!(scores[0].1, vec![0, 0, 1, 1]);
        assert!(scores[0].0 > scores[1].0 + 1e-6);

        for seed in 0..64 {
            let state = run_kmeans(&corpus, &KMeansConfig::new(2, seed)).unwrap();
            let a = &state.assignment;
            assert_eq!(a[0], a[1], "seed {seed}");
            assert_eq!(a[2], a[3], "seed {seed}");
            assert_ne!(a[0], a[2], "seed {seed}");
        }
    }

    #[test]
    fn k_equals_n_gives_singletons() {
        let corpus = corpus_of(&[&["a", "b"], &["b", "c", "c"], &["c", "d"], &["e"], &["a", "e", "e"]]);
        for seed in 0..16 {
            let state = run_kmeans(&corpus, &KMeansConfig::new(5, seed)).unwrap();
            let mut sizes = state.cluster_sizes();
            sizes.sort();
            assert_eq!(sizes, vec![1; 5]);
            // No document strictly prefers another singleton's centroid.
            for (i, v) in corpus.vectors.iter().enumerate() {
                let own = cosine_similarity(v, &state.centroids[state.assignment[i]].vector);
                assert!((own - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn single_cluster_centroid_is_corpus_mean() {
        let corpus = planted();
        let state = run_kmeans(&corpus, &KMeansConfig::new(1, 0)).unwrap();
        assert_eq!(state.assignment, vec![0; 4]);
        let all: Vec<&TermVector> = corpus.vectors.iter().collect();
        assert_eq!(state.centroids[0].vector, crate::vsm::mean_vector(&all).unwrap());
    }

    #[test]
    fn terminates_within_max_iterations() {
        // Two identical documents with k = 2 oscillate through empty-cluster repair.
        let corpus = corpus_of(&[&["a"], &["a"]]);
        let mut cfg = KMeansConfig::new(2, 1);
        cfg.max_iterations = 7;
        let mut rounds = 0;
        let state = run_kmeans_observed(&corpus, &cfg, |s| {
            rounds += 1;
            s.check_partition(2).unwrap();
        })
        .unwrap();
        assert!(rounds <= 7);
        assert!(state.iteration <= 7);
    }
}
