//! Sparse term vectors and the cosine geometry both clustering stages share.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus_io::Document;
use crate::error::{Error, Result};
use crate::par;

/// Sparse map from term to a non-negative weight. Zero weights are never
/// stored, so an empty vector is exactly the zero vector.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TermVector {
    entries: BTreeMap<String, f64>,
}

impl TermVector {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a vector from `(term, weight)` pairs, summing repeated terms and
    /// dropping zero or negative results.
    pub fn from_weights<I, S>(weights: I) -> Self
    where
        I: IntoIterator<Item = (S, f64)>,
        S: Into<String>,
    {
        let mut entries = BTreeMap::new();
        for (term, w) in weights {
            *entries.entry(term.into()).or_insert(0.0) += w;
        }
        entries.retain(|_, w| *w > 0.0);
        TermVector { entries }
    }

    /// Raw term frequency: each term weighs its number of occurrences.
    pub fn from_terms<S: AsRef<str>>(terms: &[S]) -> Self {
        let mut entries: BTreeMap<String, f64> = BTreeMap::new();
        for t in terms {
            *entries.entry(t.as_ref().to_string()).or_insert(0.0) += 1.0;
        }
        TermVector { entries }
    }

    pub fn get(&self, term: &str) -> f64 {
        self.entries.get(term).copied().unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.entries.iter().map(|(t, w)| (t.as_str(), *w))
    }

    pub fn norm(&self) -> f64 {
        self.entries.values().map(|w| w * w).sum::<f64>().sqrt()
    }

    /// Sparse dot product by merging the two sorted term lists.
    pub fn dot(&self, other: &TermVector) -> f64 {
        let (small, large) = if self.len() <= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        small
            .entries
            .iter()
            .filter_map(|(t, w)| large.entries.get(t).map(|v| w * v))
            .sum()
    }

    pub fn scaled(&self, factor: f64) -> TermVector {
        TermVector::from_weights(self.iter().map(|(t, w)| (t.to_string(), w * factor)))
    }

    /// Applies `f` to every weight, dropping entries that become non-positive.
    pub fn map_weights(&self, f: impl Fn(f64) -> f64) -> TermVector {
        TermVector::from_weights(self.iter().map(|(t, w)| (t.to_string(), f(w))))
    }
}

pub fn term_frequency_vector(doc: &Document) -> TermVector {
    TermVector::from_terms(&doc.terms)
}

/// `dot(u, v) / (|u| |v|)`, or 0 when either vector is zero.
pub fn cosine_similarity(u: &TermVector, v: &TermVector) -> f64 {
    let nu = u.norm();
    let nv = v.norm();
    if nu == 0.0 || nv == 0.0 {
        return 0.0;
    }
    (u.dot(v) / (nu * nv)).clamp(0.0, 1.0)
}

/// Per-term arithmetic mean; a term missing from a vector counts as 0.
pub fn mean_vector(vectors: &[&TermVector]) -> Result<TermVector> {
    if vectors.is_empty() {
        return Err(Error::EmptyCentroid);
    }
    let mut sums: BTreeMap<&str, f64> = BTreeMap::new();
    for v in vectors {
        for (t, w) in v.iter() {
            *sums.entry(t).or_insert(0.0) += w;
        }
    }
    let n = vectors.len() as f64;
    Ok(TermVector::from_weights(
        sums.into_iter().map(|(t, s)| (t.to_string(), s / n)),
    ))
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Centroid {
    pub vector: TermVector,
    pub member_count: usize,
}

impl Centroid {
    pub fn of(members: &[&TermVector]) -> Self {
        match mean_vector(members) {
            Ok(vector) => Centroid {
                vector,
                member_count: members.len(),
            },
            Err(_) => Centroid::default(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.member_count == 0
    }
}

/// Documents together with their precomputed term-frequency vectors, in
/// `doc_id` order.
#[derive(Debug, Clone)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vectors: Vec<TermVector>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        let vectors = par::map(&documents, term_frequency_vector);
        Corpus { documents, vectors }
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tv(pairs: &[(&str, f64)]) -> TermVector {
        TermVector::from_weights(pairs.iter().map(|(t, w)| (*t, *w)))
    }

    #[test]
    fn counts_terms() {
        assert_eq!(TermVector::from_terms(&["a", "b", "a"]), tv(&[("a", 2.0), ("b", 1.0)]));
        assert!(TermVector::from_terms::<&str>(&[]).is_empty());
        assert_eq!(
            TermVector::from_terms(&["x", "y", "z", "x", "x"]),
            tv(&[("x", 3.0), ("y", 1.0), ("z", 1.0)])
        );
    }

    #[test]
    #[allow(clippy::approx_constant)]
    fn cosine_examples() {
        let u = tv(&[("a", 3.0), ("b", 4.0)]);
        assert_eq!(cosine_similarity(&u, &u), 1.0);
        assert_eq!(cosine_similarity(&tv(&[("a", 1.0)]), &tv(&[("b", 1.0)])), 0.0);
        let s = cosine_similarity(&tv(&[("a", 1.0), ("b", 1.0)]), &tv(&[("a", 1.0)]));
        assert!((s - 0.70710678).abs() < 1e-8);
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        assert_eq!(cosine_similarity(&TermVector::new(), &u), 0.0);
    }

    #[test]
    fn mean_examples() {
        let (a2, a4) = (tv(&[("a", 2.0)]), tv(&[("a", 4.0)]));
        assert_eq!(mean_vector(&[&a2, &a4]).unwrap(), tv(&[("a", 3.0)]));
        let (ab, bc) = (tv(&[("a", 1.0), ("b", 1.0)]), tv(&[("b", 1.0), ("c", 1.0)]));
        assert_eq!(
            mean_vector(&[&ab, &bc]).unwrap(),
            tv(&[("a", 0.5), ("b", 1.0), ("c", 0.5)])
        );
        let a1 = tv(&[("a", 1.0)]);
        assert_eq!(mean_vector(&[&a1]).unwrap(), a1);
        assert!(matches!(mean_vector(&[]), Err(Error::EmptyCentroid)));
    }

    #[test]
    fn zero_weights_are_dropped() {
        let v = tv(&[("a", 0.0), ("b", 1.0)]);
        assert_eq!(v.len(), 1);
        assert!(TermVector::new().norm() == 0.0);
        assert!(Centroid::of(&[]).is_empty());
    }

    fn sparse_vector() -> impl Strategy<Value = TermVector> {
        proptest::collection::btree_map("[a-h]", 0.0f64..20.0, 0..8)
            .prop_map(TermVector::from_weights)
    }

    proptest! {
        #[test]
        fn cosine_is_bounded_and_symmetric(u in sparse_vector(), v in sparse_vector()) {
            let s = cosine_similarity(&u, &v);
            prop_assert!((0.0..=1.0).contains(&s));
            prop_assert!((s - cosine_similarity(&v, &u)).abs() <= 1e-9);
        }

        #[test]
        fn cosine_is_scale_invariant(u in sparse_vector(), v in sparse_vector(), c in 0.01f64..100.0) {
            let s = cosine_similarity(&u, &v);
            prop_assert!((cosine_similarity(&u.scaled(c), &v) - s).abs() <= 1e-9);
        }

        #[test]
        fn norm_zero_iff_empty(u in sparse_vector()) {
            prop_assert_eq!(u.norm() == 0.0, u.is_empty());
        }

        #[test]
        fn mean_of_copies(v in sparse_vector(), n in 1usize..20) {
            let copies: Vec<&TermVector> = std::iter::repeat_n(&v, n).collect();
            let m = mean_vector(&copies).unwrap();
            prop_assert_eq!(m.len(), v.len());
            for (t, w) in v.iter() {
                prop_assert!((m.get(t) - w).abs() <= 1e-12);
            }
        }
    }
}
