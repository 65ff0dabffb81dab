//! Finite unions of half-open arcs `(a, b]` of the circle `(-π, π]`.
//!
//! Arcs are stored unwrapped: every stored piece satisfies `-π ≤ a < b ≤ π`, and an
//! arc crossing `π` is kept as two pieces. The canonical form is sorted with
//! touching pieces merged, so set operations are exact on the stored endpoints.

use crate::scalar::{wrap_angle, Real};

#[derive(Debug, Clone, PartialEq)]
pub struct ArcSet<T> {
    pieces: Vec<(T, T)>,
}

impl<T: Real> ArcSet<T> {
    pub fn empty() -> Self {
        ArcSet { pieces: vec![] }
    }

    pub fn full() -> Self {
        ArcSet {
            pieces: vec![(-T::pi(), T::pi())],
        }
    }

    /// `(a, b]` with `-π ≤ a ≤ b ≤ π`; endpoints are kept as given.
    pub fn interval(a: T, b: T) -> Self {
        let pi = T::pi();
        let a = a.max(-pi);
        let b = b.min(pi);
        if a >= b {
            return Self::empty();
        }
        ArcSet {
            pieces: vec![(a, b)],
        }
    }

    /// The arc from `start` running counterclockwise for `length`, wrapping at π.
    pub fn arc(start: T, length: T) -> Self {
        let pi = T::pi();
        let two_pi = T::two_pi();
        if length <= T::zero() {
            return Self::empty();
        }
        if length >= two_pi {
            return Self::full();
        }
        let mut a = wrap_angle(start);
        if a == pi {
            a = -pi;
        }
        let b = a + length;
        if b <= pi {
            Self::interval(a, b)
        } else {
            Self::from_pieces(vec![(a, pi), (-pi, b - two_pi)])
        }
    }

    pub fn from_pieces(mut pieces: Vec<(T, T)>) -> Self {
        let pi = T::pi();
        pieces.retain(|&(a, b)| a < b);
        for p in pieces.iter_mut() {
            p.0 = p.0.max(-pi);
            p.1 = p.1.min(pi);
        }
        pieces.retain(|&(a, b)| a < b);
        pieces.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut out: Vec<(T, T)> = Vec::with_capacity(pieces.len());
        for (a, b) in pieces {
            match out.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => out.push((a, b)),
            }
        }
        ArcSet { pieces: out }
    }

    pub fn pieces(&self) -> &[(T, T)] {
        &self.pieces
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    pub fn contains(&self, u: T) -> bool {
        self.pieces.iter().any(|&(a, b)| u > a && u <= b)
    }

    pub fn length(&self) -> T {
        self.pieces
            .iter()
            .fold(T::zero(), |acc, &(a, b)| acc + (b - a))
    }

    /// Normalized arc length in `[0, 1]`.
    pub fn measure(&self) -> T {
        self.length() / T::two_pi()
    }

    pub fn union(&self, other: &Self) -> Self {
        let mut all = self.pieces.clone();
        all.extend_from_slice(&other.pieces);
        Self::from_pieces(all)
    }

    pub fn intersection(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        for &(a, b) in &self.pieces {
            for &(c, d) in &other.pieces {
                let lo = a.max(c);
                let hi = b.min(d);
                if lo < hi {
                    out.push((lo, hi));
                }
            }
        }
        Self::from_pieces(out)
    }

    pub fn complement(&self) -> Self {
        let pi = T::pi();
        let mut out = Vec::with_capacity(self.pieces.len() + 1);
        let mut cursor = -pi;
        for &(a, b) in &self.pieces {
            if a > cursor {
                out.push((cursor, a));
            }
            cursor = b;
        }
        if cursor < pi {
            out.push((cursor, pi));
        }
        ArcSet { pieces: out }
    }

    pub fn difference(&self, other: &Self) -> Self {
        self.intersection(&other.complement())
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.intersection(other).is_empty()
    }

    /// Image under `u ↦ u + c`.
    pub fn rotate(&self, c: T) -> Self {
        if self.pieces.len() == 1 && self.pieces[0] == (-T::pi(), T::pi()) {
            return self.clone();
        }
        let parts: Vec<(T, T)> = self
            .pieces
            .iter()
            .flat_map(|&(a, b)| Self::arc(a + c, b - a).pieces)
            .collect();
        Self::from_pieces(parts)
    }

    /// Largest endpoint mismatch against another arc set with the same piece
    /// count, or `None` when the piece structure differs.
    pub fn max_endpoint_gap(&self, other: &Self) -> Option<T> {
        if self.pieces.len() != other.pieces.len() {
            return None;
        }
        Some(
            self.pieces
                .iter()
                .zip(&other.pieces)
                .fold(T::zero(), |acc, (p, q)| {
                    acc.max((p.0 - q.0).abs()).max((p.1 - q.1).abs())
                }),
        )
    }
}
